"""Snapshot pairing, stacking, and the snapshot CSV stream format.

A snapshot is a state vector x_j; a snapshot pair (x_j, y_j) couples a
state with its successor y_j = x_{j+1} (or with a generic regressand when
pairs are supplied explicitly).  Files carry one header comment::

    # n=<int> dt=<float> pairing=<trajectory|pairs>

followed by one CSV row per snapshot (trajectory mode, n values) or per
pair (pairs mode, 2n values: x then y).  Values are validated to be finite
here, at the ingestion boundary, so the numeric code downstream can assume
clean arrays.
"""

import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DataError, InsufficientDataError, ParseError, ShapeError

_HEADER_RE = re.compile(
    r"^#\s*n=(\d+)\s+dt=([^\s]+)\s+pairing=(trajectory|pairs)\s*$")


class SnapshotPair(NamedTuple):
    """One regression sample: map ``x`` to ``y``, at stream position ``index``."""

    x: np.ndarray
    y: np.ndarray
    index: int


@dataclass
class StreamHeader:
    """Metadata line of a snapshot CSV stream."""

    n: int
    dt: float = 1.0
    pairing: str = "trajectory"

    def __post_init__(self):
        if self.n < 1:
            raise ParseError(f"header n must be >= 1, got {self.n}")
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ParseError(f"header dt must be positive, got {self.dt}")
        if self.pairing not in ("trajectory", "pairs"):
            raise ParseError(
                f"header pairing must be 'trajectory' or 'pairs', "
                f"got {self.pairing!r}")

    def format(self):
        return f"# n={self.n} dt={self.dt!r} pairing={self.pairing}"


@dataclass
class SnapshotMatrices:
    """Column-stacked snapshot pairs: X holds the x_j, Y the y_j.

    Shapes are (n, k) and (n_out, k); column j of each is pair j.  For
    trajectory data n_out == n, but regressands of a different dimension
    (lifted states, outputs) are allowed.
    """

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        self.Y = np.atleast_2d(np.asarray(self.Y, dtype=np.float64))
        if self.X.ndim != 2 or self.Y.ndim != 2:
            raise ShapeError("snapshot matrices must be 2-d")
        if self.X.shape[1] != self.Y.shape[1]:
            raise ShapeError(
                f"X and Y must have the same number of columns, got "
                f"{self.X.shape} and {self.Y.shape}")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def n_out(self):
        return self.Y.shape[0]

    @property
    def k(self):
        return self.X.shape[1]

    def unstack(self):
        """Recover the list of pairs whose columns these matrices are."""
        return [SnapshotPair(self.X[:, j].copy(), self.Y[:, j].copy(), j)
                for j in range(self.k)]


def _clean_state(vec, what, index):
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim != 1:
        raise ShapeError(f"{what} {index} must be 1-d, got ndim={vec.ndim}")
    if not np.all(np.isfinite(vec)):
        raise DataError(f"{what} {index} contains NaN or infinity")
    return vec


def pair_trajectory(states):
    """Couple consecutive states of one trajectory into snapshot pairs.

    Args:
        states: sequence of m state vectors (or an (m, n) array), m >= 2.

    Returns:
        List of m - 1 pairs; pair j maps state j to state j + 1.
    """
    states = [_clean_state(s, "state", i) for i, s in enumerate(states)]
    if len(states) < 2:
        raise InsufficientDataError(
            f"need at least 2 states to form a pair, got {len(states)}")
    n = states[0].shape[0]
    for i, s in enumerate(states):
        if s.shape[0] != n:
            raise ShapeError(
                f"state {i} has dimension {s.shape[0]}, expected {n}")
    return [SnapshotPair(states[j], states[j + 1], j)
            for j in range(len(states) - 1)]


def stack(pairs):
    """Column-stack snapshot pairs into a :class:`SnapshotMatrices`."""
    pairs = list(pairs)
    if not pairs:
        raise InsufficientDataError("cannot stack an empty pair sequence")
    xs, ys = [], []
    n = len(np.asarray(pairs[0].x).ravel())
    n_out = len(np.asarray(pairs[0].y).ravel())
    for i, pair in enumerate(pairs):
        x = _clean_state(pair.x, "pair x", i)
        y = _clean_state(pair.y, "pair y", i)
        if x.shape[0] != n or y.shape[0] != n_out:
            raise ShapeError(
                f"pair {i} has shape ({x.shape[0]}, {y.shape[0]}), "
                f"expected ({n}, {n_out})")
        xs.append(x)
        ys.append(y)
    return SnapshotMatrices(np.stack(xs, axis=1), np.stack(ys, axis=1))


def parse_header(line, lineno=1):
    """Parse the header comment of a snapshot stream."""
    match = _HEADER_RE.match(line.strip())
    if match is None:
        raise ParseError(
            "expected header '# n=<int> dt=<float> pairing=<trajectory|pairs>'",
            line=lineno)
    try:
        dt = float(match.group(2))
    except ValueError:
        raise ParseError(f"bad dt value {match.group(2)!r}", line=lineno) from None
    return StreamHeader(n=int(match.group(1)), dt=dt, pairing=match.group(3))


def _parse_row(line, lineno, width):
    fields = line.split(",")
    if len(fields) != width:
        raise ParseError(
            f"expected {width} comma-separated values, got {len(fields)}",
            line=lineno)
    row = np.empty(width, dtype=np.float64)
    for i, field in enumerate(fields):
        try:
            row[i] = float(field)
        except ValueError:
            raise ParseError(
                f"field {i + 1} is not a number: {field.strip()!r}",
                line=lineno) from None
    if not np.all(np.isfinite(row)):
        raise DataError(f"line {lineno}: NaN or infinity in snapshot data")
    return row


def read_stream(source, header=None, start_line=1):
    """Lazily yield snapshot pairs from a snapshot CSV stream.

    Args:
        source: path or open text file.  The file must begin with a header
            comment unless ``header`` is supplied, in which case leading
            comment lines are skipped instead of parsed.
        header: optional :class:`StreamHeader` overriding the in-file one.
        start_line: line number of the first line of ``source``, for
            error reporting when the caller already consumed a prefix.

    Yields:
        :class:`SnapshotPair` in stream order.  Trajectory mode pairs
        consecutive rows, so m rows give m - 1 pairs; pairs mode yields one
        pair per row.
    """
    own = False
    if isinstance(source, (str, Path)):
        source = open(source, "r", encoding="utf-8")
        own = True
    try:
        lines = enumerate(source, start=start_line)
        if header is None:
            for lineno, line in lines:
                if line.strip():
                    header = parse_header(line, lineno)
                    break
            if header is None:
                raise ParseError("empty stream: missing header line")
        else:
            # Explicit header: tolerate and skip any comment lines.
            pass
        width = header.n if header.pairing == "trajectory" else 2 * header.n
        prev = None
        index = 0
        for lineno, line in lines:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                continue
            row = _parse_row(line, lineno, width)
            if header.pairing == "pairs":
                yield SnapshotPair(row[:header.n], row[header.n:], index)
                index += 1
            else:
                if prev is not None:
                    yield SnapshotPair(prev, row, index)
                    index += 1
                prev = row
    finally:
        if own:
            source.close()


def write_snapshot_csv(dest, states, dt=1.0):
    """Write states as a trajectory-mode snapshot CSV.

    Values are written with ``repr`` so reading the file back reproduces
    the exact float64 values.
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    header = StreamHeader(n=states.shape[1], dt=dt, pairing="trajectory")
    _write_rows(dest, header, states)


def write_pairs_csv(dest, x_mat, y_mat, dt=1.0):
    """Write explicit (x, y) pairs as a pairs-mode snapshot CSV.

    ``x_mat`` and ``y_mat`` are (n, k) with one pair per column, matching
    :class:`SnapshotMatrices`.
    """
    snaps = SnapshotMatrices(x_mat, y_mat)
    if snaps.n_out != snaps.n:
        raise ShapeError("pairs mode requires x and y of equal dimension")
    header = StreamHeader(n=snaps.n, dt=dt, pairing="pairs")
    rows = np.concatenate([snaps.X.T, snaps.Y.T], axis=1)
    _write_rows(dest, header, rows)


def _write_rows(dest, header, rows):
    own = False
    if isinstance(dest, (str, Path)):
        dest = open(dest, "w", encoding="utf-8")
        own = True
    try:
        dest.write(header.format() + "\n")
        for row in rows:
            dest.write(",".join(repr(float(v)) for v in row) + "\n")
    finally:
        if own:
            dest.close()
