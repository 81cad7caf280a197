"""Spectra of fitted operators and frequency track bookkeeping.

A discrete-time operator advances snapshots by one sample interval dt, so
an eigenvalue mu maps to a continuous-time exponent and frequency::

    lambda = log(mu) / dt          (principal branch)
    freq_hz = imag(lambda) / (2 pi)

Dominance is ranked by how strongly each eigendirection participates in a
reference state: the amplitudes are the moduli of the least-squares
expansion coefficients of that state in the eigenvector basis (falling
back to |mu| when no reference is given).  Real operators carry their
complex eigenvalues in conjugate pairs; ranking collapses each pair to
the member with nonnegative frequency so a physical tone appears once.

Frequency tracks from streaming runs accumulate in a
:class:`TrackRecord`, one row per (step, algorithm, dominance rank),
written as CSV with full float64 precision.
"""

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernel
from .errors import DataError, ParameterError, ParseError, ShapeError

__all__ = ["Spectrum", "spectrum_of", "rank_dominant", "TrackRecord",
           "read_track_csv", "format_track_row", "TRACK_COLUMNS"]

TRACK_COLUMNS = ("step", "time", "algorithm", "idx", "re_lambda",
                 "im_lambda", "freq_hz", "amplitude", "rank")


@dataclass
class Spectrum:
    """Eigenstructure of one fitted operator at sample interval dt.

    Attributes:
        mu: discrete-time eigenvalues.
        lam: continuous-time exponents log(mu)/dt, principal branch; a
            zero-modulus mu yields -inf real part and is flagged.
        freq_hz: imag(lam) / 2 pi.
        modes: right eigenvectors, one column per eigenvalue.
        amplitudes: dominance amplitudes (see module docstring).
        dt: sample interval in seconds.
        converged: False when the eigensolve failed; arrays hold NaN.
        zero_modulus: boolean mask of eigenvalues with |mu| = 0.
    """

    mu: np.ndarray
    lam: np.ndarray
    freq_hz: np.ndarray
    modes: np.ndarray
    amplitudes: np.ndarray
    dt: float
    converged: bool = True
    zero_modulus: np.ndarray = None


def spectrum_of(a_mat, dt, reference_state=None):
    """Eigendecompose a real square operator fitted at sample interval dt.

    Args:
        a_mat: (n, n) real operator.
        dt: sample interval, dt > 0.
        reference_state: optional state vector whose expansion in the
            eigenbasis defines the dominance amplitudes; without it the
            amplitudes are |mu|.

    Returns:
        :class:`Spectrum`.
    """
    if not (dt > 0.0 and np.isfinite(dt)):
        raise ParameterError(f"dt must be positive, got {dt}")
    decomp = kernel.eig(a_mat)
    mu = decomp.eigenvalues
    if not decomp.converged:
        n = mu.shape[0]
        nan = np.full(n, np.nan)
        return Spectrum(mu=mu, lam=nan.astype(complex), freq_hz=nan,
                        modes=decomp.eigenvectors, amplitudes=nan,
                        dt=float(dt), converged=False,
                        zero_modulus=np.zeros(n, dtype=bool))
    zero = np.abs(mu) == 0.0
    lam = np.empty_like(mu)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam[~zero] = np.log(mu[~zero]) / dt
    lam[zero] = complex(-np.inf, 0.0)
    freq = lam.imag / (2.0 * math.pi)
    if reference_state is not None:
        ref = np.asarray(reference_state, dtype=np.float64).ravel()
        if ref.shape[0] != mu.shape[0]:
            raise ShapeError(
                f"reference state has dimension {ref.shape[0]}, operator "
                f"has {mu.shape[0]}")
        coeffs, *_ = np.linalg.lstsq(decomp.eigenvectors,
                                     ref.astype(complex), rcond=None)
        amplitudes = np.abs(coeffs)
    else:
        amplitudes = np.abs(mu)
    return Spectrum(mu=mu, lam=lam, freq_hz=freq,
                    modes=decomp.eigenvectors, amplitudes=amplitudes,
                    dt=float(dt), converged=True, zero_modulus=zero)


def rank_dominant(spectrum, count):
    """Indices of the ``count`` most dominant collapsed eigenvalues.

    Conjugate pairs collapse to the member with nonnegative frequency
    (exact pairing is guaranteed for real operators), so the result never
    contains a negative frequency.  Sorting is by amplitude descending,
    frequency ascending on ties, index as the final tie break.  Asking for
    more representatives than exist yields a truncated list and a warning.
    """
    if not spectrum.converged:
        raise DataError("cannot rank an unconverged spectrum")
    n = spectrum.mu.shape[0]
    if not 1 <= count <= n:
        raise ParameterError(f"count must be in [1, {n}], got {count}")
    reps = [i for i in range(n) if spectrum.mu[i].imag >= 0.0]
    reps.sort(key=lambda i: (-spectrum.amplitudes[i], spectrum.freq_hz[i], i))
    if count > len(reps):
        warnings.warn(
            f"requested {count} dominant eigenvalues but only {len(reps)} "
            f"distinct representatives exist; returning {len(reps)}",
            stacklevel=2)
        count = len(reps)
    return reps[:count]


@dataclass
class TrackRecord:
    """Accumulated frequency-track rows from one or more streaming runs."""

    rows: list = field(default_factory=list)

    def append_track(self, step, spectrum, label, count):
        """Append the ``count`` dominant eigenvalues of one step.

        Row time is step * dt.  Returns self for chaining.
        """
        order = rank_dominant(spectrum, count)
        time = step * spectrum.dt
        for rank, idx in enumerate(order, start=1):
            lam = spectrum.lam[idx]
            self.rows.append((int(step), float(time), str(label), int(idx),
                              float(lam.real), float(lam.imag),
                              float(spectrum.freq_hz[idx]),
                              float(spectrum.amplitudes[idx]), rank))
        return self

    def labels(self):
        """Distinct algorithm labels in first-appearance order."""
        seen = []
        for row in self.rows:
            if row[2] not in seen:
                seen.append(row[2])
        return seen

    def select(self, label=None, rank=None):
        """Rows filtered by algorithm label and/or dominance rank."""
        out = self.rows
        if label is not None:
            out = [r for r in out if r[2] == label]
        if rank is not None:
            out = [r for r in out if r[8] == rank]
        return out

    def column(self, name, label=None, rank=None):
        """One column of the filtered rows as a numpy array."""
        pos = TRACK_COLUMNS.index(name)
        rows = self.select(label, rank)
        if name == "algorithm":
            return np.array([r[pos] for r in rows], dtype=object)
        return np.array([r[pos] for r in rows], dtype=np.float64)

    def write_csv(self, dest):
        """Write all rows as CSV with 17 significant digits per float."""
        own = False
        if isinstance(dest, (str, Path)):
            dest = open(dest, "w", encoding="utf-8")
            own = True
        try:
            dest.write(",".join(TRACK_COLUMNS) + "\n")
            for row in self.rows:
                dest.write(format_track_row(row) + "\n")
        finally:
            if own:
                dest.close()


def format_track_row(row):
    """One track row as a CSV line, floats at 17 significant digits."""
    step, time, label, idx, re_l, im_l, freq, amp, rank = row
    return (f"{step},{time:.17g},{label},{idx},{re_l:.17g},"
            f"{im_l:.17g},{freq:.17g},{amp:.17g},{rank}")


def read_track_csv(source):
    """Parse a track CSV back into a :class:`TrackRecord`."""
    own = False
    if isinstance(source, (str, Path)):
        source = open(source, "r", encoding="utf-8")
        own = True
    try:
        record = TrackRecord()
        lines = iter(enumerate(source, start=1))
        try:
            _, first = next(lines)
        except StopIteration:
            raise ParseError("empty track CSV") from None
        if first.strip() != ",".join(TRACK_COLUMNS):
            raise ParseError("unexpected track CSV header", line=1)
        for lineno, line in lines:
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != len(TRACK_COLUMNS):
                raise ParseError(
                    f"expected {len(TRACK_COLUMNS)} fields, got "
                    f"{len(fields)}", line=lineno)
            try:
                record.rows.append((
                    int(fields[0]), float(fields[1]), fields[2],
                    int(fields[3]), float(fields[4]), float(fields[5]),
                    float(fields[6]), float(fields[7]), int(fields[8])))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
        return record
    finally:
        if own:
            source.close()
