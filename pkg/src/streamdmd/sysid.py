"""System identification by streaming regression on lifted snapshots.

A controlled system x_{k+1} = f(x_k, u_k) is fitted as a linear map on a
feature vector z_k built from a term dictionary::

    x_{k+1} = A_hat z(x_k, u_k)

With the linear dictionary (states then inputs) this is the classic
x_{k+1} = A x_k + B u_k and A_hat is [A B].  Richer dictionaries add
squares and state-input products, capturing weakly nonlinear dynamics
while keeping the estimation problem linear, so the same streaming
updates apply unchanged: the regressor is z instead of x.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (DataError, InsufficientDataError, ParameterError,
                     ParseError, ShapeError)
from .online import OnlineDMD
from .snapshots import SnapshotPair, stack
from .windowed import WindowedDMD

__all__ = ["Term", "Dictionary", "SysIdModel", "lift", "identify_stream",
           "read_sample_csv", "write_sample_csv"]

_SAMPLE_HEADER_RE = re.compile(r"^#\s*n=(\d+)\s+p=(\d+)\s*$")

_KINDS = ("constant", "state", "input", "square_state", "square_input",
          "product")


@dataclass(frozen=True)
class Term:
    """One dictionary feature.

    kind is one of constant, state, input, square_state, square_input, or
    product; ``i`` indexes a state, ``j`` an input.  product(i, j) is the
    cross feature x_i * u_j.
    """

    kind: str
    i: int = -1
    j: int = -1

    def __str__(self):
        if self.kind == "constant":
            return "1"
        if self.kind == "state":
            return f"x{self.i}"
        if self.kind == "input":
            return f"u{self.j}"
        if self.kind == "square_state":
            return f"x{self.i}^2"
        if self.kind == "square_input":
            return f"u{self.j}^2"
        return f"x{self.i}*u{self.j}"


@dataclass
class Dictionary:
    """Ordered, duplicate-free list of features over (x, u).

    Attributes:
        n: state dimension of x.
        p: input dimension of u.
        terms: ordered features; their count q is the regression dimension.
    """

    n: int
    p: int
    terms: list = field(default_factory=list)

    def __post_init__(self):
        if self.n < 1 or self.p < 0:
            raise ParameterError(
                f"need n >= 1 and p >= 0, got n={self.n}, p={self.p}")
        if not self.terms:
            raise ParameterError("dictionary has no terms")
        seen = set()
        for term in self.terms:
            if term.kind not in _KINDS:
                raise ParameterError(f"unknown term kind {term.kind!r}")
            if term.kind in ("state", "square_state", "product"):
                if not 0 <= term.i < self.n:
                    raise ParameterError(
                        f"term {term} references state {term.i}, "
                        f"n={self.n}")
            if term.kind in ("input", "square_input", "product"):
                if not 0 <= term.j < self.p:
                    raise ParameterError(
                        f"term {term} references input {term.j}, "
                        f"p={self.p}")
            if term in seen:
                raise ParameterError(f"duplicate dictionary term {term}")
            seen.add(term)

    @property
    def q(self):
        return len(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def lift(self, x, u):
        """Evaluate the features at one (x, u) sample."""
        x = np.asarray(x, dtype=np.float64).ravel()
        u = np.asarray(u, dtype=np.float64).ravel()
        if x.shape[0] != self.n:
            raise ShapeError(f"x has dimension {x.shape[0]}, expected {self.n}")
        if u.shape[0] != self.p:
            raise ShapeError(f"u has dimension {u.shape[0]}, expected {self.p}")
        z = np.empty(self.q)
        for idx, term in enumerate(self.terms):
            if term.kind == "constant":
                z[idx] = 1.0
            elif term.kind == "state":
                z[idx] = x[term.i]
            elif term.kind == "input":
                z[idx] = u[term.j]
            elif term.kind == "square_state":
                z[idx] = x[term.i] * x[term.i]
            elif term.kind == "square_input":
                z[idx] = u[term.j] * u[term.j]
            else:
                z[idx] = x[term.i] * u[term.j]
        return z

    @classmethod
    def linear(cls, n, p):
        """States then inputs: the fit recovers [A B] in that column order."""
        terms = [Term("state", i=i) for i in range(n)]
        terms += [Term("input", j=j) for j in range(p)]
        return cls(n, p, terms)

    @classmethod
    def quadratic(cls, n, p):
        """All terms of degree at most two in separate variables.

        Order: states, squared states, inputs, squared inputs, then the
        state-input products row-major.  For scalar x and u this is
        (x, x^2, u, u^2, x*u).
        """
        terms = [Term("state", i=i) for i in range(n)]
        terms += [Term("square_state", i=i) for i in range(n)]
        terms += [Term("input", j=j) for j in range(p)]
        terms += [Term("square_input", j=j) for j in range(p)]
        terms += [Term("product", i=i, j=j)
                  for i in range(n) for j in range(p)]
        return cls(n, p, terms)

    def __repr__(self):
        names = ", ".join(str(t) for t in self.terms)
        return f"Dictionary(n={self.n}, p={self.p}, terms=[{names}])"


def lift(dictionary, x, u):
    """Module-level alias of :meth:`Dictionary.lift`."""
    return dictionary.lift(x, u)


@dataclass
class SysIdModel:
    """Fitted lifted-regression model x_next = A_hat z(x, u)."""

    A_hat: np.ndarray
    dictionary: Dictionary

    @property
    def n(self):
        return self.A_hat.shape[0]

    @property
    def p(self):
        return self.dictionary.p

    def predict(self, x, u):
        """One-step prediction A_hat z(x, u)."""
        return self.A_hat @ self.dictionary.lift(x, u)


def identify_stream(samples, dictionary, mode="online", rho=1.0, w=None,
                    init_size=None):
    """Fit a lifted model from a stream of (x, u, x_next) samples.

    The first block of samples seeds an exact batch solve (its size is
    ``init_size``, defaulting to q for online mode and to w for windowed
    mode); every later sample is absorbed by the streaming update of the
    chosen mode.

    Args:
        samples: iterable of (x, u, x_next) triples.
        dictionary: the feature :class:`Dictionary`.
        mode: "online" (growing history, forgetting factor rho) or
            "windowed" (last w samples only).
        rho: forgetting factor in (0, 1].
        w: window length, required for windowed mode, w >= q.
        init_size: override for the initialization block length.

    Returns:
        (model, history): the final :class:`SysIdModel` and a list of
        (sample index, A_hat copy) coefficient snapshots, one per step
        from the end of initialization on.
    """
    if mode not in ("online", "windowed"):
        raise ParameterError(f"mode must be 'online' or 'windowed', "
                             f"got {mode!r}")
    q = dictionary.q
    if mode == "windowed":
        if w is None:
            raise ParameterError("windowed mode requires a window length w")
        if w < q:
            raise ParameterError(
                f"window w={w} is below the dictionary size q={q}; the "
                f"fit would be underdetermined")
        block = w
    else:
        block = q
    if init_size is not None:
        if init_size < block:
            raise ParameterError(
                f"init_size={init_size} is below the minimum {block}")
        block = init_size

    history = []
    state = None
    head = []
    for idx, (x, u, x_next) in enumerate(samples):
        z = dictionary.lift(x, u)
        x_next = np.asarray(x_next, dtype=np.float64).ravel()
        pair = SnapshotPair(z, x_next, idx)
        if state is None:
            head.append(pair)
            if len(head) == block:
                if mode == "online":
                    state = OnlineDMD.init_exact(stack(head), rho)
                else:
                    state = WindowedDMD.init_window(head, rho)
                history.append((idx, state.A.copy()))
            continue
        if mode == "online":
            state.update(pair)
        else:
            state.slide(pair)
        history.append((idx, state.A.copy()))
    if state is None:
        raise InsufficientDataError(
            f"stream ended after {len(head)} samples, need {block} to "
            f"initialize")
    model = SysIdModel(A_hat=state.A.copy(), dictionary=dictionary)
    return model, history


def read_sample_csv(source):
    """Parse identification samples from CSV.

    The format is a header comment ``# n=<int> p=<int>`` followed by one
    row per sample holding n + p + n values: x, then u, then x_next.

    Returns:
        (n, p, samples) with samples a list of (x, u, x_next) arrays.
    """
    own = False
    if isinstance(source, (str, Path)):
        source = open(source, "r", encoding="utf-8")
        own = True
    try:
        lines = enumerate(source, start=1)
        n = p = None
        for lineno, line in lines:
            if line.strip():
                match = _SAMPLE_HEADER_RE.match(line.strip())
                if match is None:
                    raise ParseError("expected header '# n=<int> p=<int>'",
                                     line=lineno)
                n, p = int(match.group(1)), int(match.group(2))
                break
        if n is None:
            raise ParseError("empty sample stream: missing header")
        width = 2 * n + p
        samples = []
        for lineno, line in lines:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(",")
            if len(fields) != width:
                raise ParseError(
                    f"expected {width} values (x, u, x_next), got "
                    f"{len(fields)}", line=lineno)
            try:
                row = np.array([float(f) for f in fields])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if not np.all(np.isfinite(row)):
                raise DataError(
                    f"line {lineno}: NaN or infinity in sample data")
            samples.append((row[:n], row[n:n + p], row[n + p:]))
        return n, p, samples
    finally:
        if own:
            source.close()


def write_sample_csv(dest, samples, n, p):
    """Write (x, u, x_next) samples in the format of read_sample_csv."""
    own = False
    if isinstance(dest, (str, Path)):
        dest = open(dest, "w", encoding="utf-8")
        own = True
    try:
        dest.write(f"# n={n} p={p}\n")
        for x, u, x_next in samples:
            row = np.concatenate([np.ravel(x), np.ravel(u), np.ravel(x_next)])
            if row.shape[0] != 2 * n + p:
                raise ShapeError(
                    f"sample has {row.shape[0]} values, expected {2 * n + p}")
            dest.write(",".join(repr(float(v)) for v in row) + "\n")
    finally:
        if own:
            dest.close()
