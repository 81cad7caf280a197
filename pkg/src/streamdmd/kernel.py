"""Dense linear algebra primitives with multiply accounting.

Everything here wraps numpy/scipy routines; the value added is a uniform
error policy (see :mod:`streamdmd.errors`) and an explicit count of scalar
multiplications so algorithm costs can be asserted as integers in tests.

Counting convention
-------------------
A :class:`FlopCounter` records multiplications attributed to matrix-level
products: a matmul of shapes (r, k) x (k, c) counts exactly ``r * k * c``,
a matvec ``r * k``, an outer product ``r * c``, a dot product ``k``.  For
``solve_spd`` the attribution is the textbook operation count written out
in its docstring.  Lower-order scalar bookkeeping (scaling a residual by a
gain, norms, divisions) and purely diagnostic work (eigenvalues, condition
estimates) are not attributed.  Additions are never counted.

Shape checks are performed on every call.  Finiteness of values is the
caller's contract and is enforced where data enters the package (file
parsing, state initialization, per-step updates), not on every product.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InsufficientDataError, RankError, ShapeError

# Gram matrices whose estimated condition number exceeds this are rejected.
CONDITION_LIMIT = 1e12

# Relative asymmetry tolerated by solve_spd before it refuses to factorize.
SYMMETRY_RTOL = 1e-10


class FlopCounter:
    """Accumulates a count of scalar floating-point multiplications.

    The count is a plain integer, monotonically nondecreasing, attributed
    per the module convention above.  Pass an instance to the primitives in
    this module (or to the batch/online/windowed drivers) to meter a region
    of work.
    """

    __slots__ = ("multiplies",)

    def __init__(self):
        self.multiplies = 0

    def add(self, count):
        self.multiplies += int(count)

    def reset(self):
        self.multiplies = 0

    def __repr__(self):
        return f"FlopCounter(multiplies={self.multiplies})"


@dataclass
class EigDecomp:
    """Eigenvalues and right eigenvectors of a square real matrix.

    ``converged`` is False when the underlying QR iteration failed; the
    arrays then hold NaN and no exception is raised, so streaming callers
    can skip the step instead of dying.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    converged: bool = True


def _require_matrix(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be a 2-d array, got ndim={a.ndim}")
    return a


def _require_vector(x, name):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"{name} must be a 1-d array, got ndim={x.ndim}")
    return x


def matmul(a, b, counter=None):
    """Matrix product ``a @ b`` counting rows * inner * cols multiplies."""
    a = _require_matrix(a, "a")
    b = _require_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"matmul inner dimensions differ: {a.shape} x {b.shape}")
    if counter is not None:
        counter.add(a.shape[0] * a.shape[1] * b.shape[1])
    return a @ b


def matvec(a, x, counter=None):
    """Matrix-vector product ``a @ x`` counting rows * cols multiplies."""
    a = _require_matrix(a, "a")
    x = _require_vector(x, "x")
    if a.shape[1] != x.shape[0]:
        raise ShapeError(f"matvec dimensions differ: {a.shape} x {x.shape}")
    if counter is not None:
        counter.add(a.shape[0] * a.shape[1])
    return a @ x


def dot(x, y, counter=None):
    """Inner product counting len(x) multiplies."""
    x = _require_vector(x, "x")
    y = _require_vector(y, "y")
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"dot lengths differ: {x.shape[0]} vs {y.shape[0]}")
    if counter is not None:
        counter.add(x.shape[0])
    return float(x @ y)


def outer(x, y, counter=None):
    """Outer product ``x yᵀ`` counting len(x) * len(y) multiplies."""
    x = _require_vector(x, "x")
    y = _require_vector(y, "y")
    if counter is not None:
        counter.add(x.shape[0] * y.shape[0])
    return np.outer(x, y)


def solve_spd(s, b, counter=None):
    """Solve ``s z = b`` for symmetric positive definite ``s``.

    Uses a Cholesky factorization.  Refuses visibly asymmetric input
    (relative Frobenius asymmetry above ``SYMMETRY_RTOL``) and raises
    :class:`RankError` when the factorization breaks down, which is how a
    singular or indefinite Gram matrix surfaces.

    Attributed multiplies: ``n**3 // 6`` for the factorization plus
    ``n * n * r`` for the two triangular solves against an (n, r) right
    hand side.
    """
    s = _require_matrix(s, "s")
    b = np.asarray(b, dtype=np.float64)
    n = s.shape[0]
    if s.shape[1] != n:
        raise ShapeError(f"s must be square, got {s.shape}")
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    if b.ndim != 2 or b.shape[0] != n:
        raise ShapeError(f"right hand side shape {b.shape} does not match {s.shape}")
    asym = np.linalg.norm(s - s.T)
    scale = np.linalg.norm(s)
    if asym > SYMMETRY_RTOL * max(scale, np.finfo(np.float64).tiny):
        raise ShapeError(
            f"matrix is not symmetric: asymmetry {asym:.3e} vs norm {scale:.3e}")
    try:
        factor = scipy.linalg.cho_factor(s, lower=True, check_finite=False)
        z = scipy.linalg.cho_solve(factor, b, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise RankError(f"Cholesky factorization failed: {exc}") from exc
    if counter is not None:
        counter.add(n ** 3 // 6 + n * n * b.shape[1])
    return z[:, 0] if vec else z


def cond_estimate_spd(s):
    """Ratio of extreme eigenvalues of a symmetric matrix.

    Returns ``inf`` when the smallest eigenvalue is not positive.  Costs an
    O(n^3) symmetric eigensolve; diagnostic, so nothing is attributed to
    any counter.
    """
    s = _require_matrix(s, "s")
    if s.shape[0] != s.shape[1]:
        raise ShapeError(f"s must be square, got {s.shape}")
    w = np.linalg.eigvalsh(s)
    lo, hi = w[0], w[-1]
    if lo <= 0.0:
        return np.inf
    return float(hi / lo)


def check_gram_conditioning(g, what="snapshot Gram matrix"):
    """Raise :class:`RankError` unless ``g`` is safely positive definite."""
    cond = cond_estimate_spd(g)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise RankError(
            f"{what} has condition estimate {cond:.3e}, "
            f"limit is {CONDITION_LIMIT:.1e}; the regressors do not have "
            f"usable full row rank")
    return cond


def pinv_full_row_rank(x, counter=None):
    """Right pseudoinverse ``xᵀ (x xᵀ)⁻¹`` of a full-row-rank (n, k) matrix.

    Requires k >= n; rejects Gram matrices beyond ``CONDITION_LIMIT``.
    """
    x = _require_matrix(x, "x")
    n, k = x.shape
    if k < n:
        raise InsufficientDataError(
            f"need at least {n} columns for a full-row-rank pseudoinverse, "
            f"got {k}")
    g = matmul(x, x.T, counter)
    check_gram_conditioning(g, "x xᵀ")
    g_inv = solve_spd(g, np.eye(n), counter)
    return matmul(x.T, g_inv, counter)


def eig(a):
    """Eigendecomposition of a square real matrix.

    Convergence failure is reported through ``EigDecomp.converged`` rather
    than an exception.  Diagnostic; not attributed to counters.
    """
    a = _require_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"a must be square, got {a.shape}")
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError:
        n = a.shape[0]
        bad = np.full(n, np.nan, dtype=np.complex128)
        return EigDecomp(bad, np.full((n, n), np.nan, dtype=np.complex128),
                         converged=False)
    # all-real spectra come back as float arrays; keep the dtype uniform
    return EigDecomp(values.astype(np.complex128, copy=False),
                     vectors.astype(np.complex128, copy=False),
                     converged=True)
