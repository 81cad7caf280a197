"""Streaming least-squares operator updates, one snapshot pair at a time.

The state tracks the minimizer A of the (optionally exponentially
weighted) squared prediction error over all pairs seen so far, together
with P, the inverse Gram matrix of the regressors.  Absorbing a pair
(x, y) is a rank-1 change of the Gram matrix, so P can be corrected with
the Sherman-Morrison identity instead of being refactorized::

    gamma = 1 / (1 + x^T P x)
    A    += gamma * (y - A x) (P x)^T
    P    -= gamma * (P x) (P x)^T          # then P /= rho if rho < 1

Each update costs two matrix-vector products and two outer products,
4 n^2 multiplies for a square operator, and reproduces the batch solve to
machine precision.  The fast path is a compiled per-step kernel; the class
around it adds validation, accounting, and initialization choices.

P is kept bitwise symmetric without any explicit symmetrization: the
rank-1 subtraction is applied as s s^T with s = sqrt(gamma) * P x, and
s[i] * s[l] rounds identically to s[l] * s[i].
"""

import math
from typing import NamedTuple

import numpy as np
from numba import njit

from . import kernel
from .batch import weighted_batch_dmd
from .errors import DataError, ParameterError, RankError, ShapeError
from .snapshots import SnapshotMatrices, stack

__all__ = ["OnlineDMD", "UpdateReport", "half_life_to_rho"]

_DENOM_FLOOR = 1e-300


class UpdateReport(NamedTuple):
    """Per-step diagnostics returned by update/slide calls.

    Attributes:
        gamma: gain 1 / (1 + x^T P x) of the absorbed pair, in (0, 1].
        prediction_error_norm: ||y - A_before x||_2, the innovation the
            update corrected.
        multiplies: scalar multiplications attributed to the step.
    """

    gamma: float
    prediction_error_norm: float
    multiplies: int


def half_life_to_rho(half_life):
    """Forgetting factor whose weights halve every ``half_life`` pairs.

    Solves rho**half_life = 1/2, e.g. half_life=10 gives 0.933033 and
    leaves snapshots ten steps old with half the influence of the newest.
    """
    if not half_life > 0:
        raise ParameterError(f"half_life must be positive, got {half_life}")
    return 2.0 ** (-1.0 / float(half_life))


@njit(cache=True)
def _online_step(a_mat, p_mat, x, y, inv_rho, px, res, sq):
    """Apply one rank-1 update in place; returns (status, gamma, err_norm).

    Status 0 is success; 1 means the gain denominator degenerated; 2 means
    a non-finite value was produced by the inputs.  On nonzero status the
    state is untouched.
    """
    n = p_mat.shape[0]
    m = a_mat.shape[0]
    for i in range(n):
        acc = 0.0
        for l in range(n):
            acc += p_mat[i, l] * x[l]
        px[i] = acc
    xpx = 0.0
    for i in range(n):
        xpx += x[i] * px[i]
    denom = 1.0 + xpx
    err2 = 0.0
    for i in range(m):
        acc = 0.0
        for l in range(n):
            acc += a_mat[i, l] * x[l]
        r = y[i] - acc
        res[i] = r
        err2 += r * r
    if not (math.isfinite(denom) and math.isfinite(err2)):
        return 2, 0.0, 0.0
    if denom < _DENOM_FLOOR:
        return 1, 0.0, 0.0
    gamma = 1.0 / denom
    root = math.sqrt(gamma)
    for i in range(m):
        gr = gamma * res[i]
        for l in range(n):
            a_mat[i, l] += gr * px[l]
    for i in range(n):
        sq[i] = root * px[i]
    for i in range(n):
        si = sq[i]
        for l in range(n):
            p_mat[i, l] -= si * sq[l]
    if inv_rho != 1.0:
        for i in range(n):
            for l in range(n):
                p_mat[i, l] *= inv_rho
    return 0, gamma, math.sqrt(err2)


def update_multiplies(n, n_out, weighted):
    """Multiplies attributed to one update: the four O(n^2) products.

    Two matrix-vector products (P x and A x) and two outer products (the
    corrections to A and P) give 2 n^2 + 2 n n_out; rescaling P on the
    weighted path adds n^2.  Gain and norm bookkeeping is lower order and
    not attributed, per the kernel convention.
    """
    count = 2 * n * n + 2 * n * n_out
    if weighted:
        count += n * n
    return count


def _owned_vector(v, length, name):
    if not (isinstance(v, np.ndarray) and v.dtype == np.float64
            and v.ndim == 1 and v.flags.c_contiguous):
        v = np.ascontiguousarray(np.asarray(v, dtype=np.float64))
        if v.ndim != 1:
            raise ShapeError(f"{name} must be a vector, got ndim={v.ndim}")
    if v.shape[0] != length:
        raise ShapeError(
            f"{name} has dimension {v.shape[0]}, state expects {length}")
    return v


class OnlineDMD:
    """Streaming estimator of a linear transition operator.

    The instance owns its arrays and mutates them in place on every
    ``update``; copy ``A`` or ``P`` to keep a point-in-time value.  One
    writer at a time.

    Attributes:
        A: current operator estimate, shape (n_out, n).
        P: inverse Gram matrix of the weighted regressors divided by rho
            (plain inverse Gram matrix when rho = 1), bitwise symmetric.
        rho: forgetting factor in (0, 1]; weights decay by rho per step.
        k: number of pairs absorbed, including any initialization batch.
        initialized_by: "exact" or "regularized".
        flops: :class:`kernel.FlopCounter` accumulating update costs.
    """

    def __init__(self, a_mat, p_mat, rho, k, initialized_by):
        if not (0.0 < rho <= 1.0):
            raise ParameterError(f"rho must be in (0, 1], got {rho}")
        self.A = np.ascontiguousarray(a_mat, dtype=np.float64)
        self.P = np.ascontiguousarray(p_mat, dtype=np.float64)
        if self.P.shape[0] != self.P.shape[1]:
            raise ShapeError(f"P must be square, got {self.P.shape}")
        if self.A.shape[1] != self.P.shape[0]:
            raise ShapeError(
                f"A and P disagree on dimension: {self.A.shape} vs "
                f"{self.P.shape}")
        self.rho = float(rho)
        self.k = int(k)
        self.initialized_by = initialized_by
        self.flops = kernel.FlopCounter()
        self._inv_rho = 1.0 / self.rho
        n, n_out = self.n, self.n_out
        self._px = np.empty(n)
        self._res = np.empty(n_out)
        self._sq = np.empty(n)
        self._per_update = update_multiplies(n, n_out, self.rho != 1.0)

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def n_out(self):
        return self.A.shape[0]

    @property
    def cond_p(self):
        """Condition estimate of P (equals that of the Gram matrix)."""
        return kernel.cond_estimate_spd(self.P)

    @classmethod
    def init_exact(cls, snaps, rho=1.0, counter=None):
        """Seed the state with a batch solve of an initial pair block.

        Needs at least n pairs; the resulting state is bitwise identical
        to the batch solution fields, so a subsequent stream of updates
        continues the exact least-squares recursion.
        """
        if not isinstance(snaps, SnapshotMatrices):
            snaps = stack(snaps)
        sol = weighted_batch_dmd(snaps, rho, counter)
        return cls(sol.A, sol.P, rho, snaps.k, "exact")

    @classmethod
    def init_regularized(cls, n, alpha, rho=1.0, n_out=None):
        """Start from zero data: A = 0 and P = alpha I.

        Equivalent to ridge-regularizing the Gram matrix with weight
        1/alpha; as alpha grows the trajectory of estimates converges to
        the exact recursion, so alpha trades startup bias against
        conditioning.  Use when no initial batch is available.
        """
        if n < 1:
            raise ParameterError(f"n must be >= 1, got {n}")
        if not (alpha > 0.0 and np.isfinite(alpha)):
            raise ParameterError(f"alpha must be positive, got {alpha}")
        if n_out is None:
            n_out = n
        a_mat = np.zeros((n_out, n))
        p_mat = alpha * np.eye(n)
        return cls(a_mat, p_mat, rho, 0, "regularized")

    def update(self, x, y=None):
        """Absorb one snapshot pair and return an :class:`UpdateReport`.

        Accepts either ``update(pair)`` with a :class:`SnapshotPair` (or
        any (x, y) 2-tuple-like) or ``update(x, y)`` with two vectors.  On
        error the state is unchanged.
        """
        if y is None:
            x, y = x[0], x[1]
        x = _owned_vector(x, self.n, "x")
        y = _owned_vector(y, self.n_out, "y")
        status, gamma, err = _online_step(
            self.A, self.P, x, y, self._inv_rho,
            self._px, self._res, self._sq)
        if status == 1:
            raise RankError(
                "update gain denominator 1 + x^T P x fell below "
                f"{_DENOM_FLOOR:g}; the state is no longer positive "
                "definite")
        if status == 2:
            raise DataError(
                "non-finite value produced while absorbing the pair; "
                "check the snapshot values and the state conditioning")
        self.k += 1
        self.flops.add(self._per_update)
        return UpdateReport(gamma, err, self._per_update)

    def predict(self, x):
        """One-step prediction A x."""
        x = _owned_vector(x, self.n, "x")
        return self.A @ x

    def __repr__(self):
        return (f"OnlineDMD(n={self.n}, n_out={self.n_out}, rho={self.rho}, "
                f"k={self.k}, init={self.initialized_by!r})")
