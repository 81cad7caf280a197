"""Sliding-window least-squares fits updated by rank-2 corrections.

The state tracks the minimizer of the squared prediction error over
exactly the last w snapshot pairs.  Sliding the window one step both
retires the oldest pair and absorbs a new one, a rank-2 change of the
Gram matrix handled in one Woodbury step::

    U = [x_old, x_new]        V = [y_old, y_new]
    M = C^(-1) + U^T P U      (2 x 2, C = diag(-1, 1))
    A += (V - A U) M^(-1) (P U)^T
    P -= (P U) M^(-1) (P U)^T

for a total of 8 n^2 multiplies per slide with a square operator.  With a
forgetting factor rho < 1 the window weights decay geometrically inside
the window; the state then stores the weighted inverse Gram matrix
divided by rho, C^(-1) becomes diag(-rho**-w, 1), and P picks up a final
1/rho rescale, which reproduces the weighted batch solve of the window
exactly.

For any positive definite P the 2 x 2 system has det(M) < 0; a
nonnegative determinant means retiring the oldest pair would leave the
window rank deficient, and the slide refuses with the state untouched.
"""

import math
from collections import deque

import numpy as np
from numba import njit

from . import kernel
from .batch import weighted_batch_dmd
from .errors import (DataError, InsufficientDataError, ParameterError,
                     RankError, ShapeError)
from .online import UpdateReport, _owned_vector
from .snapshots import SnapshotPair, stack

__all__ = ["WindowedDMD", "slide_multiplies"]

_DENOM_FLOOR = 1e-300


@njit(cache=True)
def _windowed_step(a_mat, p_mat, x_old, y_old, x_new, y_new, c_old_inv,
                   inv_rho, pu, res):
    """Apply one window slide in place; returns (status, gamma, err_norm).

    Status 0 is success; 1 means the window would lose rank (det(M) not
    safely negative); 2 means a non-finite value was produced.  On nonzero
    status the state is untouched.
    """
    n = p_mat.shape[0]
    m = a_mat.shape[0]
    for i in range(n):
        s0 = 0.0
        s1 = 0.0
        for l in range(n):
            s0 += p_mat[i, l] * x_old[l]
            s1 += p_mat[i, l] * x_new[l]
        pu[i, 0] = s0
        pu[i, 1] = s1
    m00 = c_old_inv
    m01 = 0.0
    m11 = 1.0
    for i in range(n):
        m00 += x_old[i] * pu[i, 0]
        m01 += x_old[i] * pu[i, 1]
        m11 += x_new[i] * pu[i, 1]
    det = m00 * m11 - m01 * m01
    err2 = 0.0
    for i in range(m):
        s0 = 0.0
        s1 = 0.0
        for l in range(n):
            s0 += a_mat[i, l] * x_old[l]
            s1 += a_mat[i, l] * x_new[l]
        res[i, 0] = y_old[i] - s0
        r = y_new[i] - s1
        res[i, 1] = r
        err2 += r * r
    if not (math.isfinite(det) and math.isfinite(err2)):
        return 2, 0.0, 0.0
    if not det < -_DENOM_FLOOR:
        return 1, 0.0, 0.0
    g00 = m11 / det
    g01 = -m01 / det
    g11 = m00 / det
    for i in range(m):
        a0 = res[i, 0] * g00 + res[i, 1] * g01
        a1 = res[i, 0] * g01 + res[i, 1] * g11
        for l in range(n):
            a_mat[i, l] += a0 * pu[l, 0] + a1 * pu[l, 1]
    for i in range(n):
        w0 = pu[i, 0] * g00 + pu[i, 1] * g01
        w1 = pu[i, 0] * g01 + pu[i, 1] * g11
        for l in range(n):
            p_mat[i, l] -= w0 * pu[l, 0] + w1 * pu[l, 1]
    # Restore exact symmetry (the rank-2 form rounds the two triangles
    # differently) and fold in the weighted rescale; both multiplies are
    # exact no-ops for rho = 1.
    for i in range(n):
        for l in range(i + 1):
            s = (0.5 * (p_mat[i, l] + p_mat[l, i])) * inv_rho
            p_mat[i, l] = s
            p_mat[l, i] = s
    return 0, 1.0 / m11, math.sqrt(err2)


def slide_multiplies(n, n_out, weighted):
    """Multiplies attributed to one slide: the four O(n^2) products.

    P U and A U plus the two rank-2 corrections give 4 n^2 + 4 n n_out
    (8 n^2 when square); the weighted rescale of P adds n^2.  The 2 x 2
    algebra is lower order and not attributed.
    """
    count = 4 * n * n + 4 * n * n_out
    if weighted:
        count += n * n
    return count


class WindowedDMD:
    """Sliding-window estimator of a linear transition operator.

    Owns its arrays and the ring buffer of the current window; ``slide``
    mutates them in place.  One writer at a time.

    Attributes:
        A: current operator estimate for the window, shape (n_out, n).
        P: inverse Gram matrix of the window regressors (divided by rho
            when rho < 1), bitwise symmetric.
        w: window length in pairs.
        rho: forgetting factor applied inside the window.
        k: stream position, number of pairs seen including the window.
        flops: :class:`kernel.FlopCounter` accumulating slide costs.
    """

    def __init__(self, pairs, rho=1.0, counter=None):
        pairs = list(pairs)
        w = len(pairs)
        snaps = stack(pairs)
        if w < snaps.n:
            raise InsufficientDataError(
                f"window of {w} pairs cannot determine an operator on "
                f"dimension {snaps.n}")
        if not (0.0 < rho <= 1.0):
            raise ParameterError(f"rho must be in (0, 1], got {rho}")
        c_old = rho ** w
        if not c_old > 0.0:
            raise ParameterError(
                f"rho**w underflows for rho={rho}, w={w}; the oldest "
                f"window weight is numerically zero, use a larger rho or "
                f"a shorter window")
        sol = weighted_batch_dmd(snaps, rho, counter)
        self.A = np.ascontiguousarray(sol.A)
        self.P = np.ascontiguousarray(sol.P)
        self.rho = float(rho)
        self.w = w
        self.k = w
        self.flops = kernel.FlopCounter()
        self._ring = deque(
            (SnapshotPair(np.ascontiguousarray(snaps.X[:, j]),
                          np.ascontiguousarray(snaps.Y[:, j]),
                          pairs[j].index if hasattr(pairs[j], "index") else j)
             for j in range(w)),
            maxlen=w)
        self._c_old_inv = -1.0 / c_old
        self._inv_rho = 1.0 / self.rho
        self._pu = np.empty((self.n, 2))
        self._res = np.empty((self.n_out, 2))
        self._per_slide = slide_multiplies(self.n, self.n_out,
                                           self.rho != 1.0)

    @classmethod
    def init_window(cls, pairs, rho=1.0, counter=None):
        """Batch-solve an initial window of pairs; w is their count."""
        return cls(pairs, rho, counter)

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def n_out(self):
        return self.A.shape[0]

    @property
    def cond_p(self):
        """Condition estimate of P (equals that of the window Gram)."""
        return kernel.cond_estimate_spd(self.P)

    def window_contents(self):
        """The w pairs currently inside the window, oldest first."""
        return list(self._ring)

    def slide(self, x, y=None):
        """Retire the oldest pair, absorb (x, y), return an UpdateReport.

        Accepts ``slide(pair)`` or ``slide(x, y)`` like
        :meth:`OnlineDMD.update`.  The report's gamma is the gain
        1 / (1 + x^T P x) of the incoming pair.  On error the state and
        window are unchanged.
        """
        index = None
        if y is None:
            if hasattr(x, "index"):
                index = x.index
            x, y = x[0], x[1]
        x = _owned_vector(x, self.n, "x")
        y = _owned_vector(y, self.n_out, "y")
        oldest = self._ring[0]
        status, gamma, err = _windowed_step(
            self.A, self.P, oldest.x, oldest.y, x, y,
            self._c_old_inv, self._inv_rho, self._pu, self._res)
        if status == 1:
            raise RankError(
                "sliding the window would leave its snapshots rank "
                "deficient; the retiring pair is supporting the fit")
        if status == 2:
            raise DataError(
                "non-finite value produced while sliding the window; "
                "check the incoming pair and the state conditioning")
        if index is None:
            index = self._ring[-1].index + 1
        self._ring.append(SnapshotPair(x.copy(), y.copy(), index))
        self.k += 1
        self.flops.add(self._per_slide)
        return UpdateReport(gamma, err, self._per_slide)

    def __repr__(self):
        return (f"WindowedDMD(n={self.n}, n_out={self.n_out}, w={self.w}, "
                f"rho={self.rho}, k={self.k})")
