"""Batch least-squares fits of a linear transition operator.

Given snapshot pairs stacked as X and Y, the fitted operator minimizes
``||Y - A X||_F`` over all A.  With X of full row rank the minimizer is::

    A = Y X^T (X X^T)^(-1) = Q P

and both factors are kept: Q is the cross Gram matrix and P the inverse
Gram matrix of the regressors.  The streaming modules seed their state
from these fields, which is why solutions expose them instead of only A.

The solve goes through a Cholesky factorization of the Gram matrix, which
is the cheapest route and is protected by an explicit condition estimate
(limit ``kernel.CONDITION_LIMIT``).  The classic alternative of orthogonal
factorizations buys little here because the streaming updates require the
explicit inverse Gram matrix anyway.
"""

from dataclasses import dataclass

import numpy as np

from . import kernel
from .errors import InsufficientDataError, ParameterError
from .snapshots import SnapshotMatrices, stack

__all__ = ["BatchSolution", "batch_dmd", "weighted_batch_dmd",
           "mini_batch_dmd"]


@dataclass
class BatchSolution:
    """Result of one batch fit.

    Attributes:
        A: fitted operator, shape (n_out, n); always the exact product Q P.
        P: inverse Gram matrix of the (weighted) regressors, symmetric
            positive definite, shape (n, n).  For a forgetting factor
            rho < 1 this is the inverse of the weighted Gram matrix divided
            by rho, the normalization the online update recursion expects.
        Q: cross Gram matrix matching P, shape (n_out, n), so that
            ``A = Q @ P`` holds exactly.  For rho < 1 it is the weighted
            cross Gram matrix multiplied by rho.
        cond: condition estimate of the (weighted) Gram matrix.
    """

    A: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    cond: float


def weighted_batch_dmd(snaps, rho, counter=None):
    """Exponentially weighted batch fit.

    Pair j of k gets weight rho**(k - 1 - j) in the squared-error sum, so
    the newest pair always has weight 1.  rho = 1 reduces to the plain
    batch fit and takes a separate branch so the result is bitwise
    identical to :func:`batch_dmd`.

    Args:
        snaps: :class:`SnapshotMatrices` with k >= n columns.
        rho: forgetting factor in (0, 1].
        counter: optional :class:`kernel.FlopCounter`.

    Returns:
        :class:`BatchSolution`.
    """
    if not isinstance(snaps, SnapshotMatrices):
        snaps = stack(snaps)
    if not (0.0 < rho <= 1.0):
        raise ParameterError(f"rho must be in (0, 1], got {rho}")
    n, k = snaps.X.shape
    if k < n:
        raise InsufficientDataError(
            f"{k} pairs cannot determine an operator on dimension {n}; "
            f"the model will tend to overfit")
    if rho != 1.0:
        # Scale columns by sqrt of their weight; the weighted Gram
        # matrices are then plain products of the scaled snapshots.
        sigma = np.sqrt(rho)
        weights = sigma ** np.arange(k - 1, -1, -1, dtype=np.float64)
        x_mat = snaps.X * weights
        y_mat = snaps.Y * weights
    else:
        x_mat = snaps.X
        y_mat = snaps.Y
    gram = kernel.matmul(x_mat, x_mat.T, counter)
    cond = kernel.check_gram_conditioning(gram)
    q_mat = kernel.matmul(y_mat, x_mat.T, counter)
    p_mat = kernel.solve_spd(gram, np.eye(n), counter)
    p_mat = 0.5 * (p_mat + p_mat.T)
    if rho != 1.0:
        # Store P/rho and rho*Q: the streaming recursion tracks the
        # rho-divided inverse, and A = Q P stays exact.
        p_mat = p_mat / rho
        q_mat = rho * q_mat
    a_mat = kernel.matmul(q_mat, p_mat, counter)
    return BatchSolution(A=a_mat, P=p_mat, Q=q_mat, cond=cond)


def batch_dmd(snaps, counter=None):
    """Unweighted batch fit; see :func:`weighted_batch_dmd`."""
    return weighted_batch_dmd(snaps, 1.0, counter)


def mini_batch_dmd(window, w, rho=1.0, counter=None):
    """Batch fit over exactly the last w pairs.

    Args:
        window: sequence of :class:`SnapshotPair`, length exactly w.
        w: expected window length, w >= n.
        rho: optional forgetting factor applied within the window.
        counter: optional :class:`kernel.FlopCounter`.
    """
    window = list(window)
    if len(window) < w:
        raise InsufficientDataError(
            f"window holds {len(window)} pairs, need {w}")
    if len(window) > w:
        raise ParameterError(
            f"window holds {len(window)} pairs, expected exactly {w}")
    return weighted_batch_dmd(stack(window), rho, counter)
