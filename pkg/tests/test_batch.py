"""Batch fits against least-squares oracles and hand examples."""

import numpy as np
import pytest

from streamdmd import kernel
from streamdmd.batch import batch_dmd, mini_batch_dmd, weighted_batch_dmd
from streamdmd.errors import (InsufficientDataError, ParameterError,
                              RankError)
from streamdmd.online import OnlineDMD
from streamdmd.snapshots import SnapshotMatrices, SnapshotPair, stack


def lstsq_oracle(x_mat, y_mat):
    """Independent pseudoinverse solve of min ||Y - A X||_F."""
    return np.linalg.lstsq(x_mat.T, y_mat.T, rcond=None)[0].T


def random_snaps(n, k, seed, n_out=None):
    rng = np.random.default_rng(seed)
    return SnapshotMatrices(rng.standard_normal((n, k)),
                            rng.standard_normal((n_out or n, k)))


def test_scalar_hand_example():
    sol = batch_dmd(SnapshotMatrices([[1.0, 1.0]], [[2.0, 2.0]]))
    assert sol.A[0, 0] == pytest.approx(2.0)
    assert sol.P[0, 0] == pytest.approx(0.5)
    assert sol.Q[0, 0] == pytest.approx(4.0)
    assert sol.cond == pytest.approx(1.0)


def test_single_pair_any_rho():
    for rho in (1.0, 0.5, 0.9):
        sol = weighted_batch_dmd(
            SnapshotMatrices([[2.0]], [[6.0]]), rho)
        assert sol.A[0, 0] == pytest.approx(3.0)


def test_matches_lstsq_oracle():
    snaps = random_snaps(5, 40, seed=1)
    sol = batch_dmd(snaps)
    assert np.allclose(sol.A, lstsq_oracle(snaps.X, snaps.Y),
                       rtol=1e-10, atol=1e-12)


def test_recovers_generating_operator():
    rng = np.random.default_rng(2)
    a_true = rng.standard_normal((6, 6))
    x_mat = rng.standard_normal((6, 50))
    sol = batch_dmd(SnapshotMatrices(x_mat, a_true @ x_mat))
    assert np.linalg.norm(sol.A - a_true) <= 1e-10 * np.linalg.norm(a_true)


def test_factor_identities():
    snaps = random_snaps(4, 30, seed=3)
    sol = batch_dmd(snaps)
    # A = Q P exactly by construction
    assert np.linalg.norm(sol.A - sol.Q @ sol.P) <= \
        1e-12 * np.linalg.norm(sol.A)
    # P is the exact inverse Gram matrix
    gram = snaps.X @ snaps.X.T
    assert np.linalg.norm(sol.P @ gram - np.eye(4)) <= 1e-10
    # P symmetric
    assert np.array_equal(sol.P, sol.P.T)
    assert sol.cond >= 1.0


def test_local_optimality_probe():
    snaps = random_snaps(3, 25, seed=4)
    sol = batch_dmd(snaps)

    def cost(a_mat):
        return np.linalg.norm(snaps.Y - a_mat @ snaps.X) ** 2

    base = cost(sol.A)
    rng = np.random.default_rng(5)
    for _ in range(100):
        delta = 1e-3 * rng.standard_normal(sol.A.shape)
        assert cost(sol.A + delta) >= base


def test_underdetermined_and_rank_errors():
    with pytest.raises(InsufficientDataError):
        batch_dmd(random_snaps(5, 4, seed=6))
    # duplicated rows make the Gram matrix singular
    x_mat = np.ones((3, 10)) * np.arange(1.0, 11.0)
    with pytest.raises(RankError):
        batch_dmd(SnapshotMatrices(x_mat, x_mat))


def test_rho_validation():
    snaps = random_snaps(2, 10, seed=7)
    for rho in (0.0, -0.5, 1.5):
        with pytest.raises(ParameterError):
            weighted_batch_dmd(snaps, rho)


def test_weighted_rho_one_is_bitwise_plain():
    snaps = random_snaps(4, 20, seed=8)
    plain = batch_dmd(snaps)
    weighted = weighted_batch_dmd(snaps, 1.0)
    assert np.array_equal(plain.A, weighted.A)
    assert np.array_equal(plain.P, weighted.P)
    assert np.array_equal(plain.Q, weighted.Q)


def test_weighted_matches_explicit_scaling_oracle():
    snaps = random_snaps(4, 30, seed=9)
    rho = 0.85
    sol = weighted_batch_dmd(snaps, rho)
    k = snaps.k
    weights = np.sqrt(rho) ** np.arange(k - 1, -1, -1)
    xs = snaps.X * weights
    ys = snaps.Y * weights
    a_ref = lstsq_oracle(xs, ys)
    assert np.allclose(sol.A, a_ref, rtol=1e-10, atol=1e-13)
    # stored factors: P is the scaled inverse Gram over rho, Q matches
    p_ref = np.linalg.inv(xs @ xs.T) / rho
    assert np.allclose(sol.P, p_ref, rtol=1e-9, atol=1e-13)
    assert np.allclose(sol.Q, rho * (ys @ xs.T), rtol=1e-12)
    assert np.linalg.norm(sol.A - sol.Q @ sol.P) <= \
        1e-12 * np.linalg.norm(sol.A)


def test_weighted_inverse_consistency():
    snaps = random_snaps(3, 40, seed=10)
    rho = 0.9
    sol = weighted_batch_dmd(snaps, rho)
    k = snaps.k
    gram = sum(rho ** (k - 1 - j) * np.outer(snaps.X[:, j], snaps.X[:, j])
               for j in range(k))
    assert np.linalg.norm(sol.P @ gram * rho - np.eye(3)) <= 1e-8


def test_append_column_equals_online_update():
    snaps = random_snaps(4, 25, seed=11)
    state = OnlineDMD.init_exact(snaps)
    rng = np.random.default_rng(12)
    x_new = rng.standard_normal(4)
    y_new = rng.standard_normal(4)
    state.update(x_new, y_new)
    grown = SnapshotMatrices(np.column_stack([snaps.X, x_new]),
                             np.column_stack([snaps.Y, y_new]))
    sol = batch_dmd(grown)
    assert np.linalg.norm(state.A - sol.A) <= 1e-10 * np.linalg.norm(sol.A)
    assert np.linalg.norm(state.P - sol.P) <= 1e-10 * np.linalg.norm(sol.P)


def test_mini_batch_window_length():
    pairs = [SnapshotPair(np.array([float(j + 1), 1.0]),
                          np.array([1.0, float(j)]), j) for j in range(6)]
    sol = mini_batch_dmd(pairs, 6)
    ref = batch_dmd(stack(pairs))
    assert np.array_equal(sol.A, ref.A)
    with pytest.raises(InsufficientDataError):
        mini_batch_dmd(pairs[:4], 6)
    with pytest.raises(ParameterError):
        mini_batch_dmd(pairs, 4)


def test_batch_accepts_pair_sequence():
    pairs = [SnapshotPair(np.array([1.0]), np.array([2.0]), 0),
             SnapshotPair(np.array([2.0]), np.array([4.0]), 1)]
    sol = batch_dmd(pairs)
    assert sol.A[0, 0] == pytest.approx(2.0)


def test_counter_attribution():
    snaps = random_snaps(3, 12, seed=13)
    counter = kernel.FlopCounter()
    batch_dmd(snaps, counter)
    gram = 3 * 12 * 3
    cross = 3 * 12 * 3
    solve = 3 ** 3 // 6 + 3 * 3 * 3
    product = 3 * 3 * 3
    assert counter.multiplies == gram + cross + solve + product
