"""Stream random snapshot pairs and watch the rank-1 updates stay exact.

After every update the incremental operator is compared against a fresh
least-squares solve of the entire history so far.  The gap never leaves
machine precision, while each update costs exactly 4 n^2 multiplies
instead of a growing batch solve.  A second pass starts from the
regularized state alpha * I with no initialization block at all and
converges onto the same fit as the startup bias 1/alpha washes out.
"""

import numpy as np

from streamdmd import OnlineDMD, SnapshotMatrices


def batch_fit(x_mat, y_mat):
    return np.linalg.lstsq(x_mat.T, y_mat.T, rcond=None)[0].T


def main():
    rng = np.random.default_rng(7)
    n, m, k0 = 8, 400, 16
    x_mat = rng.standard_normal((n, m))
    y_mat = rng.standard_normal((n, m))

    state = OnlineDMD.init_exact(
        SnapshotMatrices(x_mat[:, :k0], y_mat[:, :k0]))
    worst = 0.0
    for j in range(k0, m):
        report = state.update(x_mat[:, j], y_mat[:, j])
        ref = batch_fit(x_mat[:, :j + 1], y_mat[:, :j + 1])
        gap = np.linalg.norm(state.A - ref) / np.linalg.norm(ref)
        worst = max(worst, gap)
    print(f"streamed {m - k0} updates at n={n}")
    print(f"  worst relative gap to the batch solve: {worst:.3e}")
    print(f"  multiplies per update: {report.multiplies} (4 n^2 = {4 * n * n})")
    print(f"  last gain gamma: {report.gamma:.4f}")

    print("\nregularized start (no initialization block), alpha = 1e8:")
    reg = OnlineDMD.init_regularized(n, 1e8)
    checkpoints = {25, 100, m}
    for j in range(m):
        reg.update(x_mat[:, j], y_mat[:, j])
        if j + 1 in checkpoints:
            ref = batch_fit(x_mat[:, :j + 1], y_mat[:, :j + 1])
            gap = np.linalg.norm(reg.A - ref) / np.linalg.norm(ref)
            print(f"  after {j + 1:3d} updates: relative gap {gap:.3e}")


if __name__ == "__main__":
    main()
