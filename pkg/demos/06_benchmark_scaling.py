"""Time the update algorithms across state dimensions and compare costs.

The streaming updates do a constant number of O(n^2) products per step,
so their per-step wall time should rise roughly quadratically with n;
the fitted log-log slope makes that visible.  A second grid pits the
streaming fit against re-solving from scratch at every step, which is
the regime where the rank-1 update pays off by orders of magnitude.
"""

from streamdmd import BenchConfig, loglog_slope, run_benchmark


def main():
    cfg = BenchConfig(n_list=(64, 128, 256, 512), m=4000, w=1024,
                      task="every-step", algorithms=("online", "windowed"))
    result = run_benchmark(cfg)
    print(f"every-step streaming over m={cfg.m} pairs, w={cfg.w}")
    print(f"{'algorithm':>10s} {'n':>5s} {'per-step':>12s} {'multiplies':>14s}")
    for rec in result.records:
        print(f"{rec['algorithm']:>10s} {rec['n']:5d} "
              f"{rec['per_step_seconds'] * 1e6:10.2f} us "
              f"{rec['total_multiplies']:14d}")
    for name in cfg.algorithms:
        print(f"log-log slope for {name}: "
              f"{loglog_slope(result, name):.2f} (quadratic work => ~2)")

    cfg = BenchConfig(n_list=(64,), m=2000, w=256, task="every-step",
                      algorithms=("online", "mini-batch", "batch"))
    walls = {rec["algorithm"]: rec["wall_seconds"]
             for rec in run_benchmark(cfg).records}
    print(f"\nkeeping the fit current at every step, n=64, m={cfg.m}:")
    for name, wall in sorted(walls.items(), key=lambda kv: kv[1]):
        print(f"  {name:>10s}: {wall:8.3f} s")
    print(f"  streaming speedup over per-step batch solves: "
          f"{walls['batch'] / walls['online']:.0f}x")


if __name__ == "__main__":
    main()
