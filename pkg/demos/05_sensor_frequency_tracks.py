"""Recover the tones hidden in a synthetic multichannel sensor array.

Thirteen channels mix two fixed tones (105 and 135 Hz), a handful of
slowly drifting tones, and a constant offset through a random orthogonal
matrix.  Streaming fits turn each new state into an eigenvalue snapshot,
and ranking the eigenvalues against the current state keeps the two
carriers in the top dominance ranks at every step.
"""

import numpy as np

from streamdmd import run_synthetic_sensors


def main():
    duration, fs, w = 1.5, 2048.0, 1000
    record = run_synthetic_sensors(duration_s=duration, fs=fs, w=w,
                                   emit_every=1)
    labels = sorted(set(record.labels()))
    print(f"13-channel array, {duration} s at fs={fs:.0f} Hz, "
          f"init on the first {w} pairs")
    for label in labels:
        steps = record.column("step", label=label, rank=1)
        top1 = record.column("freq_hz", label=label, rank=1)
        top2 = record.column("freq_hz", label=label, rank=2)
        lo = np.minimum(top1, top2)
        hi = np.maximum(top1, top2)
        worst = max(float(np.max(np.abs(lo - 105.0))),
                    float(np.max(np.abs(hi - 135.0))))
        print(f"\n{label}: {len(steps)} tracked steps")
        print(f"  worst deviation of the top-2 ranks from 105/135 Hz: "
              f"{worst:.2e} Hz")
        for pick in (0, len(steps) // 2, len(steps) - 1):
            print(f"  step {int(steps[pick]):5d}: "
                  f"{lo[pick]:9.4f} Hz, {hi[pick]:9.4f} Hz")


if __name__ == "__main__":
    main()
