"""Reproducible experiment drivers: scaling benchmark, a time-varying
oscillator, and a synthetic multichannel sensor array.

Everything here is seeded and deterministic apart from wall-clock fields.
The benchmark times model updates only (no spectra) and reports per-step
cost in both seconds and attributed multiplies, with initialization cost
kept in separate fields so steady-state scaling can be read directly.
Cells run sequentially on one thread; nothing is parallelized, which
keeps timings free of contention.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .batch import mini_batch_dmd, weighted_batch_dmd
from .errors import ParameterError
from .online import OnlineDMD
from .snapshots import SnapshotMatrices, SnapshotPair, pair_trajectory, stack
from .spectral import TrackRecord, spectrum_of
from .windowed import WindowedDMD

__all__ = ["BenchConfig", "BenchResult", "run_benchmark", "loglog_slope",
           "LtvConfig", "ltv_omega", "integrate_ltv", "run_ltv",
           "generate_sensor_states", "run_synthetic_sensors"]

_ALGORITHMS = ("online", "windowed", "mini-batch", "batch", "standard")

_warmed = False


def _warm_up():
    """Compile the streaming kernels once so timings exclude compilation."""
    global _warmed
    if _warmed:
        return
    pairs = [SnapshotPair(np.array([1.0, 0.0]), np.array([0.5, 0.1]), 0),
             SnapshotPair(np.array([0.0, 1.0]), np.array([-0.1, 0.5]), 1),
             SnapshotPair(np.array([1.0, 1.0]), np.array([0.4, 0.6]), 2)]
    state = OnlineDMD.init_exact(stack(pairs[:2]))
    state.update(pairs[2])
    win = WindowedDMD.init_window(pairs[:2])
    win.slide(pairs[2])
    _warmed = True


# ---------------------------------------------------------------------------
# Scaling benchmark
# ---------------------------------------------------------------------------

@dataclass
class BenchConfig:
    """Grid definition for :func:`run_benchmark`.

    Attributes:
        n_list: state dimensions to sweep (each must satisfy n <= w).
        m: total snapshot pairs per cell.
        w: initialization block and window length.
        task: "every-step" re-solves the batch algorithms at each step;
            "final-only" solves them once at the end.  The streaming
            algorithms always run step by step.
        algorithms: subset of online, windowed, mini-batch, batch,
            standard ("standard" is a single batch solve of all m pairs).
        rho: forgetting factor used by the online cells.
        seed: base seed; each cell derives its own stream from (seed, n).
        repeats: timed repetitions per cell; the minimum wall time wins.
        batch_cap: largest n for which every-step batch cells run (their
            cost grows cubically in practice and swamps the grid).
        noise: regressand noise level in the generated pairs.
    """

    n_list: tuple = (2, 4, 8, 16, 32, 64, 128, 256, 512, 1024)
    m: int = 10_000
    w: int = 2048
    task: str = "every-step"
    algorithms: tuple = ("online", "windowed", "mini-batch", "batch",
                         "standard")
    rho: float = 1.0
    seed: int = 0
    repeats: int = 1
    batch_cap: int = 256
    noise: float = 0.01

    def __post_init__(self):
        if self.task not in ("every-step", "final-only"):
            raise ParameterError(
                f"task must be 'every-step' or 'final-only', got "
                f"{self.task!r}")
        for name in self.algorithms:
            if name not in _ALGORITHMS:
                raise ParameterError(f"unknown algorithm {name!r}")
        if not self.m > self.w:
            raise ParameterError(
                f"need m > w, got m={self.m}, w={self.w}")
        for n in self.n_list:
            if n > self.w:
                raise ParameterError(
                    f"n={n} exceeds the window w={self.w}; the "
                    f"initialization block could not reach full rank")
        if self.repeats < 1:
            raise ParameterError("repeats must be >= 1")


@dataclass
class BenchResult:
    """Per-cell benchmark records, one dict per (algorithm, n)."""

    records: list = field(default_factory=list)

    def for_algorithm(self, name):
        return [r for r in self.records if r["algorithm"] == name]

    def write_jsonl(self, dest):
        """One JSON object per line, fields in construction order."""
        import json
        from pathlib import Path
        own = False
        if isinstance(dest, (str, Path)):
            dest = open(dest, "w", encoding="utf-8")
            own = True
        try:
            for record in self.records:
                dest.write(json.dumps(record) + "\n")
        finally:
            if own:
                dest.close()


def _bench_pairs(n, m, noise, seed):
    """Seeded Gaussian regression pairs y = A_true x + noise.

    The matrices come back column-major so that the timing loops hand the
    streaming updates contiguous column views instead of paying for a
    copy of every snapshot, which would swamp the small-n cells.
    """
    rng = np.random.default_rng([seed, n])
    a_true = rng.standard_normal((n, n)) / np.sqrt(n)
    x_mat = rng.standard_normal((n, m))
    y_mat = a_true @ x_mat
    if noise > 0.0:
        y_mat = y_mat + noise * rng.standard_normal((n, m))
    return np.asfortranarray(x_mat), np.asfortranarray(y_mat)


def _record(cfg, name, n, steps, wall, total_mult, init_wall, init_mult,
            stored):
    return {
        "algorithm": name,
        "n": int(n),
        "m": int(cfg.m),
        "w": int(cfg.w),
        "task": cfg.task,
        "rho": float(cfg.rho if name == "online" else 1.0),
        "seed": int(cfg.seed),
        "steps": int(steps),
        "wall_seconds": float(wall),
        "per_step_seconds": float(wall / steps),
        "total_multiplies": int(total_mult),
        "per_step_multiplies": (total_mult // steps
                                if total_mult % steps == 0
                                else total_mult / steps),
        "init_seconds": float(init_wall),
        "init_multiplies": int(init_mult),
        "stored_pairs": int(stored),
    }


def _time_online(cfg, n, x_mat, y_mat):
    init_counter = kernel.FlopCounter()
    t0 = time.perf_counter()
    state = OnlineDMD.init_exact(
        SnapshotMatrices(x_mat[:, :cfg.w], y_mat[:, :cfg.w]), cfg.rho,
        init_counter)
    init_wall = time.perf_counter() - t0
    steps = cfg.m - cfg.w
    t0 = time.perf_counter()
    for j in range(cfg.w, cfg.m):
        state.update(x_mat[:, j], y_mat[:, j])
    wall = time.perf_counter() - t0
    return _record(cfg, "online", n, steps, wall, state.flops.multiplies,
                   init_wall, init_counter.multiplies, 0)


def _time_windowed(cfg, n, x_mat, y_mat):
    init_counter = kernel.FlopCounter()
    pairs = [SnapshotPair(x_mat[:, j], y_mat[:, j], j)
             for j in range(cfg.w)]
    t0 = time.perf_counter()
    state = WindowedDMD.init_window(pairs, 1.0, init_counter)
    init_wall = time.perf_counter() - t0
    steps = cfg.m - cfg.w
    t0 = time.perf_counter()
    for j in range(cfg.w, cfg.m):
        state.slide(x_mat[:, j], y_mat[:, j])
    wall = time.perf_counter() - t0
    return _record(cfg, "windowed", n, steps, wall, state.flops.multiplies,
                   init_wall, init_counter.multiplies, cfg.w)


def _time_mini_batch(cfg, n, x_mat, y_mat):
    counter = kernel.FlopCounter()
    if cfg.task == "every-step":
        steps = cfg.m - cfg.w
        t0 = time.perf_counter()
        for j in range(cfg.w, cfg.m):
            weighted_batch_dmd(
                SnapshotMatrices(x_mat[:, j - cfg.w + 1:j + 1],
                                 y_mat[:, j - cfg.w + 1:j + 1]),
                1.0, counter)
        wall = time.perf_counter() - t0
    else:
        steps = 1
        t0 = time.perf_counter()
        weighted_batch_dmd(
            SnapshotMatrices(x_mat[:, cfg.m - cfg.w:], y_mat[:, cfg.m - cfg.w:]),
            1.0, counter)
        wall = time.perf_counter() - t0
    return _record(cfg, "mini-batch", n, steps, wall, counter.multiplies,
                   0.0, 0, cfg.w)


def _time_batch(cfg, n, x_mat, y_mat, name="batch"):
    counter = kernel.FlopCounter()
    if name == "batch" and cfg.task == "every-step":
        steps = cfg.m - cfg.w
        t0 = time.perf_counter()
        for j in range(cfg.w, cfg.m):
            weighted_batch_dmd(
                SnapshotMatrices(x_mat[:, :j + 1], y_mat[:, :j + 1]),
                1.0, counter)
        wall = time.perf_counter() - t0
    else:
        steps = 1
        t0 = time.perf_counter()
        weighted_batch_dmd(SnapshotMatrices(x_mat, y_mat), 1.0, counter)
        wall = time.perf_counter() - t0
    return _record(cfg, name, n, steps, wall, counter.multiplies,
                   0.0, 0, cfg.m)


def run_benchmark(cfg):
    """Time every (algorithm, n) cell of the grid; see :class:`BenchConfig`.

    Returns a :class:`BenchResult` whose records are ordered by n, then by
    the configured algorithm order.
    """
    _warm_up()
    timers = {
        "online": _time_online,
        "windowed": _time_windowed,
        "mini-batch": _time_mini_batch,
        "batch": _time_batch,
        "standard": lambda c, n, x, y: _time_batch(c, n, x, y, "standard"),
    }
    result = BenchResult()
    for n in cfg.n_list:
        x_mat, y_mat = _bench_pairs(n, cfg.m, cfg.noise, cfg.seed)
        for name in cfg.algorithms:
            if (name == "batch" and cfg.task == "every-step"
                    and n > cfg.batch_cap):
                continue
            best = None
            for _ in range(cfg.repeats):
                record = timers[name](cfg, n, x_mat, y_mat)
                if best is None or record["wall_seconds"] < best["wall_seconds"]:
                    best = record
            result.records.append(best)
    return result


def loglog_slope(result, algorithm):
    """Least-squares slope of log per-step-seconds against log n."""
    records = result.for_algorithm(algorithm)
    if len(records) < 2:
        raise ParameterError(
            f"need at least 2 cells for {algorithm!r} to fit a slope")
    ns = np.array([r["n"] for r in records], dtype=np.float64)
    ts = np.array([r["per_step_seconds"] for r in records])
    return float(np.polyfit(np.log(ns), np.log(ts), 1)[0])


# ---------------------------------------------------------------------------
# Time-varying oscillator
# ---------------------------------------------------------------------------

@dataclass
class LtvConfig:
    """A planar oscillator whose angular frequency ramps linearly.

    The continuous dynamics are xdot = A(t) x with A(t) = [[0, omega],
    [-omega, 0]] and omega(t) = 1 + epsilon t, integrated by classic RK4
    at dt / substeps and sampled every dt.  Streaming fits over a short
    window should track the instantaneous +/- i omega(t) eigenvalues.
    """

    epsilon: float = 0.1
    dt: float = 0.1
    t_end: float = 10.0
    w: int = 10
    rho_list: tuple = (1.0, 0.95, 0.8)
    x0: tuple = (1.0, 0.0)
    substeps: int = 10

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= self.dt:
            raise ParameterError("need 0 < dt < t_end")
        if self.w < 2:
            raise ParameterError("window must hold at least 2 pairs")
        for rho in self.rho_list:
            if not (0.0 < rho <= 1.0):
                raise ParameterError(f"rho must be in (0, 1], got {rho}")


def ltv_omega(cfg, t):
    """Instantaneous angular frequency omega(t) = 1 + epsilon t."""
    return 1.0 + cfg.epsilon * np.asarray(t, dtype=np.float64)


def _ltv_matrix(cfg, t):
    omega = 1.0 + cfg.epsilon * t
    return np.array([[0.0, omega], [-omega, 0.0]])


def integrate_ltv(cfg):
    """Sampled trajectory of the oscillator, shape (steps + 1, 2)."""
    steps = int(round(cfg.t_end / cfg.dt))
    h = cfg.dt / cfg.substeps
    states = np.empty((steps + 1, 2))
    states[0] = cfg.x0
    x = np.array(cfg.x0, dtype=np.float64)
    t = 0.0
    for k in range(steps):
        for _ in range(cfg.substeps):
            k1 = _ltv_matrix(cfg, t) @ x
            k2 = _ltv_matrix(cfg, t + 0.5 * h) @ (x + 0.5 * h * k1)
            k3 = _ltv_matrix(cfg, t + 0.5 * h) @ (x + 0.5 * h * k2)
            k4 = _ltv_matrix(cfg, t + h) @ (x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        states[k + 1] = x
    return states


def run_ltv(cfg=None):
    """Track the oscillator's frequency with every algorithm variant.

    All fits initialize on the first w pairs and emit one track row per
    later step: online DMD once per forgetting factor in ``rho_list``,
    windowed DMD and mini-batch DMD with window w, cumulative batch DMD,
    plus rows labeled "true" carrying the instantaneous omega(t).

    Returns the combined :class:`TrackRecord`.
    """
    if cfg is None:
        cfg = LtvConfig()
    _warm_up()
    states = integrate_ltv(cfg)
    pairs = pair_trajectory(states)
    if len(pairs) <= cfg.w:
        raise ParameterError(
            f"t_end leaves {len(pairs)} pairs, need more than w={cfg.w}")
    head = pairs[:cfg.w]
    online_states = {
        f"online(rho={rho:g})": OnlineDMD.init_exact(stack(head), rho)
        for rho in cfg.rho_list}
    win = WindowedDMD.init_window(head)
    record = TrackRecord()
    for k in range(cfg.w + 1, len(pairs) + 1):
        pair = pairs[k - 1]
        t = k * cfg.dt
        ref = pair.y
        for label, state in online_states.items():
            state.update(pair)
            record.append_track(
                k, spectrum_of(state.A, cfg.dt, ref), label, 1)
        win.slide(pair)
        record.append_track(
            k, spectrum_of(win.A, cfg.dt, ref), f"windowed(w={cfg.w})", 1)
        sol = mini_batch_dmd(pairs[k - cfg.w:k], cfg.w)
        record.append_track(
            k, spectrum_of(sol.A, cfg.dt, ref), f"mini-batch(w={cfg.w})", 1)
        sol = weighted_batch_dmd(stack(pairs[:k]), 1.0)
        record.append_track(k, spectrum_of(sol.A, cfg.dt, ref), "batch", 1)
        omega = float(ltv_omega(cfg, t))
        record.rows.append((k, t, "true", 0, 0.0, omega,
                            omega / (2.0 * np.pi), 1.0, 1))
    return record


# ---------------------------------------------------------------------------
# Synthetic sensor array
# ---------------------------------------------------------------------------

def _drift_bases(count, fixed, fs):
    """Deterministic drifting-tone base frequencies avoiding the fixed ones."""
    bases = []
    candidate = 45.0
    while len(bases) < count:
        if candidate > 0.45 * fs:
            raise ParameterError(
                f"cannot place {count} drifting tones below Nyquist at "
                f"fs={fs}")
        if all(abs(candidate - f) >= 40.0 for f in fixed):
            bases.append(candidate)
        candidate += 40.0
    return bases


def generate_sensor_states(channels=13, duration_s=10.0, fs=2048.0,
                           tones=(105.0, 135.0), tone_amps=(1.0, 0.8),
                           drift_amp=0.1, drift_rate=1.5, mean_amp=0.15,
                           noise=0.0, seed=0):
    """Synthesize a multichannel recording with known spectral content.

    The latent signal holds one cos/sin pair per tone: the fixed tones
    from ``tones`` plus enough slowly drifting tones (linear chirps at
    +/- ``drift_rate`` Hz/s) to make the latent dimension match
    ``channels``; an odd channel count adds a constant mean component.
    Channels are a random orthogonal mix of the latent components, so the
    latent amplitudes carry over to the eigen-expansion of every state
    and the snapshot matrix has full row rank even without noise.

    Returns:
        (states, dt): an (m, channels) float array and the sample
        interval 1/fs.
    """
    if channels < 2:
        raise ParameterError(f"need at least 2 channels, got {channels}")
    pair_count = channels // 2
    use_mean = channels % 2 == 1
    if len(tones) != len(tone_amps):
        raise ParameterError("tones and tone_amps must have equal length")
    if len(tones) > pair_count:
        raise ParameterError(
            f"{len(tones)} tones need {2 * len(tones)} channels, got "
            f"{channels}")
    for f in tones:
        if not 0.0 < f < 0.5 * fs:
            raise ParameterError(f"tone {f} Hz is outside (0, fs/2)")
    m = int(round(duration_s * fs))
    if m < 2:
        raise ParameterError("duration too short for a single pair")
    t = np.arange(m) / fs
    drift_count = pair_count - len(tones)
    bases = _drift_bases(drift_count, tones, fs)
    latent = []
    for f, amp in zip(tones, tone_amps):
        phase = 2.0 * np.pi * f * t
        latent.append(amp * np.cos(phase))
        latent.append(amp * np.sin(phase))
    for idx, base in enumerate(bases):
        rate = drift_rate if idx % 2 == 0 else -drift_rate
        phase = 2.0 * np.pi * (base * t + 0.5 * rate * t * t)
        latent.append(drift_amp * np.cos(phase))
        latent.append(drift_amp * np.sin(phase))
    if use_mean:
        latent.append(mean_amp * np.ones(m))
    z = np.stack(latent, axis=1)
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((channels, channels))
    q, r = np.linalg.qr(gauss)
    q = q * np.sign(np.diag(r))
    states = z @ q.T
    if noise > 0.0:
        states = states + noise * rng.standard_normal(states.shape)
    return states, 1.0 / fs


def run_synthetic_sensors(channels=13, duration_s=10.0, fs=2048.0,
                          tones=(105.0, 135.0), tone_amps=(1.0, 0.8),
                          drift_amp=0.1, drift_rate=1.5, mean_amp=0.15,
                          noise=0.0, rho=0.999, w=1000, track_count=4,
                          emit_every=1, seed=0,
                          algorithms=("online", "windowed")):
    """Track dominant frequencies of the synthetic sensor array.

    Online DMD runs with forgetting factor ``rho`` and windowed DMD with
    window ``w``; both initialize on the first w pairs.  At every
    ``emit_every``-th later step each fitted operator contributes its
    ``track_count`` most dominant eigenvalues (ranked against the current
    state) to the returned :class:`TrackRecord`.
    """
    _warm_up()
    states, dt = generate_sensor_states(
        channels, duration_s, fs, tones, tone_amps, drift_amp, drift_rate,
        mean_amp, noise, seed)
    pairs = pair_trajectory(states)
    if len(pairs) <= w:
        raise ParameterError(
            f"duration leaves {len(pairs)} pairs, need more than w={w}")
    count = min(track_count, channels)
    head = pairs[:w]
    runners = []
    for name in algorithms:
        if name == "online":
            runners.append((f"online(rho={rho:g})",
                            OnlineDMD.init_exact(stack(head), rho)))
        elif name == "windowed":
            runners.append((f"windowed(w={w})",
                            WindowedDMD.init_window(head)))
        else:
            raise ParameterError(f"unsupported sensor algorithm {name!r}")
    record = TrackRecord()
    for k in range(w + 1, len(pairs) + 1):
        pair = pairs[k - 1]
        for label, state in runners:
            if isinstance(state, WindowedDMD):
                state.slide(pair)
            else:
                state.update(pair)
        if (k - w) % emit_every != 0:
            continue
        for label, state in runners:
            record.append_track(
                k, spectrum_of(state.A, dt, pair.y), label, count)
    return record
