"""Experiment drivers: benchmark accounting, oscillator, sensor array."""

import numpy as np
import pytest

from streamdmd.errors import ParameterError
from streamdmd.harness import (BenchConfig, BenchResult, LtvConfig,
                               generate_sensor_states, integrate_ltv,
                               loglog_slope, ltv_omega, run_benchmark,
                               run_ltv, run_synthetic_sensors)
from streamdmd.harness import _bench_pairs
from streamdmd.online import OnlineDMD
from streamdmd.snapshots import SnapshotMatrices

SMALL = dict(n_list=(4, 8), m=120, w=32)


def strip_wall_fields(record):
    drop = ("wall_seconds", "per_step_seconds", "init_seconds")
    return {k: v for k, v in record.items() if k not in drop}


def test_benchmark_per_step_multiplies_are_exact_integers():
    cfg = BenchConfig(task="every-step", algorithms=("online", "windowed"),
                      **SMALL)
    result = run_benchmark(cfg)
    online = {r["n"]: r for r in result.for_algorithm("online")}
    windowed = {r["n"]: r for r in result.for_algorithm("windowed")}
    for n in cfg.n_list:
        assert online[n]["per_step_multiplies"] == 4 * n * n
        assert isinstance(online[n]["per_step_multiplies"], int)
        assert windowed[n]["per_step_multiplies"] == 8 * n * n
        assert online[n]["steps"] == cfg.m - cfg.w
        assert online[n]["total_multiplies"] == 4 * n * n * (cfg.m - cfg.w)
    # doubling n quadruples the streaming per-step cost exactly
    assert online[8]["per_step_multiplies"] == \
        4 * online[4]["per_step_multiplies"]
    assert windowed[8]["per_step_multiplies"] == \
        4 * windowed[4]["per_step_multiplies"]


def test_benchmark_storage_accounting():
    cfg = BenchConfig(task="every-step", **SMALL)
    result = run_benchmark(cfg)
    stored = {r["algorithm"]: r["stored_pairs"] for r in result.records
              if r["n"] == 4}
    assert stored == {"online": 0, "windowed": cfg.w, "mini-batch": cfg.w,
                      "batch": cfg.m, "standard": cfg.m}


def test_benchmark_deterministic_apart_from_wall_time():
    cfg = BenchConfig(task="every-step", algorithms=("online", "mini-batch"),
                      **SMALL)
    first = run_benchmark(cfg)
    second = run_benchmark(cfg)
    assert len(first.records) == len(second.records)
    for r1, r2 in zip(first.records, second.records):
        assert strip_wall_fields(r1) == strip_wall_fields(r2)


def test_benchmark_total_multiply_ordering():
    cfg = BenchConfig(task="every-step", **SMALL)
    result = run_benchmark(cfg)
    for n in cfg.n_list:
        cell = {r["algorithm"]: r["total_multiplies"] for r in result.records
                if r["n"] == n}
        assert cell["online"] < cell["mini-batch"] < cell["batch"]


def test_benchmark_online_final_matches_full_lstsq():
    n, m, w = 8, 300, 32
    x_mat, y_mat = _bench_pairs(n, m, 0.01, 0)
    state = OnlineDMD.init_exact(SnapshotMatrices(x_mat[:, :w], y_mat[:, :w]))
    for j in range(w, m):
        state.update(x_mat[:, j], y_mat[:, j])
    a_ref = np.linalg.lstsq(x_mat.T, y_mat.T, rcond=None)[0].T
    assert np.linalg.norm(state.A - a_ref) <= 1e-8 * np.linalg.norm(a_ref)


def test_benchmark_batch_cap_skips_large_every_step_cells():
    cfg = BenchConfig(task="every-step", algorithms=("batch",),
                      batch_cap=4, **SMALL)
    result = run_benchmark(cfg)
    assert [r["n"] for r in result.records] == [4]
    # final-only keeps the large cell: a single solve is cheap
    cfg = BenchConfig(task="final-only", algorithms=("batch",),
                      batch_cap=4, **SMALL)
    assert [r["n"] for r in run_benchmark(cfg).records] == [4, 8]


def test_bench_config_validation():
    with pytest.raises(ParameterError):
        BenchConfig(task="sometimes", **SMALL)
    with pytest.raises(ParameterError):
        BenchConfig(algorithms=("online", "turbo"), **SMALL)
    with pytest.raises(ParameterError):
        BenchConfig(n_list=(4,), m=32, w=32)
    with pytest.raises(ParameterError):
        BenchConfig(n_list=(64,), m=120, w=32)
    with pytest.raises(ParameterError):
        BenchConfig(repeats=0, **SMALL)


def test_bench_result_jsonl(tmp_path):
    import json
    cfg = BenchConfig(task="final-only", algorithms=("online",),
                      n_list=(4,), m=120, w=32)
    result = run_benchmark(cfg)
    path = tmp_path / "bench.jsonl"
    result.write_jsonl(path)
    lines = path.read_text().strip().split("\n")
    assert len(lines) == 1
    record = json.loads(lines[0])
    for key in ("algorithm", "n", "m", "w", "task", "rho", "seed", "steps",
                "wall_seconds", "per_step_seconds", "total_multiplies",
                "per_step_multiplies", "init_seconds", "init_multiplies",
                "stored_pairs"):
        assert key in record
    assert record["algorithm"] == "online"
    assert record["stored_pairs"] == 0


def test_loglog_slope_on_exact_quadratic():
    result = BenchResult(records=[
        {"algorithm": "online", "n": n, "per_step_seconds": 3e-9 * n * n}
        for n in (2, 4, 8, 16, 32)])
    assert loglog_slope(result, "online") == pytest.approx(2.0, abs=1e-9)
    with pytest.raises(ParameterError):
        loglog_slope(result, "windowed")


def test_integrate_ltv_constant_omega_closed_form():
    cfg = LtvConfig(epsilon=0.0, t_end=5.0)
    states = integrate_ltv(cfg)
    t = np.arange(states.shape[0]) * cfg.dt
    exact = np.column_stack([np.cos(t), -np.sin(t)])
    assert np.max(np.abs(states - exact)) <= 1e-8
    # the rotation conserves the norm
    norms = np.linalg.norm(states, axis=1)
    assert np.max(np.abs(norms - 1.0)) <= 1e-8


def test_ltv_omega_ramp():
    cfg = LtvConfig(epsilon=0.1)
    assert ltv_omega(cfg, 0.0) == 1.0
    assert ltv_omega(cfg, 10.0) == pytest.approx(2.0)


def test_run_ltv_constant_omega_all_algorithms_exact():
    cfg = LtvConfig(epsilon=0.0, t_end=5.0)
    record = run_ltv(cfg)
    labels = record.labels()
    assert set(labels) == {"online(rho=1)", "online(rho=0.95)",
                           "online(rho=0.8)", "windowed(w=10)",
                           "mini-batch(w=10)", "batch", "true"}
    for label in labels:
        ims = record.column("im_lambda", label=label)
        assert ims.shape[0] == 50 - cfg.w
        assert np.max(np.abs(ims - 1.0)) <= 1e-6


def test_run_ltv_windowed_tracks_mini_batch():
    record = run_ltv(LtvConfig(t_end=6.0))
    win = record.column("im_lambda", label="windowed(w=10)")
    mini = record.column("im_lambda", label="mini-batch(w=10)")
    assert np.max(np.abs(win - mini)) <= 1e-9
    # the sliding fit lags the ramp by about half a window
    times = record.column("time", label="windowed(w=10)")
    cfg = LtvConfig(t_end=6.0)
    expected = ltv_omega(cfg, times - 0.5 * cfg.w * cfg.dt)
    assert np.max(np.abs(win - expected) / expected) <= 0.05


def test_run_ltv_forgetting_accelerates_tracking():
    cfg = LtvConfig(t_end=8.0)
    record = run_ltv(cfg)
    errors = []
    for rho in (1.0, 0.95, 0.8):
        label = f"online(rho={rho:g})"
        times = record.column("time", label=label)
        ims = record.column("im_lambda", label=label)
        keep = times >= 2.0
        errors.append(np.mean(np.abs(ims[keep] - ltv_omega(cfg, times[keep]))))
    assert errors[0] > errors[1] > errors[2]


def test_ltv_config_validation():
    with pytest.raises(ParameterError):
        LtvConfig(dt=0.0)
    with pytest.raises(ParameterError):
        LtvConfig(t_end=0.05)
    with pytest.raises(ParameterError):
        LtvConfig(w=1)
    with pytest.raises(ParameterError):
        LtvConfig(rho_list=(1.0, 0.0))


def test_sensor_generator_shapes_rank_and_determinism():
    states, dt = generate_sensor_states(channels=13, duration_s=0.1)
    assert states.shape == (205, 13)
    assert dt == 1.0 / 2048.0
    assert np.linalg.matrix_rank(states) == 13
    again, _ = generate_sensor_states(channels=13, duration_s=0.1)
    assert np.array_equal(states, again)


def test_sensor_generator_validation():
    with pytest.raises(ParameterError):
        generate_sensor_states(channels=1)
    with pytest.raises(ParameterError):
        generate_sensor_states(channels=3, tones=(105.0, 135.0),
                               tone_amps=(1.0, 0.8))
    with pytest.raises(ParameterError):
        generate_sensor_states(channels=4, tones=(2000.0,),
                               tone_amps=(1.0,), fs=2048.0)
    with pytest.raises(ParameterError):
        generate_sensor_states(channels=4, tones=(105.0,),
                               tone_amps=(1.0, 0.8))


def test_sensors_two_channel_pure_tone():
    record = run_synthetic_sensors(
        channels=2, duration_s=1.0, fs=512.0, tones=(105.0,),
        tone_amps=(1.0,), w=100, track_count=1)
    for label in record.labels():
        freqs = record.column("freq_hz", label=label, rank=1)
        assert freqs.shape[0] == 411
        assert np.max(np.abs(freqs - 105.0)) <= 0.5


def test_sensors_emit_every():
    record = run_synthetic_sensors(
        channels=2, duration_s=0.5, fs=512.0, tones=(60.0,),
        tone_amps=(1.0,), w=100, track_count=1, emit_every=20,
        algorithms=("windowed",))
    steps = record.column("step", rank=1)
    assert np.array_equal(np.diff(steps), np.full(steps.shape[0] - 1, 20.0))


def test_sensors_online_track_smoother_than_windowed():
    record = run_synthetic_sensors(
        channels=4, duration_s=2.0, fs=512.0, tones=(60.0,),
        tone_amps=(1.0,), noise=0.01, rho=1.0, w=128, track_count=1)
    online = record.column("freq_hz", label="online(rho=1)", rank=1)
    windowed = record.column("freq_hz", label="windowed(w=128)", rank=1)
    assert np.var(np.diff(online)) < np.var(np.diff(windowed))


def test_sensors_deterministic():
    kwargs = dict(channels=4, duration_s=0.5, fs=512.0, tones=(60.0,),
                  tone_amps=(1.0,), noise=0.005, w=64, track_count=2)
    first = run_synthetic_sensors(**kwargs)
    second = run_synthetic_sensors(**kwargs)
    assert first.rows == second.rows
