"""Command line interface.

Subcommands::

    run      stream a snapshot CSV through one algorithm, emit tracks CSV
    bench    time the algorithms over a grid, emit JSONL records
    ltv      track the ramping oscillator, emit tracks CSV
    sensors  track the synthetic sensor array, emit tracks CSV
    sysid    fit a lifted model from (x, u, x_next) samples

Data goes to the output stream only; diagnostics go to stderr.  ``-``
stands for stdin/stdout.  Exit codes: 0 on success, 2 for configuration
problems (bad flags, missing files), 3 for data, parse, or rank errors.
"""

import argparse
import sys
from collections import deque
from contextlib import contextmanager

import numpy as np

from .batch import mini_batch_dmd, weighted_batch_dmd
from .errors import (DataError, DmdError, InsufficientDataError,
                     ParameterError, ParseError, RankError, ShapeError)
from .harness import (BenchConfig, LtvConfig, run_benchmark, run_ltv,
                      run_synthetic_sensors)
from .online import OnlineDMD
from .snapshots import parse_header, read_stream, stack
from .spectral import (TRACK_COLUMNS, format_track_row, rank_dominant,
                       spectrum_of)
from .sysid import Dictionary, identify_stream, read_sample_csv
from .windowed import WindowedDMD


@contextmanager
def _open_out(path):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as handle:
            yield handle


def _open_in(path):
    if path == "-":
        return sys.stdin
    return open(path, "r", encoding="utf-8")


def _int_list(text):
    return tuple(int(part) for part in text.split(",") if part)


def _float_list(text):
    return tuple(float(part) for part in text.split(",") if part)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _emit_rows(out, step, a_mat, dt, ref, label, count, flush):
    spec = spectrum_of(a_mat, dt, ref)
    order = rank_dominant(spec, count)
    time = step * dt
    for rank, idx in enumerate(order, start=1):
        lam = spec.lam[idx]
        row = (step, time, label, idx, lam.real, lam.imag,
               spec.freq_hz[idx], spec.amplitudes[idx], rank)
        out.write(format_track_row(row) + "\n")
    if flush:
        out.flush()


def _cmd_run(args):
    if args.algorithm in ("windowed", "mini-batch") and args.w is None:
        raise ParameterError(
            f"--algorithm {args.algorithm} requires --w")
    source = _open_in(args.input)
    try:
        header = None
        lineno = 0
        for lineno, line in enumerate(source, start=1):
            if line.strip():
                header = parse_header(line, lineno)
                break
        if header is None:
            raise ParseError("empty stream: missing header line")
        dt = args.dt if args.dt is not None else header.dt
        n = header.n
        count = min(args.track_count, n)
        init_count = args.init_count
        if init_count is None:
            init_count = args.w if args.w is not None else 2 * n
        label = args.algorithm
        flush = args.output == "-"
        state = None
        head = []
        ring = deque(maxlen=args.w or 0)
        grows = []
        emitted_from = None
        with _open_out(args.output) as out:
            out.write(",".join(TRACK_COLUMNS) + "\n")
            if flush:
                out.flush()
            for pair in read_stream(source, header, start_line=lineno + 1):
                k = pair.index + 1
                due = False
                if args.algorithm == "online":
                    if state is None and args.init == "regularized":
                        state = OnlineDMD.init_regularized(
                            n, args.alpha, args.rho)
                    if state is None:
                        head.append(pair)
                        if len(head) == init_count:
                            state = OnlineDMD.init_exact(stack(head),
                                                         args.rho)
                            head = []
                        continue
                    state.update(pair)
                    a_mat, due = state.A, True
                elif args.algorithm == "windowed":
                    if state is None:
                        head.append(pair)
                        if len(head) == args.w:
                            state = WindowedDMD.init_window(head, args.rho)
                            head = []
                        continue
                    state.slide(pair)
                    a_mat, due = state.A, True
                elif args.algorithm == "mini-batch":
                    ring.append(pair)
                    if len(ring) == args.w and k > args.w:
                        sol = mini_batch_dmd(list(ring), args.w, args.rho)
                        a_mat, due = sol.A, True
                else:  # batch
                    grows.append(pair)
                    if k > init_count:
                        sol = weighted_batch_dmd(stack(grows), args.rho)
                        a_mat, due = sol.A, True
                if not due:
                    continue
                if emitted_from is None:
                    emitted_from = k
                if (k - emitted_from) % args.emit_every == 0:
                    _emit_rows(out, k, a_mat, dt, pair.y, label, count,
                               flush)
            if emitted_from is None:
                raise InsufficientDataError(
                    "stream ended before the first model was available; "
                    "provide more snapshots or lower the initialization "
                    "size")
    finally:
        if source is not sys.stdin:
            source.close()
    return 0


# ---------------------------------------------------------------------------
# bench / ltv / sensors / sysid
# ---------------------------------------------------------------------------

def _cmd_bench(args):
    cfg = BenchConfig(
        n_list=args.n, m=args.m, w=args.w, task=args.task,
        algorithms=args.algorithms, rho=args.rho, seed=args.seed,
        repeats=args.repeats, batch_cap=args.batch_cap)
    result = run_benchmark(cfg)
    for record in result.records:
        print(f"bench: {record['algorithm']} n={record['n']} "
              f"wall={record['wall_seconds']:.3f}s", file=sys.stderr)
    with _open_out(args.output) as out:
        result.write_jsonl(out)
    return 0


def _cmd_ltv(args):
    cfg = LtvConfig(epsilon=args.epsilon, dt=args.dt, t_end=args.t_end,
                    w=args.w, rho_list=args.rho, substeps=args.substeps)
    record = run_ltv(cfg)
    with _open_out(args.output) as out:
        record.write_csv(out)
    return 0


def _cmd_sensors(args):
    record = run_synthetic_sensors(
        channels=args.channels, duration_s=args.duration, fs=args.fs,
        tones=args.tones, tone_amps=args.tone_amps, noise=args.noise,
        rho=args.rho, w=args.w, track_count=args.track_count,
        emit_every=args.emit_every, seed=args.seed)
    with _open_out(args.output) as out:
        record.write_csv(out)
    return 0


def _cmd_sysid(args):
    source = _open_in(args.input)
    try:
        n, p, samples = read_sample_csv(source)
    finally:
        if source is not sys.stdin:
            source.close()
    if args.dict == "linear":
        dictionary = Dictionary.linear(n, p)
    else:
        dictionary = Dictionary.quadratic(n, p)
    model, history = identify_stream(
        samples, dictionary, mode=args.mode, rho=args.rho, w=args.w,
        init_size=args.init_size)
    print(f"sysid: fitted {len(dictionary)} terms from {len(samples)} "
          f"samples ({len(history)} streaming steps)", file=sys.stderr)
    with _open_out(args.output) as out:
        out.write("# terms=" + ",".join(str(t) for t in dictionary) + "\n")
        for row in np.atleast_2d(model.A_hat):
            out.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="streamdmd",
        description="Streaming dynamic mode decomposition toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run", help="stream a snapshot CSV through one algorithm")
    run_p.add_argument("--algorithm", required=True,
                       choices=("online", "windowed", "mini-batch", "batch"))
    run_p.add_argument("-i", "--input", required=True,
                       help="snapshot CSV path, or - for stdin")
    run_p.add_argument("-o", "--output", required=True,
                       help="tracks CSV path, or - for stdout")
    run_p.add_argument("--rho", type=float, default=1.0,
                       help="forgetting factor in (0, 1] (default 1)")
    run_p.add_argument("--w", type=int, default=None,
                       help="window length (required for windowed and "
                            "mini-batch)")
    run_p.add_argument("--init", choices=("exact", "regularized"),
                       default="exact",
                       help="online initialization (default exact)")
    run_p.add_argument("--alpha", type=float, default=1e10,
                       help="regularized initialization weight "
                            "(default 1e10)")
    run_p.add_argument("--init-count", type=int, default=None,
                       help="pairs consumed by exact initialization "
                            "(default: --w if set, else 2n)")
    run_p.add_argument("--dt", type=float, default=None,
                       help="override the header sample interval")
    run_p.add_argument("--track-count", type=int, default=4,
                       help="dominant eigenvalues per step (default 4, "
                            "clamped to n)")
    run_p.add_argument("--emit-every", type=int, default=1,
                       help="emit every k-th step (default 1)")
    run_p.set_defaults(func=_cmd_run)

    bench_p = sub.add_parser("bench", help="time the algorithms on a grid")
    bench_p.add_argument("--n", type=_int_list,
                         default=BenchConfig.n_list,
                         help="comma-separated state dimensions")
    bench_p.add_argument("--m", type=int, default=BenchConfig.m)
    bench_p.add_argument("--w", type=int, default=BenchConfig.w)
    bench_p.add_argument("--task", choices=("every-step", "final-only"),
                         default="every-step")
    bench_p.add_argument("--algorithms", type=lambda s: tuple(s.split(",")),
                         default=BenchConfig.algorithms,
                         help="comma-separated algorithm names")
    bench_p.add_argument("--rho", type=float, default=1.0)
    bench_p.add_argument("--seed", type=int, default=0)
    bench_p.add_argument("--repeats", type=int, default=1)
    bench_p.add_argument("--batch-cap", type=int,
                         default=BenchConfig.batch_cap)
    bench_p.add_argument("-o", "--output", required=True,
                         help="JSONL path, or - for stdout")
    bench_p.set_defaults(func=_cmd_bench)

    ltv_p = sub.add_parser("ltv", help="track the ramping oscillator")
    ltv_p.add_argument("--epsilon", type=float, default=LtvConfig.epsilon)
    ltv_p.add_argument("--dt", type=float, default=LtvConfig.dt)
    ltv_p.add_argument("--t-end", type=float, default=LtvConfig.t_end)
    ltv_p.add_argument("--w", type=int, default=LtvConfig.w)
    ltv_p.add_argument("--rho", type=_float_list,
                       default=LtvConfig.rho_list,
                       help="comma-separated forgetting factors")
    ltv_p.add_argument("--substeps", type=int, default=LtvConfig.substeps)
    ltv_p.add_argument("-o", "--output", required=True)
    ltv_p.set_defaults(func=_cmd_ltv)

    sens_p = sub.add_parser("sensors",
                            help="track the synthetic sensor array")
    sens_p.add_argument("--channels", type=int, default=13)
    sens_p.add_argument("--duration", type=float, default=10.0)
    sens_p.add_argument("--fs", type=float, default=2048.0)
    sens_p.add_argument("--tones", type=_float_list, default=(105.0, 135.0))
    sens_p.add_argument("--tone-amps", type=_float_list, default=(1.0, 0.8))
    sens_p.add_argument("--noise", type=float, default=0.0)
    sens_p.add_argument("--rho", type=float, default=0.999)
    sens_p.add_argument("--w", type=int, default=1000)
    sens_p.add_argument("--track-count", type=int, default=4)
    sens_p.add_argument("--emit-every", type=int, default=1)
    sens_p.add_argument("--seed", type=int, default=0)
    sens_p.add_argument("-o", "--output", required=True)
    sens_p.set_defaults(func=_cmd_sensors)

    sysid_p = sub.add_parser("sysid",
                             help="fit a lifted model from samples")
    sysid_p.add_argument("--dict", choices=("linear", "quadratic"),
                         default="linear")
    sysid_p.add_argument("--mode", choices=("online", "windowed"),
                         default="online")
    sysid_p.add_argument("--rho", type=float, default=1.0)
    sysid_p.add_argument("--w", type=int, default=None)
    sysid_p.add_argument("--init-size", type=int, default=None)
    sysid_p.add_argument("-i", "--input", required=True,
                         help="sample CSV path, or - for stdin")
    sysid_p.add_argument("-o", "--output", required=True,
                         help="coefficient CSV path, or - for stdout")
    sysid_p.set_defaults(func=_cmd_sysid)
    return parser


def main(argv=None):
    """Entry point returning the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"streamdmd: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"streamdmd: cannot access file: {exc}", file=sys.stderr)
        return 2
    except (ParseError, DataError, RankError, InsufficientDataError,
            ShapeError) as exc:
        print(f"streamdmd: data error: {exc}", file=sys.stderr)
        return 3
    except DmdError as exc:
        print(f"streamdmd: error: {exc}", file=sys.stderr)
        return 3


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
