"""Command-line entry point.

Exit codes: 0 success / clean window, 1 error (including bad usage),
2 anomalies found (``detect`` and ``stream``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import bench
from .detector import DetectionConfig, detect
from .exceptions import BPDDError
from .injector import BadDataScenario, Kind, inject, random_bad_data, save_scenarios
from .metrics import format_table, score
from .profile import compute_profile
from .stream import StreamConfig, iter_csv_rows, run_stream
from .synthgen import GridScenario, event_library, generate, random_event
from .tsdata import concatenate, normalize_per_channel, read_csv, robust_reference, write_csv

EXIT_OK, EXIT_ERROR, EXIT_ANOMALY = 0, 1, 2

log = logging.getLogger("bpdd")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def load_config(path) -> dict:
    """Read ``key=value`` lines; ``#`` starts a comment. Keys use flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BPDDError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _add_detector_flags(p):
    p.add_argument("--m", type=int, default=None, help="subsequence length (default: n/10)")
    p.add_argument("--k-coeff", type=float, default=6.0, help="threshold coefficient K")
    p.add_argument("--exclusion", type=int, default=0, help="exclusion half-width around each query")
    p.add_argument("--boundary", choices=["include", "exclude"], default="include")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bpdd", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file supplying defaults for flags")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="detect bad data in one CSV window")
    p.add_argument("input")
    _add_detector_flags(p)
    p.add_argument("--dt", type=float, default=None, help="sampling interval (default: inferred)")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--profile-out", help="also write the profile as CSV")
    p.add_argument("--no-normalize", action="store_true")

    p = sub.add_parser("profile", help="write the nearest-neighbor profile of a CSV window")
    p.add_argument("input")
    _add_detector_flags(p)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("stream", help="sliding-window detection over a file or stdin")
    p.add_argument("input", nargs="?", default="-", help="CSV file, or - for stdin")
    _add_detector_flags(p)
    p.add_argument("--window-sec", type=float, default=5.0)
    p.add_argument("--step-sec", type=float, default=0.5)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--out", help="JSON-lines report path (default: stdout)")

    p = sub.add_parser("generate", help="write a synthetic window with one injected anomaly")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--channels", type=int, default=5)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--coupling", type=float, default=0.9)
    p.add_argument("--noise", type=float, default=0.001)
    p.add_argument("--ambient", type=float, default=0.03)
    p.add_argument("--no-event", action="store_true")
    p.add_argument("--kind", choices=[k.value for k in Kind], default="spike")
    p.add_argument("--channel", type=int, default=None, help="1-based target channel")
    p.add_argument("--start", type=int, default=None, help="1-based first sample")
    p.add_argument("--span", type=_positive_int, default=None)
    p.add_argument("--magnitude", type=float, default=None)

    p = sub.add_parser("bench", help="seeded detection-quality and timing benchmark")
    p.add_argument("--trials", type=_positive_int, default=200)
    p.add_argument("--channels", type=int, default=5)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k-coeff", type=float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing-runs", type=int, default=10, help="windows timed fast vs brute force")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="bench_records.json", help="per-trial records (JSON)")
    p.add_argument("--csv", action="store_true", help="print the metric table as CSV")
    return parser


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            parser.exit(EXIT_ERROR, f"bpdd: error: {exc}\n")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in cfg.items() if k in known})
        args = parser.parse_args(argv)
        # defaults from the file bypass argparse type conversion
        for a in sub._actions:
            v = getattr(args, a.dest, None)
            if isinstance(v, str) and a.type not in (None, str) and a.dest in cfg:
                setattr(args, a.dest, a.type(v))
    return args


def _emit(text, path):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _profile_for(args):
    window = read_csv(args.input, dt=args.dt)
    if not getattr(args, "no_normalize", False):
        window = normalize_per_channel(window, robust_reference(window))
    m = args.m if args.m is not None else window.n // 10
    return compute_profile(concatenate(window), m, args.exclusion, args.boundary)


def cmd_detect(args) -> int:
    profile = _profile_for(args)
    report = detect(profile, DetectionConfig(K=args.k_coeff), window_id=Path(args.input).name)
    _emit(report.to_json(), args.out)
    if args.profile_out:
        _emit(profile.to_csv(), args.profile_out)
    return EXIT_ANOMALY if report.flagged else EXIT_OK


def cmd_profile(args) -> int:
    _emit(_profile_for(args).to_csv(), args.out)
    return EXIT_OK


def cmd_stream(args) -> int:
    if args.input == "-":
        lines = iter(sys.stdin.readline, "")
    else:
        lines = open(args.input, encoding="utf-8")
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        ids, rows = iter_csv_rows(lines)
        window_samples = int(round(args.window_sec / args.dt))
        m_fraction = args.m / window_samples if args.m else 0.1
        config = StreamConfig(
            args.window_sec,
            args.step_sec,
            m_fraction,
            DetectionConfig(K=args.k_coeff),
            exclusion_halfwidth=args.exclusion,
            boundary_policy=args.boundary,
        )

        def on_report(report, alerts):
            out.write(json.dumps({"report": report.to_dict()}) + "\n")
            out.flush()

        result = run_stream(rows, config, args.dt, ids, on_report)
        for a in result.alerts:
            out.write(json.dumps({"alert": asdict(a)}) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
        if lines is not sys.stdin and hasattr(lines, "close"):
            lines.close()
    return EXIT_ANOMALY if result.alerts else EXIT_OK


def cmd_generate(args) -> int:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise BPDDError(f"cannot create {out}: {exc}") from None
    rng = np.random.default_rng(args.seed)
    events = () if args.no_event else (random_event(rng, args.samples, args.dt),)
    grid = GridScenario(
        args.channels, args.samples, args.dt, args.coupling, args.noise, events,
        int(rng.integers(2**31)), args.ambient,
    )
    clean, noisy = generate(grid)
    library = event_library(length=max(200, args.span or 0), dt=args.dt)
    drawn = random_bad_data(rng, noisy, args.kind, library)
    span = args.span or drawn.span
    start = args.start or min(drawn.start_sample, args.samples - span + 1)
    segment = drawn.source_segment
    if Kind(args.kind) is Kind.FALSE_INJECTION and (segment is None or len(segment) != span):
        segment = library[0][:span]
    scenario = BadDataScenario(
        args.kind,
        args.channel or drawn.channel,
        start,
        span,
        drawn.magnitude if args.magnitude is None else args.magnitude,
        segment,
        args.seed,
    )
    injected, truth = inject(noisy, scenario)
    try:
        write_csv(noisy, out / "clean.csv")
        write_csv(injected, out / "injected.csv")
        (out / "scenario.json").write_text(
            json.dumps({"grid": grid.to_dict(), "bad_data": scenario.to_dict()}, indent=2),
            encoding="utf-8",
        )
        (out / "truth.json").write_text(
            json.dumps([t.to_dict() for t in truth], indent=2), encoding="utf-8"
        )
    except OSError as exc:
        raise BPDDError(f"cannot write to {out}: {exc}") from None
    print(f"wrote clean.csv, injected.csv, scenario.json, truth.json to {out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = bench.TrialSpec(n_b=args.channels, n=args.samples, m=args.m, K=args.k_coeff)
    records = bench.run_suite(args.trials, args.seed, spec, jobs=args.jobs)
    timings = bench.time_profiles(args.timing_runs, args.seed, spec) if args.timing_runs else []
    s = score(bench.totals(records))
    t = bench.totals(records)
    if args.csv:
        from .metrics import table_csv

        print(table_csv({"proposed": s}), end="")
    else:
        print(f"{args.trials} trials, n_b={args.channels}, n={args.samples}, "
              f"m={spec.subsequence_length}, K={args.k_coeff}, seed={args.seed}")
        print(f"n_all={t.n_all} n_ta={t.n_ta} n_fn={t.n_fn} n_fa={t.n_fa}")
        print(format_table({"proposed": s}))
    if timings:
        fast = np.mean([r.fast_seconds for r in timings])
        brute = np.mean([r.brute_seconds for r in timings])
        print()
        print("average execution time over %d windows (N=%d, m=%d)"
              % (len(timings), timings[0].N, timings[0].m))
        print(f"  fast        {fast:.4f} s")
        print(f"  brute-force {brute:.4f} s")
        print(f"  speedup     {brute / fast:.1f}x")
    if args.out:
        bench.write_records(records, timings, args.out)
    return EXIT_OK


COMMANDS = {
    "detect": cmd_detect,
    "profile": cmd_profile,
    "stream": cmd_stream,
    "generate": cmd_generate,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (BPDDError, OSError, ValueError) as exc:
        print(f"bpdd: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
