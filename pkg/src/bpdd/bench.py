"""Seeded trial suites: detection scoring and fast-versus-brute timing."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .detector import DetectionConfig, detect, match_report
from .injector import Kind, inject, random_bad_data
from .metrics import ConfusionTotals, score
from .profile import compute_profile, self_join_oracle
from .synthgen import event_library, generate, random_scenario
from .tsdata import concatenate, normalize_per_channel, robust_reference

__all__ = [
    "TrialSpec",
    "TrialRecord",
    "BenchmarkRecord",
    "make_trial",
    "run_trial",
    "run_suite",
    "time_profiles",
    "totals",
]

KINDS = (Kind.SPIKE, Kind.REPEATED, Kind.FALSE_INJECTION)


@dataclass(frozen=True)
class TrialSpec:
    n_b: int = 5
    n: int = 500
    dt: float = 0.01
    m: int | None = None
    K: float = 6.0
    coupling: float = 0.9
    noise_std: float = 0.001
    ambient_std: float = 0.03
    with_event: bool = True
    exclusion_halfwidth: int = 0
    boundary_policy: str = "include"
    near_event_seconds: float | None = None

    @property
    def subsequence_length(self) -> int:
        return self.m if self.m is not None else self.n // 10


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    kind: str
    outcome: str
    ta: int
    fn: int
    fa: int
    n_anomalies: int
    threshold: float
    seconds: float


@dataclass(frozen=True)
class BenchmarkRecord:
    """Runtime of the fast and brute-force profiles on one window."""

    trial: int
    N: int
    m: int
    fast_seconds: float
    brute_seconds: float
    max_abs_diff: float

    @property
    def speedup(self) -> float:
        return self.brute_seconds / self.fast_seconds


_LIBRARY = None


def _library():
    global _LIBRARY
    if _LIBRARY is None:
        _LIBRARY = event_library()
    return _LIBRARY


def make_trial(seed: int, kind: str | None, spec: TrialSpec = TrialSpec()):
    """Build one window. ``kind=None`` gives a clean window.

    Returns ``(window, truth_labels, grid_scenario, bad_data_scenario)``.
    """
    rng = np.random.default_rng(seed)
    grid = random_scenario(
        rng, spec.n_b, spec.n, spec.dt, spec.coupling, spec.noise_std, spec.with_event, spec.ambient_std
    )
    _, window = generate(grid)
    if kind is None:
        return window, [], grid, None
    region = None
    if spec.near_event_seconds is not None and grid.events:
        onset = grid.events[0].onset_sample
        reach = int(round(spec.near_event_seconds / spec.dt))
        region = (max(1, onset - reach), min(spec.n, onset + reach))
    bad = random_bad_data(rng, window, kind, _library(), region)
    window, truth = inject(window, bad)
    return window, truth, grid, bad


def detect_window(window, spec: TrialSpec):
    series = concatenate(normalize_per_channel(window, robust_reference(window)))
    profile = compute_profile(
        series, spec.subsequence_length, spec.exclusion_halfwidth, spec.boundary_policy
    )
    return detect(profile, DetectionConfig(K=spec.K))


def run_trial(trial: int, seed: int, kind: str | None, spec: TrialSpec = TrialSpec()) -> TrialRecord:
    window, truth, _, _ = make_trial(seed, kind, spec)
    t0 = time.perf_counter()
    report = detect_window(window, spec)
    elapsed = time.perf_counter() - t0
    res = match_report(report, truth)
    return TrialRecord(
        trial, seed, kind or "clean", res.window_outcome, res.ta, res.fn, res.fa,
        len(report.anomalies), report.threshold, elapsed,
    )


def suite_plan(trials: int, seed: int, clean_fraction: float = 0.5):
    """Deterministic ``(trial, seed, kind)`` triples.

    The first ``clean_fraction`` of trials are clean; the rest cycle through
    spike, repeated and false injection.
    """
    seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint32)
    n_clean = int(round(trials * clean_fraction))
    plan = []
    for i in range(trials):
        kind = None if i < n_clean else KINDS[(i - n_clean) % len(KINDS)].value
        plan.append((i, int(seeds[i]), kind))
    return plan


def _run(args):
    return run_trial(*args)


def run_suite(
    trials: int,
    seed: int = 0,
    spec: TrialSpec = TrialSpec(),
    clean_fraction: float = 0.5,
    jobs: int = 1,
) -> list[TrialRecord]:
    plan = [(i, s, k, spec) for i, s, k in suite_plan(trials, seed, clean_fraction)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_run, plan, chunksize=4))
    return [_run(p) for p in plan]


def totals(records) -> ConfusionTotals:
    return ConfusionTotals.from_outcomes(r.outcome for r in records)


def time_profiles(
    count: int = 10, seed: int = 0, spec: TrialSpec = TrialSpec(), repeats: int = 1
) -> list[BenchmarkRecord]:
    """Time the fast profile against the brute-force oracle on clean windows."""
    out = []
    for i, s, _ in suite_plan(count, seed, clean_fraction=1.0):
        window, *_ = make_trial(s, None, spec)
        series = concatenate(normalize_per_channel(window, robust_reference(window)))
        m = spec.subsequence_length
        fast = brute = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            pf = compute_profile(series, m, spec.exclusion_halfwidth, spec.boundary_policy)
            t1 = time.perf_counter()
            pb = self_join_oracle(series, m, spec.exclusion_halfwidth, spec.boundary_policy)
            t2 = time.perf_counter()
            fast, brute = min(fast, t1 - t0), min(brute, t2 - t1)
        diff = float(np.nanmax(np.abs(pf.values - pb.values)))
        out.append(BenchmarkRecord(i, series.N, m, fast, brute, diff))
    return out


def summary(records: list[TrialRecord], timings: list[BenchmarkRecord]) -> dict:
    s = score(totals(records))
    out = {"trials": len(records), **asdict(totals(records)), **asdict(s)}
    if timings:
        out["fast_seconds"] = float(np.mean([t.fast_seconds for t in timings]))
        out["brute_seconds"] = float(np.mean([t.brute_seconds for t in timings]))
        out["speedup"] = out["brute_seconds"] / out["fast_seconds"]
    return out


def write_records(records, timings, path) -> Path:
    path = Path(path)
    data = {
        "trials": [asdict(r) for r in records],
        "timings": [{**asdict(t), "speedup": t.speedup} for t in timings],
    }
    path.write_text(json.dumps(data, indent=2), encoding="utf-8")
    return path


def make_feed(seed: int, kind: str | None, seconds: float = 20.0, spec: TrialSpec = TrialSpec()):
    """A continuous recording with one event and at most one injected anomaly.

    Returns ``(rows, channel_ids, truth_labels)`` with rows as
    ``(timestamp, values)`` pairs suitable for :func:`bpdd.stream.run_stream`.
    """
    rng = np.random.default_rng(seed)
    n = int(round(seconds / spec.dt))
    grid = random_scenario(
        rng, spec.n_b, n, spec.dt, spec.coupling, spec.noise_std, spec.with_event, spec.ambient_std
    )
    _, window = generate(grid)
    truth = []
    if kind is not None:
        bad = random_bad_data(rng, window, kind, _library())
        window, truth = inject(window, bad)
    rows = [(t, list(col)) for t, col in zip(window.times, window.values.T)]
    return rows, window.channel_ids, truth
