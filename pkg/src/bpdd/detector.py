"""Adaptive thresholding, peak extraction and localisation of anomalies."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import EmptyProfileError, ParameterError
from .profile import StnnProfile
from .tsdata import locate

__all__ = [
    "DetectionConfig",
    "Anomaly",
    "DetectionReport",
    "MatchResult",
    "compute_threshold",
    "detect",
    "match_report",
]


@dataclass(frozen=True)
class DetectionConfig:
    """Detector settings. ``peak_step=None`` means ``max(1, m // 10)``."""

    K: float = 6.0
    peak_step: int | None = None
    max_anomalies: int = 32

    def __post_init__(self):
        if not self.K > 0:
            raise ParameterError(f"K must be positive, got {self.K}")
        if self.peak_step is not None and self.peak_step < 1:
            raise ParameterError(f"peak_step must be >= 1, got {self.peak_step}")
        if self.max_anomalies < 1:
            raise ParameterError(f"max_anomalies must be >= 1, got {self.max_anomalies}")

    def step_for(self, m: int) -> int:
        return self.peak_step if self.peak_step is not None else max(1, m // 10)


@dataclass(frozen=True)
class Anomaly:
    """A flagged flat range (1-based, inclusive) and where it falls in the window."""

    flat_start: int
    flat_end: int
    channel_locations: tuple
    peak_value: float
    peak_index: int

    def to_dict(self) -> dict:
        return {
            "flat_start": self.flat_start,
            "flat_end": self.flat_end,
            "channel_locations": [
                {"channel": c, "start": s, "end": e} for c, (s, e) in self.channel_locations
            ],
            "peak_value": self.peak_value,
            "peak_index": self.peak_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Anomaly:
        locs = tuple((x["channel"], (x["start"], x["end"])) for x in d["channel_locations"])
        return cls(d["flat_start"], d["flat_end"], locs, d["peak_value"], d["peak_index"])


@dataclass(frozen=True)
class DetectionReport:
    window_id: object
    threshold: float
    profile_mean: float
    profile_std: float
    anomalies: tuple = ()
    pre_flags: tuple = ()

    @property
    def flagged(self) -> bool:
        """Window-level verdict: any anomaly found."""
        return bool(self.anomalies)

    def to_dict(self) -> dict:
        return {
            "window_id": self.window_id,
            "threshold": self.threshold,
            "profile_mean": self.profile_mean,
            "profile_std": self.profile_std,
            "anomalies": [a.to_dict() for a in self.anomalies],
            "pre_flags": [{"channel": c, "sample": s} for c, s in self.pre_flags],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> DetectionReport:
        return cls(
            d["window_id"],
            d["threshold"],
            d["profile_mean"],
            d["profile_std"],
            tuple(Anomaly.from_dict(a) for a in d["anomalies"]),
            tuple((p["channel"], p["sample"]) for p in d["pre_flags"]),
        )


def _profile_stats(profile: StnnProfile) -> tuple[float, float]:
    vals = profile.values[profile.evaluated]
    if vals.size < 2:
        raise EmptyProfileError(f"need at least 2 evaluated entries, have {vals.size}")
    return float(vals.mean()), float(vals.std())


def compute_threshold(profile: StnnProfile, K: float) -> float:
    """``mean + K * std`` over the evaluated profile entries (population std)."""
    mu, sd = _profile_stats(profile)
    return mu + K * sd


def _pre_flag_mask(profile: StnnProfile) -> np.ndarray:
    """Start positions whose subsequence touches a zero-filled cell."""
    L, m = len(profile), profile.m
    touched = np.zeros(L, dtype=bool)
    for p in profile.series.pre_flag_positions():
        touched[max(0, p - m) : min(L, p)] = True
    return touched


def _merge(spans):
    spans = sorted(spans, key=lambda s: s[0])
    merged = []
    for start, end, value, peak in spans:
        if merged and start <= merged[-1][1]:
            s0, e0, v0, p0 = merged[-1]
            if value > v0:
                v0, p0 = value, peak
            merged[-1] = (s0, max(e0, end), v0, p0)
        else:
            merged.append((start, end, value, peak))
    return merged


def detect(
    profile: StnnProfile,
    config: DetectionConfig | None = None,
    window_id=None,
) -> DetectionReport:
    """Extract anomalies from a profile by iterated peak picking.

    Each round takes the largest remaining profile value; if it exceeds the
    threshold, neighbouring positions at multiples of ``peak_step`` are probed
    while they stay above it, and ``m - 1`` positions either side of the peak
    are masked before the next round.
    """
    config = config or DetectionConfig()
    m = profile.m
    step = config.step_for(m)
    mu, sd = _profile_stats(profile)
    xi = mu + config.K * sd
    vals = profile.values
    L = vals.size
    available = profile.evaluated & ~_pre_flag_mask(profile)
    masked_vals = np.where(available, vals, -np.inf)

    found = []
    while len(found) < config.max_anomalies:
        peak = int(np.argmax(masked_vals))
        if not masked_vals[peak] > xi:
            break
        lo = hi = peak
        for direction in (-1, 1):
            k = 1
            while True:
                pos = peak + direction * k * step
                if abs(pos - peak) > m - 1 or not 0 <= pos < L:
                    break
                if not available[pos] or not vals[pos] > xi:
                    break
                lo, hi = min(lo, pos), max(hi, pos)
                k += 1
        found.append((lo + 1, hi + m, float(vals[peak]), peak + 1))
        zone = slice(max(0, peak - m + 1), min(L, peak + m))
        masked_vals[zone] = -np.inf
        available[zone] = False

    anomalies = tuple(
        Anomaly(s, e, tuple(locate((s, e), profile.series)), v, p)
        for s, e, v, p in _merge(found)
    )
    return DetectionReport(window_id, xi, mu, sd, anomalies, profile.series.pre_flags)


@dataclass(frozen=True)
class MatchResult:
    """Span-level and window-level comparison of a report with ground truth."""

    ta: int
    fn: int
    fa: int
    truth_anomalous: bool
    flagged: bool

    @property
    def window_outcome(self) -> str:
        """One of ``"ta"``, ``"fn"``, ``"fa"`` or ``"tn"``."""
        if self.truth_anomalous:
            return "ta" if self.ta > 0 else "fn"
        return "fa" if self.flagged else "tn"


def _truth_spans(truth, channel_ids):
    spans = []
    for t in truth:
        if hasattr(t, "channel_id"):
            spans.append((t.channel_id, t.start, t.end))
        else:  # BadDataScenario: 1-based channel index
            cid = channel_ids[t.channel - 1] if channel_ids else f"ch{t.channel}"
            spans.append((cid, t.start_sample, t.start_sample + t.span - 1))
    return spans


def match_report(report: DetectionReport, truth, channel_ids=None) -> MatchResult:
    """Count true detections, misses and false alarms for one window.

    A truth span is detected when any anomaly overlaps it by at least one
    sample on the same channel.
    """
    spans = _truth_spans(truth, channel_ids)

    def overlaps(anomaly, span):
        cid, s, e = span
        return any(c == cid and a <= e and s <= b for c, (a, b) in anomaly.channel_locations)

    ta = sum(any(overlaps(a, t) for a in report.anomalies) for t in spans)
    fa = sum(not any(overlaps(a, t) for t in spans) for a in report.anomalies)
    return MatchResult(ta, len(spans) - ta, fa, bool(spans), report.flagged)
