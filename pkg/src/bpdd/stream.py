"""Sliding observation windows over a continuous multi-channel feed."""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .detector import DetectionConfig, DetectionReport, detect
from .exceptions import ParameterError, StructuralInputError
from .profile import BoundaryPolicy, compute_profile
from .tsdata import concatenate, ingest_window, normalize_per_channel, robust_reference

log = logging.getLogger(__name__)

__all__ = ["StreamConfig", "Alert", "StreamResult", "run_stream", "merge_alerts", "iter_csv_rows"]


@dataclass(frozen=True)
class StreamConfig:
    """Window geometry and detector settings for streaming operation.

    ``normalization`` is ``"window-head"`` (median of each window's first 10 %),
    ``"none"``, or a sequence of fixed per-channel references.
    """

    window_seconds: float = 5.0
    step_seconds: float = 0.5
    m_fraction: float = 0.1
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    normalization: object = "window-head"
    exclusion_halfwidth: int = 0
    boundary_policy: BoundaryPolicy = BoundaryPolicy.INCLUDE

    def __post_init__(self):
        if not 0 < self.step_seconds <= self.window_seconds:
            raise ParameterError(
                f"need 0 < step_seconds <= window_seconds, got {self.step_seconds}, {self.window_seconds}"
            )
        if not 0 < self.m_fraction <= 1:
            raise ParameterError(f"m_fraction must lie in (0, 1], got {self.m_fraction}")

    def geometry(self, dt: float) -> tuple[int, int, int]:
        """Samples per window, samples per step and subsequence length."""
        n = int(round(self.window_seconds / dt))
        step = max(1, int(round(self.step_seconds / dt)))
        m = int(math.floor(n * self.m_fraction))
        if m < 3:
            raise ParameterError(f"derived subsequence length {m} < 3")
        return n, step, m


@dataclass
class Alert:
    """One physical anomaly, possibly seen by several overlapping windows.

    ``locations`` hold ``(channel_id, first_sample, last_sample)`` in absolute
    1-based sample numbers of the feed.
    """

    locations: list
    first_seen: float
    peak_value: float
    windows: list

    def key(self):
        return (tuple(self.locations), self.first_seen, self.peak_value, tuple(self.windows))


def _overlap_ok(a, b, frac=0.5):
    (ca, sa, ea), (cb, sb, eb) = a, b
    if ca != cb:
        return False
    inter = min(ea, eb) - max(sa, sb) + 1
    return inter > 0 and inter >= frac * min(ea - sa + 1, eb - sb + 1)


def _same(a: Alert, b: Alert) -> bool:
    return any(_overlap_ok(x, y) for x in a.locations for y in b.locations)


def _absorb(into: Alert, other: Alert):
    locs = {}
    for c, s, e in into.locations + other.locations:
        locs.setdefault(c, []).append((s, e))
    merged = []
    for c, spans in locs.items():
        spans.sort()
        cur = list(spans[0])
        for s, e in spans[1:]:
            if s <= cur[1] + 1:
                cur[1] = max(cur[1], e)
            else:
                merged.append((c, *cur))
                cur = [s, e]
        merged.append((c, *cur))
    into.locations = sorted(merged, key=lambda x: (x[1], x[0]))
    into.first_seen = min(into.first_seen, other.first_seen)
    into.peak_value = max(into.peak_value, other.peak_value)
    into.windows = sorted(set(into.windows) | set(other.windows))


def merge_alerts(alerts: Sequence[Alert]) -> list[Alert]:
    """Merge alerts that share a channel with at least 50 % span overlap.

    Applying it to its own output changes nothing.
    """
    out: list[Alert] = []
    for a in alerts:
        a = Alert(list(a.locations), a.first_seen, a.peak_value, list(a.windows))
        changed = True
        while changed:
            changed = False
            for b in out:
                if _same(a, b):
                    out.remove(b)
                    _absorb(a, b)
                    changed = True
                    break
        out.append(a)
    return sorted(out, key=lambda x: (x.first_seen, x.locations[0][1]))


@dataclass
class StreamResult:
    reports: list[DetectionReport]
    alerts: list[Alert]
    window_starts: list[float]


def _reference(window, policy):
    if isinstance(policy, str):
        if policy == "none":
            return None
        if policy != "window-head":
            raise ParameterError(f"unknown normalization policy {policy!r}")
        return robust_reference(window)
    return np.asarray(policy, dtype=float)


def _regularise(source, dt, tol=0.01):
    """Drop late or duplicate rows and fill gaps with NaN rows."""
    last_t = None
    width = None
    for t, vals in source:
        t = float(t)
        vals = list(vals)
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise StructuralInputError(f"row at t={t} has {len(vals)} values, expected {width}")
        if last_t is not None:
            gap = t - last_t
            if gap < (1 - tol) * dt:
                log.warning("dropping late or duplicate sample at t=%s", t)
                continue
            missing = int(round(gap / dt)) - 1
            for k in range(1, missing + 1):
                yield last_t + k * dt, [math.nan] * width
            if missing > 0:
                log.warning("filled %d missing sample(s) before t=%s", missing, t)
        last_t = t
        yield t, vals


def run_stream(
    source: Iterable[tuple[float, Sequence[float]]],
    config: StreamConfig | None = None,
    dt: float = 0.01,
    channel_ids: Sequence[str] | None = None,
    on_report=None,
) -> StreamResult:
    """Slide the observation window over ``source`` and detect in each window.

    ``on_report(report, alerts)`` is called after every window, which lets a
    live caller emit results as they arrive.
    """
    config = config or StreamConfig()
    n, step, m = config.geometry(dt)
    buf: deque = deque(maxlen=n)
    reports, starts, alerts = [], [], []
    count = 0
    for t, vals in _regularise(source, dt):
        buf.append((t, vals))
        count += 1
        if count < n or (count - n) % step:
            continue
        first_sample = count - n + 1
        window = ingest_window(list(buf), dt, channel_ids, m=m)
        ref = _reference(window, config.normalization)
        if ref is not None:
            window = normalize_per_channel(window, ref)
        series = concatenate(window)
        profile = compute_profile(series, m, config.exclusion_halfwidth, config.boundary_policy)
        report = detect(profile, config.detection, window_id=len(reports))
        reports.append(report)
        starts.append(window.t0)
        seen_at = window.t0 + (n - 1) * dt
        new = [
            Alert(
                [(c, first_sample + s - 1, first_sample + e - 1) for c, (s, e) in a.channel_locations],
                seen_at,
                a.peak_value,
                [report.window_id],
            )
            for a in report.anomalies
        ]
        alerts = merge_alerts(alerts + new)
        if on_report is not None:
            on_report(report, alerts)
    return StreamResult(reports, alerts, starts)


def iter_csv_rows(lines: Iterable[str]) -> tuple[list[str], Iterator[tuple[float, list[float]]]]:
    """Parse ``t,<ch1>,...`` lines lazily, e.g. from stdin.

    Returns the channel ids from the header and an iterator over rows.
    """
    it = iter(lines)
    header = next(it, None)
    if header is None or header.split(",")[0].strip().lower() != "t":
        raise StructuralInputError("missing 't,<ch1>,...' header", line=1)
    ids = [h.strip() for h in header.strip().split(",")[1:]]
    width = len(ids) + 1

    def rows():
        for lineno, line in enumerate(it, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != width:
                raise StructuralInputError(f"expected {width} fields, got {len(cells)}", line=lineno)
            try:
                yield float(cells[0]), [float(c) if c.strip() else math.nan for c in cells[1:]]
            except ValueError as exc:
                raise StructuralInputError(str(exc), line=lineno) from None

    return ids, rows()
