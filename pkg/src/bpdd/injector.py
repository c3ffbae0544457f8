"""Seeded injection of bad-data scenarios into clean windows."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .exceptions import InjectionError
from .tsdata import MeasurementWindow

__all__ = [
    "Kind",
    "BadDataScenario",
    "TruthLabel",
    "inject",
    "random_bad_data",
    "save_scenarios",
    "load_scenarios",
]


class Kind(str, Enum):
    SPIKE = "spike"
    REPEATED = "repeated"
    FALSE_INJECTION = "false_injection"
    DATA_LOSS_ZERO = "data_loss_zero"


@dataclass(frozen=True)
class BadDataScenario:
    """One injected anomaly. ``channel`` and ``start_sample`` are 1-based.

    ``magnitude`` is the pulse height for spikes and the scale factor applied
    to ``source_segment`` for false injection; other kinds ignore it.
    """

    kind: Kind
    channel: int
    start_sample: int
    span: int
    magnitude: float = 0.0
    source_segment: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.span < 1:
            raise InjectionError(f"span must be >= 1, got {self.span}")
        if not np.isfinite(self.magnitude):
            raise InjectionError("magnitude must be finite")
        if self.source_segment is not None:
            object.__setattr__(self, "source_segment", tuple(float(v) for v in self.source_segment))
        if self.kind is Kind.FALSE_INJECTION and (
            self.source_segment is None or len(self.source_segment) != self.span
        ):
            raise InjectionError("false_injection needs a source_segment of length span")

    @property
    def end_sample(self) -> int:
        return self.start_sample + self.span - 1

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "channel": self.channel,
            "start_sample": self.start_sample,
            "span": self.span,
            "magnitude": self.magnitude,
            "source_segment": None if self.source_segment is None else list(self.source_segment),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> BadDataScenario:
        return cls(**d)


@dataclass(frozen=True)
class TruthLabel:
    channel_id: str
    start: int
    end: int
    kind: str

    def to_dict(self) -> dict:
        return {"channel": self.channel_id, "start": self.start, "end": self.end, "kind": self.kind}


def inject(
    window: MeasurementWindow, scenario: BadDataScenario
) -> tuple[MeasurementWindow, list[TruthLabel]]:
    """Apply one scenario; samples outside its span are left untouched."""
    sc = scenario
    if not 1 <= sc.channel <= window.n_b:
        raise InjectionError(f"channel {sc.channel} outside [1, {window.n_b}]")
    if not (1 <= sc.start_sample and sc.end_sample <= window.n):
        raise InjectionError(
            f"span [{sc.start_sample}, {sc.end_sample}] outside [1, {window.n}]"
        )
    values = window.values.copy()
    row = values[sc.channel - 1]
    span = slice(sc.start_sample - 1, sc.end_sample)
    if sc.kind is Kind.SPIKE:
        row[span] += sc.magnitude
    elif sc.kind is Kind.REPEATED:
        row[span] = row[max(sc.start_sample - 2, 0)]
    elif sc.kind is Kind.FALSE_INJECTION:
        row[span] = np.asarray(sc.source_segment) * sc.magnitude
    else:
        row[span] = 0.0
    label = TruthLabel(window.channel_ids[sc.channel - 1], sc.start_sample, sc.end_sample, sc.kind.value)
    return window.replace_values(values), [label]


def random_bad_data(
    rng,
    window: MeasurementWindow,
    kind: Kind | str,
    library=None,
    region: tuple[int, int] | None = None,
) -> BadDataScenario:
    """Draw a scenario of ``kind`` for ``window``.

    Spikes last 1-3 samples with amplitude drawn from +/-[0.05, 0.5];
    repeated spans last 20-100 samples; false injections copy 50-150 samples
    of a library recording. Spans never exceed the window length. ``region``
    restricts the 1-based start sample.
    """
    kind = Kind(kind)
    n = window.n
    channel = int(rng.integers(1, window.n_b + 1))
    seed = int(rng.integers(2**31))
    if kind is Kind.SPIKE:
        span = int(rng.integers(1, 4))
    elif kind is Kind.REPEATED:
        span = int(rng.integers(20, 101))
    elif kind is Kind.FALSE_INJECTION:
        span = int(rng.integers(50, 151))
    else:
        span = int(rng.integers(1, 21))
    span = min(span, n)
    lo, hi = region or (1, n)
    hi = min(hi, n - span + 1)
    lo = min(max(lo, 1), hi)
    start = int(rng.integers(lo, hi + 1))
    magnitude, segment = 0.0, None
    if kind is Kind.SPIKE:
        magnitude = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.05, 0.5))
    elif kind is Kind.FALSE_INJECTION:
        if not library:
            raise InjectionError("false_injection needs a non-empty segment library")
        src = np.asarray(library[int(rng.integers(len(library)))])
        if src.size < span:
            raise InjectionError(f"library segment shorter than span {span}")
        offset = int(rng.integers(0, src.size - span + 1))
        segment = src[offset : offset + span]
        magnitude = 1.0
    return BadDataScenario(kind, channel, start, span, magnitude, segment, seed)


def save_scenarios(scenarios, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps([s.to_dict() for s in scenarios], indent=2), encoding="utf-8")
    return path


def load_scenarios(path) -> list[BadDataScenario]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = [data]
    return [BadDataScenario.from_dict(d) for d in data]
