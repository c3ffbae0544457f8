"""Synthetic grid-like multi-channel measurements.

Every channel shares the same underlying dynamics (an ambient load
fluctuation plus fault-like dips with damped ring-down) scaled by a
per-channel gain, so channels are strongly but not perfectly correlated.
Independent Gaussian measurement noise is added to the noisy copy only.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import ParameterError
from .tsdata import MeasurementWindow

# (frequency Hz, damping ratio) of the resonators shaping ambient fluctuation
AMBIENT_MODES = ((0.5, 0.3), (1.2, 0.3), (2.5, 0.3), (4.0, 0.3))

__all__ = ["Event", "GridScenario", "generate", "random_scenario", "event_library"]


@dataclass(frozen=True)
class Event:
    """A fault-like dip starting at ``onset_sample`` (1-based)."""

    onset_sample: int
    depth: float = 0.2
    duration_samples: int = 10
    ringdown_freq: float = 1.2
    ringdown_damping: float = 0.6


@dataclass(frozen=True)
class GridScenario:
    n_b: int = 5
    n: int = 500
    dt: float = 0.01
    coupling: float = 0.9
    noise_std: float = 0.001
    events: tuple = ()
    seed: int = 0
    ambient_std: float = 0.03
    t0: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.coupling <= 1.0:
            raise ParameterError(f"coupling must lie in [0, 1], got {self.coupling}")
        if self.noise_std < 0 or self.ambient_std < 0:
            raise ParameterError("noise_std and ambient_std must be non-negative")
        events = tuple(e if isinstance(e, Event) else Event(**e) for e in self.events)
        for e in events:
            if not 1 <= e.onset_sample <= self.n:
                raise ParameterError(f"event onset {e.onset_sample} outside [1, {self.n}]")
        object.__setattr__(self, "events", events)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["events"] = [asdict(e) for e in self.events]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> GridScenario:
        return cls(**d)


def _event_response(event: Event, t: np.ndarray, dt: float) -> np.ndarray:
    """Deviation from 1.0 caused by one event, for times ``t`` in seconds."""
    onset = (event.onset_sample - 1) * dt
    clear = onset + event.duration_samples * dt
    r = np.zeros_like(t)
    fault = (t >= onset) & (t < clear)
    r[fault] = -event.depth
    after = t >= clear
    tau = t[after] - clear
    decay = np.exp(-event.ringdown_damping * tau)
    w = 2.0 * np.pi * event.ringdown_freq
    # post-clearing: partial recovery settling to a small offset, plus ringing
    r[after] = (
        -0.1 * event.depth * (1.0 - np.exp(-2.0 * tau))
        - 0.4 * event.depth * decay * np.cos(w * tau)
    )
    return r


def _ambient(rng, n, dt, std, modes=None):
    """Shared ambient response: white excitation through damped
    second-order resonators ``(freq_hz, damping_ratio)``, scaled to ``std``."""
    if std == 0:
        return np.zeros(n)
    modes = modes or AMBIENT_MODES
    burn = int(20.0 / dt)
    out = np.zeros(n + burn)
    for f, zeta in modes:
        w = 2.0 * np.pi * f
        r = np.exp(-zeta * w * dt)
        a1, a2 = 2.0 * r * np.cos(w * np.sqrt(1.0 - zeta**2) * dt), -r * r
        e = rng.standard_normal(n + burn)
        y = np.zeros(n + burn)
        for k in range(2, n + burn):
            y[k] = a1 * y[k - 1] + a2 * y[k - 2] + e[k]
        out += y / y[burn:].std()
    out = out[burn:]
    return out * (std / out.std())


def generate(scenario: GridScenario) -> tuple[MeasurementWindow, MeasurementWindow]:
    """Return ``(clean, noisy)`` windows for a scenario."""
    sc = scenario
    rng = np.random.default_rng(sc.seed)
    t = np.arange(sc.n) * sc.dt
    gains = sc.coupling + (1.0 - sc.coupling) * rng.uniform(0.8, 1.2, sc.n_b)
    ambient = _ambient(rng, sc.n, sc.dt, sc.ambient_std)

    shared = ambient + sum((_event_response(e, t, sc.dt) for e in sc.events), np.zeros(sc.n))
    clean = 1.0 + gains[:, None] * shared[None, :]
    noisy = clean + rng.normal(0.0, sc.noise_std, clean.shape) if sc.noise_std else clean
    ids = tuple(f"ch{i + 1}" for i in range(sc.n_b))
    return (
        MeasurementWindow(clean, sc.dt, ids, sc.t0),
        MeasurementWindow(noisy, sc.dt, ids, sc.t0),
    )


def random_event(rng, n: int, dt: float, onset_range=None) -> Event:
    lo, hi = onset_range or (n // 5, n // 2)
    return Event(
        onset_sample=int(rng.integers(lo, hi + 1)),
        depth=float(rng.uniform(0.05, 0.3)),
        duration_samples=int(rng.integers(5, 16)),
        ringdown_freq=float(rng.uniform(0.8, 2.0)),
        ringdown_damping=float(rng.uniform(0.3, 1.0)),
    )


def random_scenario(
    rng,
    n_b: int = 5,
    n: int = 500,
    dt: float = 0.01,
    coupling: float = 0.9,
    noise_std: float = 0.001,
    with_event: bool = True,
    ambient_std: float = 0.03,
) -> GridScenario:
    """Draw a scenario with at most one event from ``rng``."""
    events = (random_event(rng, n, dt),) if with_event else ()
    return GridScenario(
        n_b, n, dt, coupling, noise_std, events, int(rng.integers(2**31)), ambient_std
    )


def event_library(count: int = 16, length: int = 200, dt: float = 0.01, seed: int = 12345):
    """Single-channel recordings of past events, used as false-injection sources.

    Each entry is the post-clearing oscillation of a clean event response
    around 1.0, ``length`` samples long.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        e = random_event(rng, length, dt, onset_range=(1, 1))
        e = Event(1, e.depth, e.duration_samples, e.ringdown_freq, e.ringdown_damping)
        t = np.arange(length + e.duration_samples) * dt
        r = _event_response(e, t, dt)
        out.append(1.0 + r[e.duration_samples :])
    return out
