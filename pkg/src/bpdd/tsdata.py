"""Measurement windows, per-channel normalization and the flat series layout.

All sample, flat and channel coordinates exposed by this module are 1-based.
Internally arrays are indexed from 0; conversion happens at the edges.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DegenerateReferenceError, StructuralInputError, WindowSizeError

__all__ = [
    "MeasurementWindow",
    "ConcatenatedSeries",
    "SubsequenceRef",
    "ingest_window",
    "normalize_per_channel",
    "default_reference",
    "robust_reference",
    "concatenate",
    "locate",
    "subsequence",
    "boundary_mask",
    "read_csv",
    "write_csv",
]

MIN_SUBSEQUENCE = 3
DT_RTOL = 0.01


@dataclass(frozen=True)
class MeasurementWindow:
    """One observation window of ``n_b`` channels by ``n`` samples.

    ``pre_flags`` lists ``(channel_id, sample)`` cells that were missing at
    ingestion and have been zero-filled.
    """

    values: np.ndarray
    dt: float
    channel_ids: tuple = ()
    t0: float = 0.0
    pre_flags: tuple = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise StructuralInputError(f"values must be 2-D, got shape {values.shape}")
        if not self.dt > 0:
            raise WindowSizeError(f"dt must be positive, got {self.dt}")
        if np.isnan(values).any():
            raise StructuralInputError("values contain NaN; use ingest_window to zero-fill")
        ids = tuple(self.channel_ids) or tuple(f"ch{i + 1}" for i in range(values.shape[0]))
        if len(ids) != values.shape[0]:
            raise StructuralInputError(
                f"{len(ids)} channel ids for {values.shape[0]} channels"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "channel_ids", ids)
        object.__setattr__(self, "pre_flags", tuple(tuple(p) for p in self.pre_flags))

    @property
    def n_b(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def duration(self) -> float:
        return self.n * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    def replace_values(self, values, pre_flags=None) -> MeasurementWindow:
        return MeasurementWindow(
            values,
            self.dt,
            self.channel_ids,
            self.t0,
            self.pre_flags if pre_flags is None else pre_flags,
        )


@dataclass(frozen=True)
class ConcatenatedSeries:
    """Row-major flattening of a window into a single series of length ``N``."""

    data: np.ndarray
    n: int
    n_b: int
    channel_ids: tuple = ()
    pre_flags: tuple = ()
    boundary_positions: tuple = field(init=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=float).ravel()
        if data.size != self.n * self.n_b:
            raise StructuralInputError(
                f"series length {data.size} != n_b*n = {self.n_b * self.n}"
            )
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        ids = tuple(self.channel_ids) or tuple(f"ch{i + 1}" for i in range(self.n_b))
        object.__setattr__(self, "channel_ids", ids)
        object.__setattr__(
            self, "boundary_positions", tuple(i * self.n + 1 for i in range(1, self.n_b))
        )

    @property
    def N(self) -> int:
        return self.data.size

    def to_channel(self, k: int) -> tuple[int, int]:
        """Map flat index ``k`` to ``(channel, sample)``; all 1-based."""
        if not 1 <= k <= self.N:
            raise IndexError(f"flat index {k} outside [1, {self.N}]")
        i = math.ceil(k / self.n)
        return i, k - (i - 1) * self.n

    def to_flat(self, channel: int, sample: int) -> int:
        if not (1 <= channel <= self.n_b and 1 <= sample <= self.n):
            raise IndexError(f"({channel}, {sample}) outside {self.n_b}x{self.n} window")
        return (channel - 1) * self.n + sample

    def pre_flag_positions(self) -> np.ndarray:
        """Flat 1-based positions of zero-filled cells."""
        index = {cid: i + 1 for i, cid in enumerate(self.channel_ids)}
        return np.array(
            sorted(self.to_flat(index[c], s) for c, s in self.pre_flags), dtype=int
        )


@dataclass(frozen=True)
class SubsequenceRef:
    start: int
    length: int
    spans_boundary: bool


def _size_check(n_b, n, m):
    if n_b < 2:
        raise WindowSizeError(f"need at least 2 channels, got {n_b}")
    if n < max(m, 1):
        raise WindowSizeError(f"need at least {m} samples per channel, got {n}")


def ingest_window(
    rows: Iterable[tuple[float, Sequence[float]]],
    dt: float,
    channel_ids: Sequence[str] | None = None,
    m: int = MIN_SUBSEQUENCE,
) -> MeasurementWindow:
    """Build a window from ``(timestamp, values)`` rows.

    Missing cells (NaN or None) are replaced by 0 and recorded as pre-flags.
    Timestamps must increase with spacing ``dt`` to within 1 %.
    """
    rows = list(rows)
    if not rows:
        raise WindowSizeError("no rows supplied")
    width = len(rows[0][1])
    times = np.empty(len(rows))
    values = np.empty((len(rows), width))
    for r, (t, vals) in enumerate(rows):
        if len(vals) != width:
            raise StructuralInputError(
                f"row {r + 1} has {len(vals)} values, expected {width}", line=None
            )
        times[r] = float(t)
        values[r] = [np.nan if v is None else float(v) for v in vals]
    if len(rows) > 1:
        gaps = np.diff(times)
        bad = np.flatnonzero(np.abs(gaps - dt) > DT_RTOL * dt)
        if bad.size:
            r = bad[0]
            raise StructuralInputError(
                f"timestamp spacing {gaps[r]:g} between rows {r + 1} and {r + 2} "
                f"does not match dt={dt:g}"
            )
    values = values.T
    _size_check(values.shape[0], values.shape[1], m)
    ids = tuple(channel_ids) if channel_ids else tuple(f"ch{i + 1}" for i in range(width))
    missing = ~np.isfinite(values)
    flags = tuple((ids[i], j + 1) for i, j in zip(*np.nonzero(missing)))
    values[missing] = 0.0
    return MeasurementWindow(values, dt, ids, float(times[0]), flags)


def default_reference(window: MeasurementWindow) -> np.ndarray:
    """Median of the first 10 % of each channel (at least one sample)."""
    head = max(1, window.n // 10)
    return np.median(window.values[:, :head], axis=1)


def robust_reference(window: MeasurementWindow) -> np.ndarray:
    """Head median that ignores zero-filled and exactly-zero cells.

    Falls back to the rest of the channel, then to 1.0, so a data-loss run at
    the start of a window cannot make the reference vanish.
    """
    head = max(1, window.n // 10)
    bad = window.values == 0
    index = {c: i for i, c in enumerate(window.channel_ids)}
    for c, j in window.pre_flags:
        bad[index[c], j - 1] = True
    ref = np.ones(window.n_b)
    for i in range(window.n_b):
        for part in (slice(0, head), slice(0, window.n)):
            good = window.values[i, part][~bad[i, part]]
            if good.size:
                ref[i] = np.median(good)
                break
    return ref


def normalize_per_channel(
    window: MeasurementWindow, reference: Sequence[float] | None = None
) -> MeasurementWindow:
    """Divide every channel by its steady-state reference value."""
    ref = default_reference(window) if reference is None else np.asarray(reference, float)
    if ref.shape != (window.n_b,):
        raise StructuralInputError(f"expected {window.n_b} reference values, got {ref.shape}")
    for cid, r in zip(window.channel_ids, ref):
        if r == 0 or not np.isfinite(r):
            raise DegenerateReferenceError(cid)
    return window.replace_values(window.values / ref[:, None])


def concatenate(window: MeasurementWindow) -> ConcatenatedSeries:
    return ConcatenatedSeries(
        window.values.reshape(-1), window.n, window.n_b, window.channel_ids, window.pre_flags
    )


def locate(
    flat_range: tuple[int, int], series: ConcatenatedSeries
) -> list[tuple[str, tuple[int, int]]]:
    """Split a flat 1-based inclusive range into per-channel sample ranges.

    >>> s = ConcatenatedSeries(np.zeros(10), 5, 2)
    >>> locate((4, 7), s)
    [('ch1', (4, 5)), ('ch2', (1, 2))]
    """
    start, end = flat_range
    if not 1 <= start <= end <= series.N:
        raise IndexError(f"range {flat_range} outside [1, {series.N}]")
    pieces = []
    k = start
    while k <= end:
        i, j = series.to_channel(k)
        stop = min(end, i * series.n)
        pieces.append((series.channel_ids[i - 1], (j, j + stop - k)))
        k = stop + 1
    return pieces


def boundary_mask(series: ConcatenatedSeries, m: int) -> np.ndarray:
    """Boolean mask over the ``N - m + 1`` start positions, True where the
    subsequence crosses a channel boundary."""
    L = series.N - m + 1
    starts = np.arange(L)
    # 0-based start s crosses iff s // n != (s + m - 1) // n
    return (starts // series.n) != ((starts + m - 1) // series.n)


def subsequence(series: ConcatenatedSeries, u: int, m: int) -> SubsequenceRef:
    if not 1 <= u <= series.N - m + 1:
        raise IndexError(f"subsequence start {u} outside [1, {series.N - m + 1}]")
    crosses = (u - 1) // series.n != (u + m - 2) // series.n
    return SubsequenceRef(u, m, bool(crosses))


# ---------------------------------------------------------------- CSV i/o


def _parse_rows(handle, source="<stream>"):
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise StructuralInputError(f"{source}: empty file", line=1) from None
    header = [h.strip() for h in header]
    if len(header) < 2 or header[0].lower() != "t":
        raise StructuralInputError(f"{source}: header must be 't,<ch1>,...'", line=1)
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) != len(header):
            raise StructuralInputError(
                f"{source}: expected {len(header)} fields, got {len(rec)}", line=lineno
            )
        try:
            t = float(rec[0])
            vals = [float(c) if c.strip() else math.nan for c in rec[1:]]
        except ValueError as exc:
            raise StructuralInputError(f"{source}: {exc}", line=lineno) from None
        rows.append((t, vals))
    return header[1:], rows


def read_rows(path) -> tuple[list[str], list[tuple[float, list[float]]]]:
    """Read the ``t,<ch1>,...`` CSV into channel ids and raw rows."""
    with open(path, newline="", encoding="utf-8") as fh:
        return _parse_rows(fh, str(path))


def read_csv(path, dt: float | None = None, m: int = MIN_SUBSEQUENCE) -> MeasurementWindow:
    """Load a window from CSV. ``dt`` defaults to the median timestamp spacing."""
    ids, rows = read_rows(path)
    if len(rows) < 2 and dt is None:
        raise WindowSizeError("cannot infer dt from fewer than two rows")
    if dt is None:
        dt = float(np.median(np.diff([r[0] for r in rows])))
    return ingest_window(rows, dt, ids, m=m)


def format_csv(window: MeasurementWindow) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", *window.channel_ids])
    for t, col in zip(window.times, window.values.T):
        writer.writerow([f"{t:.6f}", *(repr(float(v)) for v in col)])
    return buf.getvalue()


def write_csv(window: MeasurementWindow, path) -> Path:
    path = Path(path)
    path.write_text(format_csv(window), encoding="utf-8")
    return path
