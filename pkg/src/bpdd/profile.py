"""Nearest-neighbor self-join profile over a concatenated series."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .distance import (
    brute_force_distance_row,
    clamp_radicand,
    fft_sliding_dot,
    moving_stats,
    znormalize,
)
from .exceptions import ParameterError, ProfileUndefinedError
from .tsdata import ConcatenatedSeries, boundary_mask

__all__ = [
    "BoundaryPolicy",
    "StnnProfile",
    "compute_profile",
    "self_join_oracle",
    "admissible_mask",
]


class BoundaryPolicy(str, Enum):
    INCLUDE = "include"
    EXCLUDE = "exclude"


@dataclass(frozen=True)
class StnnProfile:
    """Nearest-neighbor distance for every subsequence start.

    Positions that were not evaluated hold ``NaN`` in ``values`` and ``-1`` in
    ``neighbor_index``. Indices in ``neighbor_index`` are 1-based.
    """

    values: np.ndarray
    neighbor_index: np.ndarray
    m: int
    exclusion_halfwidth: int
    boundary_policy: BoundaryPolicy
    spans_boundary: np.ndarray
    series: ConcatenatedSeries

    @property
    def evaluated(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def __len__(self):
        return self.values.size

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "p_nn", "neighbor", "spans_boundary"])
        for u, (p, nb, sb) in enumerate(
            zip(self.values, self.neighbor_index, self.spans_boundary), start=1
        ):
            w.writerow([u, "" if np.isnan(p) else repr(float(p)), int(nb), int(sb)])
        return buf.getvalue()


def _check(series, m, exclusion_halfwidth, boundary_policy):
    N = series.N
    if not 3 <= m <= N:
        raise ParameterError(f"subsequence length m={m} outside [3, {N}]")
    if exclusion_halfwidth < 0:
        raise ParameterError(f"exclusion_halfwidth must be >= 0, got {exclusion_halfwidth}")
    if N - m + 1 < 2:
        raise ProfileUndefinedError(f"only {N - m + 1} subsequence(s); no neighbor exists")
    return BoundaryPolicy(boundary_policy)


def admissible_mask(u: int, L: int, exclusion_halfwidth: int, blocked: np.ndarray) -> np.ndarray:
    """Candidates ``v`` admissible as neighbors of ``u`` (1-based ``u``).

    ``blocked`` marks positions that may never be neighbors (boundary-spanning
    subsequences under the exclude policy).
    """
    ok = ~blocked.copy()
    i = u - 1
    ok[max(0, i - exclusion_halfwidth) : i + exclusion_halfwidth + 1] = False
    return ok


def _setup(series, m, exclusion_halfwidth, boundary_policy):
    policy = _check(series, m, exclusion_halfwidth, boundary_policy)
    spans = boundary_mask(series, m)
    blocked = spans if policy is BoundaryPolicy.EXCLUDE else np.zeros_like(spans)
    return policy, spans, blocked


def _record(values, neighbors, i, rad, ok):
    if not ok.any():
        return
    rad = np.where(ok, rad, np.inf)
    j = int(np.argmin(rad))  # first occurrence: ties go to the smallest v
    values[i] = np.sqrt(rad[j])
    neighbors[i] = j + 1


def compute_profile(
    series: ConcatenatedSeries,
    m: int,
    exclusion_halfwidth: int = 0,
    boundary_policy: BoundaryPolicy | str = BoundaryPolicy.INCLUDE,
) -> StnnProfile:
    """Fast self-join profile.

    The first dot-product row comes from :func:`fft_sliding_dot`; every later
    row is derived from its predecessor by the same recurrence as
    :func:`~bpdd.distance.recursive_dot_update`, applied in place.
    """
    policy, spans, blocked = _setup(series, m, exclusion_halfwidth, boundary_policy)
    # Distances are shift invariant; centring first keeps M - m*mu_u*mu_v from
    # cancelling catastrophically when the series sits far from zero.
    x = series.data - series.data.mean()
    L = series.N - m + 1
    stats = moving_stats(x, m)
    const = stats.constant
    inv_sd = np.zeros(L)
    np.divide(1.0, stats.stds, out=inv_sd, where=~const)
    mu = stats.means
    penalty = np.where(blocked, -np.inf, 0.0) if blocked.any() else None
    values = np.full(L, np.nan)
    neighbors = np.full(L, -1, dtype=np.int64)

    # Neighbors minimise distance, i.e. maximise correlation. For a varying
    # query, inv_sd = 0 at constant candidates gives them correlation 0, which
    # is exactly the sqrt(2m) rule.
    prev = fft_sliding_dot(x, 1, m).products.copy()
    cur = np.empty(L)
    tmp = np.empty(L - 1)
    corr = np.empty(L)
    head, tail = x[: L - 1], x[m : m + L - 1]
    for i in range(L):
        if i:
            # in-place form of recursive_dot_update
            np.multiply(head, x[i - 1], out=tmp)
            np.subtract(prev[:-1], tmp, out=cur[1:])
            np.multiply(tail, x[i - 1 + m], out=tmp)
            np.add(cur[1:], tmp, out=cur[1:])
            cur[0] = np.dot(x[:m], x[i : i + m])
            prev, cur = cur, prev
        if blocked[i]:
            continue
        if const[i]:
            rad = np.where(const, 0.0, 2.0 * m)
            _record(values, neighbors, i, rad, admissible_mask(i + 1, L, exclusion_halfwidth, blocked))
            continue
        np.multiply(mu, -mu[i] * m, out=corr)
        corr += prev
        corr *= inv_sd
        np.minimum(corr, m * stats.stds[i], out=corr)  # clamp correlation at 1
        if penalty is not None:
            corr += penalty
        corr[max(0, i - exclusion_halfwidth) : i + exclusion_halfwidth + 1] = -np.inf
        j = int(np.argmax(corr))
        if corr[j] == -np.inf:
            continue
        r = corr[j] * inv_sd[i] / m
        values[i] = np.sqrt(clamp_radicand(2.0 * m * (1.0 - r), m))
        neighbors[i] = j + 1
    return StnnProfile(values, neighbors, m, exclusion_halfwidth, policy, spans, series)


def self_join_oracle(
    series: ConcatenatedSeries,
    m: int,
    exclusion_halfwidth: int = 0,
    boundary_policy: BoundaryPolicy | str = BoundaryPolicy.INCLUDE,
) -> StnnProfile:
    """Brute-force profile: explicit z-normalisation and pairwise Euclidean
    distances for every query. Quadratic in ``N`` times ``m``; for tests and
    benchmarks."""
    policy, spans, blocked = _setup(series, m, exclusion_halfwidth, boundary_policy)
    L = series.N - m + 1
    cache = znormalize(sliding_window_view(series.data, m))
    values = np.full(L, np.nan)
    neighbors = np.full(L, -1, dtype=np.int64)
    for u in range(1, L + 1):
        if blocked[u - 1]:
            continue
        d = brute_force_distance_row(series, u, m, _cache=cache)
        _record(values, neighbors, u - 1, d * d, admissible_mask(u, L, exclusion_halfwidth, blocked))
    return StnnProfile(values, neighbors, m, exclusion_halfwidth, policy, spans, series)
