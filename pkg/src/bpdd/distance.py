"""Z-normalized subsequence distance and the dot-product engine behind it.

The distance between subsequences ``u`` and ``v`` of length ``m`` is computed
in correlation form from their dot product ``M[u, v]`` and moving statistics::

    d(u, v) = sqrt(2 m (1 - (M[u, v] - m mu_u mu_v) / (m sigma_u sigma_v)))

Constant subsequences (``sigma <= EPS``) get fixed distances: 0 to another
constant subsequence and ``sqrt(2 m)`` to a varying one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tsdata import ConcatenatedSeries

__all__ = [
    "EPS",
    "clamp_radicand",
    "MovingStats",
    "DotProductRow",
    "moving_stats",
    "znorm_distance",
    "distance_row",
    "fft_sliding_dot",
    "recursive_dot_update",
    "direct_dot_row",
    "brute_force_distance_row",
    "znormalize",
]

EPS = 1e-12
# Squared distances below 2m * RAD_TOL are rounding residue of 1 - corr and
# are reported as exact zeros.
RAD_TOL = 1e-14


def _data(series):
    if isinstance(series, ConcatenatedSeries):
        return series.data
    return np.asarray(series, dtype=float)


@dataclass(frozen=True)
class MovingStats:
    """Per-subsequence mean and population standard deviation."""

    means: np.ndarray
    stds: np.ndarray
    m: int

    @property
    def constant(self) -> np.ndarray:
        return self.stds <= EPS


@dataclass(frozen=True)
class DotProductRow:
    """Dot products of the subsequence at ``query_start`` (1-based) with
    every subsequence of the series."""

    query_start: int
    products: np.ndarray


def moving_stats(series, m: int) -> MovingStats:
    """Moving means and stds from cumulative sums in O(N).

    The series is centred on its global mean before accumulating to limit
    cancellation. Windows without any change between consecutive samples get
    an exact zero std so that frozen segments are recognised as constant.
    """
    x = _data(series)
    L = x.size - m + 1
    if m < 1 or L < 1:
        raise ValueError(f"invalid subsequence length {m} for series of length {x.size}")
    shift = x.mean()
    xc = x - shift
    c1 = np.concatenate(([0.0], np.cumsum(xc)))
    c2 = np.concatenate(([0.0], np.cumsum(xc * xc)))
    s1 = c1[m:] - c1[:-m]
    s2 = c2[m:] - c2[:-m]
    mean_c = s1 / m
    var = np.maximum(s2 / m - mean_c * mean_c, 0.0)
    stds = np.sqrt(var)

    changes = np.concatenate(([0], np.cumsum(np.diff(x) != 0)))
    flat = (changes[m - 1 :] - changes[: L]) == 0
    stds[flat] = 0.0
    means = mean_c + shift
    means[flat] = x[: L][flat]
    return MovingStats(means, stds, m)


def clamp_radicand(rad: float, m: int) -> float:
    """Clip a squared distance into ``[0, 4m]`` and snap rounding residue to 0."""
    if rad <= 2.0 * m * RAD_TOL:
        return 0.0
    return min(rad, 4.0 * m)


def znorm_distance(M_uv: float, stats: MovingStats, u: int, v: int, m: int) -> float:
    """Distance between subsequences ``u`` and ``v`` (1-based) from their dot product."""
    mu_u, mu_v = stats.means[u - 1], stats.means[v - 1]
    sd_u, sd_v = stats.stds[u - 1], stats.stds[v - 1]
    const_u, const_v = sd_u <= EPS, sd_v <= EPS
    if u == v or (const_u and const_v):
        return 0.0
    if const_u or const_v:
        return float(np.sqrt(2.0 * m))
    corr = (M_uv - m * mu_u * mu_v) / (m * sd_u * sd_v)
    return float(np.sqrt(clamp_radicand(2.0 * m * (1.0 - corr), m)))


def _radicand_row(products, stats: MovingStats, u: int, m: int) -> np.ndarray:
    """Squared distances from ``u`` to every ``v``, degenerate rules applied."""
    i = u - 1
    const = stats.constant
    if const[i]:
        return np.where(const, 0.0, 2.0 * m)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = (products - m * stats.means[i] * stats.means) / (m * stats.stds[i] * stats.stds)
    rad = 2.0 * m * (1.0 - corr)
    np.clip(rad, 0.0, 4.0 * m, out=rad)
    rad[rad <= 2.0 * m * RAD_TOL] = 0.0
    rad[i] = 0.0
    rad[const] = 2.0 * m
    return rad


def distance_row(row: DotProductRow, stats: MovingStats, m: int) -> np.ndarray:
    """Vectorised :func:`znorm_distance` over a whole dot-product row."""
    return np.sqrt(_radicand_row(row.products, stats, row.query_start, m))


def fft_sliding_dot(series, query_start: int, m: int) -> DotProductRow:
    """All dot products of one query subsequence via zero-padded FFTs.

    The series is padded with ``N`` zeros and the reversed query with
    ``2N - m`` zeros; the inverse transform of the spectral product holds the
    sliding dot products starting at offset ``m - 1``.
    """
    x = _data(series)
    N = x.size
    L = N - m + 1
    if not 1 <= query_start <= L:
        raise IndexError(f"query start {query_start} outside [1, {L}]")
    i = query_start - 1
    x_p = np.zeros(2 * N)
    x_p[:N] = x
    y_u = np.zeros(2 * N)
    y_u[:m] = x[i : i + m][::-1]
    q = np.fft.irfft(np.fft.rfft(x_p) * np.fft.rfft(y_u), n=2 * N)
    return DotProductRow(query_start, q[m - 1 : m - 1 + L])


def direct_dot_row(series, query_start: int, m: int) -> DotProductRow:
    """O(N m) reference for :func:`fft_sliding_dot`."""
    x = _data(series)
    windows = sliding_window_view(x, m)
    i = query_start - 1
    return DotProductRow(query_start, windows @ x[i : i + m])


def recursive_dot_update(prev_row: DotProductRow, series, m: int) -> DotProductRow:
    """Advance a dot-product row from query ``u`` to ``u + 1``.

    ``M[u+1, v+1] = M[u, v] - x[u] x[v] + x[u+m] x[v+m]``; the first entry has
    no predecessor and is computed directly.
    """
    x = _data(series)
    L = x.size - m + 1
    i = prev_row.query_start - 1  # 0-based u
    if i + 1 >= L:
        raise IndexError(f"no subsequence after start {prev_row.query_start}")
    prev = prev_row.products
    out = np.empty(L)
    out[1:] = prev[:-1] - x[i] * x[: L - 1] + x[i + m] * x[m : m + L - 1]
    out[0] = float(np.dot(x[:m], x[i + 1 : i + 1 + m]))
    return DotProductRow(prev_row.query_start + 1, out)


def znormalize(windows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Explicitly z-normalise rows; returns ``(z, constant_mask)``.

    Constant rows are left as zeros.
    """
    mu = windows.mean(axis=1, keepdims=True)
    centred = windows - mu
    sd = np.sqrt((centred * centred).mean(axis=1))
    flat = np.all(windows == windows[:, :1], axis=1) | (sd <= EPS)
    safe = np.where(flat, 1.0, sd)
    z = centred / safe[:, None]
    z[flat] = 0.0
    return z, flat


def brute_force_distance_row(series, u: int, m: int, _cache=None) -> np.ndarray:
    """Distances from subsequence ``u`` to all others by explicit
    z-normalisation and Euclidean norm. No FFT, no recursion."""
    x = _data(series)
    L = x.size - m + 1
    if not 1 <= u <= L:
        raise IndexError(f"subsequence start {u} outside [1, {L}]")
    z, flat = _cache if _cache is not None else znormalize(sliding_window_view(x, m))
    i = u - 1
    if flat[i]:
        return np.where(flat, 0.0, np.sqrt(2.0 * m))
    diff = z - z[i]
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    d[flat] = np.sqrt(2.0 * m)
    return d
