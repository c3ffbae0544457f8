import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpdd.distance import (
    DotProductRow,
    brute_force_distance_row,
    direct_dot_row,
    distance_row,
    fft_sliding_dot,
    moving_stats,
    recursive_dot_update,
    znorm_distance,
)

from conftest import make_series, naive_znorm_distance


def _dist(x, u, v, m):
    stats = moving_stats(x, m)
    M = float(np.dot(x[u - 1 : u - 1 + m], x[v - 1 : v - 1 + m]))
    return znorm_distance(M, stats, u, v, m)


def _naive_dots(x, u, m):
    q = x[u - 1 : u - 1 + m]
    return [sum(q[k] * x[v + k] for k in range(m)) for v in range(len(x) - m + 1)]


class TestZnormDistance:
    def test_identical_subsequences(self):
        x = np.array([0.3, 1.2, -0.7, 2.0, 0.3, 1.2, -0.7, 2.0])
        assert _dist(x, 1, 5, 4) == 0.0

    def test_anticorrelated_pair(self):
        x = np.array([0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0])
        assert _dist(x, 1, 5, 4) == 4.0

    def test_matches_explicit_znorm(self, rng):
        series = make_series(rng.normal(size=(2, 100)))
        x, m = series.data, 16
        for _ in range(25):
            u, v = rng.integers(1, x.size - m + 2, size=2)
            expected = naive_znorm_distance(x[u - 1 : u - 1 + m].tolist(), x[v - 1 : v - 1 + m].tolist())
            assert abs(_dist(x, u, v, m) - expected) <= 1e-9

    def test_both_constant(self):
        x = np.array([2.0] * 10)
        assert _dist(x, 1, 5, 4) == 0.0

    def test_one_constant(self):
        x = np.array([2.0, 2.0, 2.0, 2.0, 1.0, 3.0, 0.5, 4.0])
        assert _dist(x, 1, 5, 4) == math.sqrt(8)
        assert _dist(x, 5, 1, 4) == math.sqrt(8)


class TestFftSlidingDot:
    def test_hand_convolution(self):
        row = fft_sliding_dot(np.array([1.0, 1.0, 3.0, 4.0]), 1, 2)
        assert np.allclose(row.products, [2.0, 4.0, 7.0], atol=1e-12)

    def test_query_of_ones(self):
        # query [1, 1] slid along [1, 2, 3, 4] sums neighbouring pairs
        x = np.array([1.0, 2.0, 3.0, 4.0])
        row = fft_sliding_dot(np.array([1.0, 1.0, 1.0, 2.0, 3.0, 4.0]), 1, 2)
        assert np.allclose(row.products[2:], [3.0, 5.0, 7.0], atol=1e-12)
        assert np.allclose(direct_dot_row(x, 1, 2).products, [5.0, 8.0, 11.0])

    def test_self_product_is_sum_of_squares(self, rng):
        x = rng.normal(size=300)
        for u in (1, 57, 285):
            row = fft_sliding_dot(x, u, 16)
            assert abs(row.products[u - 1] - np.sum(x[u - 1 : u + 15] ** 2)) <= 1e-9

    def test_matches_direct_loop(self, rng):
        x = rng.normal(size=256)
        for u in (1, 100, 241):
            row = fft_sliding_dot(x, u, 16)
            assert np.max(np.abs(row.products - _naive_dots(x.tolist(), u, 16))) <= 1e-8

    @pytest.mark.parametrize("u", [0, 242])
    def test_out_of_range(self, rng, u):
        with pytest.raises(IndexError):
            fft_sliding_dot(rng.normal(size=256), u, 16)


class TestRecursion:
    def test_small_hand_example(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        first = fft_sliding_dot(x, 1, 2)
        assert np.allclose(first.products, [5, 8, 11, 14], atol=1e-12)
        second = recursive_dot_update(first, x, 2)
        assert second.query_start == 2
        assert np.allclose(second.products, [8, 13, 18, 23], atol=1e-12)

    def test_constant_series(self):
        x = np.full(20, 1.5)
        row = recursive_dot_update(direct_dot_row(x, 1, 4), x, 4)
        assert np.allclose(row.products, 4 * 1.5**2)

    def test_chained_drift(self, rng):
        x = rng.normal(size=512)
        xl, m = x.tolist(), 32
        row = fft_sliding_dot(x, 1, m)
        for u in range(2, 482):
            row = recursive_dot_update(row, x, m)
            if u % 40 == 1 or u == 481:
                assert np.max(np.abs(row.products - _naive_dots(xl, u, m))) < 1e-6
            else:
                assert np.max(np.abs(row.products - direct_dot_row(x, u, m).products)) < 1e-6

    def test_end_of_series(self):
        x = np.arange(6.0)
        with pytest.raises(IndexError):
            recursive_dot_update(DotProductRow(4, np.zeros(4)), x, 3)


class TestBruteForce:
    def test_self_distance_zero(self, rng):
        x = rng.normal(size=120)
        for u in range(1, 110, 7):
            assert brute_force_distance_row(x, u, 10)[u - 1] == pytest.approx(0.0, abs=1e-7)

    def test_symmetry(self, rng):
        x = rng.normal(size=120)
        rows = {u: brute_force_distance_row(x, u, 10) for u in (3, 40, 99)}
        for u in rows:
            for v in rows:
                assert abs(rows[u][v - 1] - rows[v][u - 1]) <= 1e-9

    def test_matches_fft_pipeline(self, rng):
        x = rng.normal(size=400)
        stats = moving_stats(x, 25)
        for u in (1, 200, 376):
            fast = distance_row(fft_sliding_dot(x, u, 25), stats, 25)
            assert np.max(np.abs(fast - brute_force_distance_row(x, u, 25))) <= 1e-6

    def test_constant_query(self):
        x = np.concatenate([np.ones(10), np.arange(10.0)])
        row = brute_force_distance_row(x, 1, 4)
        assert row[0] == 0.0 and row[-1] == math.sqrt(8)


series_strategy = st.integers(0, 2**32 - 1).map(
    lambda s: np.random.default_rng(s).normal(size=int(np.random.default_rng(s).integers(60, 600)))
)


@settings(max_examples=40, deadline=None)
@given(series_strategy, st.sampled_from([8, 50]))
def test_fast_pipeline_matches_oracle(x, m):
    stats = moving_stats(x, m)
    u = 1 + (len(x) // 3) % (len(x) - m + 1)
    fast = distance_row(fft_sliding_dot(x, u, m), stats, m)
    assert np.max(np.abs(fast - brute_force_distance_row(x, u, m))) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(series_strategy, st.floats(-10, 10), st.floats(0.1, 10))
def test_shift_scale_invariance(x, shift, scale):
    m = 8
    y = scale * x + shift
    sx, sy = moving_stats(x, m), moving_stats(y, m)
    for u in (1, len(x) // 2):
        dx = distance_row(fft_sliding_dot(x, u, m), sx, m)
        dy = distance_row(fft_sliding_dot(y, u, m), sy, m)
        assert np.max(np.abs(dx - dy)) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(series_strategy, st.sampled_from([3, 8, 50]))
def test_distance_range(x, m):
    stats = moving_stats(x, m)
    d = distance_row(fft_sliding_dot(x, len(x) - m + 1, m), stats, m)
    assert np.all(d >= 0) and np.all(d <= 2 * math.sqrt(m))


@settings(max_examples=40, deadline=None)
@given(series_strategy, st.sampled_from([3, 8, 50]))
def test_moving_stats_direct(x, m):
    stats = moving_stats(x, m)
    for u in range(0, len(x) - m + 1, 13):
        w = x[u : u + m]
        assert abs(stats.means[u] - w.mean()) <= 1e-9
        assert abs(stats.stds[u] - w.std()) <= 1e-9
    assert np.all(stats.stds >= 0)


def test_frozen_segment_has_exact_zero_std():
    x = np.concatenate([np.linspace(0.9, 1.1, 50), np.full(30, 1.0371), np.linspace(1, 2, 50)])
    stats = moving_stats(x, 10)
    assert stats.stds[55] == 0.0
    assert stats.means[55] == 1.0371
