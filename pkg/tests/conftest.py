import math

import numpy as np
import pytest

from bpdd.tsdata import ConcatenatedSeries, MeasurementWindow


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_series(values) -> ConcatenatedSeries:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    return ConcatenatedSeries(values.ravel(), values.shape[1], values.shape[0])


def make_window(values, dt=0.01) -> MeasurementWindow:
    return MeasurementWindow(np.asarray(values, dtype=float), dt)


def naive_znorm_distance(x, y):
    """Plain-Python z-normalised Euclidean distance with the constant rules."""
    m = len(x)

    def z(a):
        mu = sum(a) / m
        sd = math.sqrt(sum((t - mu) ** 2 for t in a) / m)
        return None if sd <= 1e-12 else [(t - mu) / sd for t in a]

    zx, zy = z(x), z(y)
    if zx is None and zy is None:
        return 0.0
    if zx is None or zy is None:
        return math.sqrt(2 * m)
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(zx, zy)))


def _znorm(a):
    m = len(a)
    mu = sum(a) / m
    sd = math.sqrt(sum((t - mu) ** 2 for t in a) / m)
    return None if sd <= 1e-12 else [(t - mu) / sd for t in a]


def naive_profile(data, m, exclusion=0):
    """Nested-loop nearest-neighbour profile; returns (values, 1-based argmins)."""
    data = list(map(float, data))
    L = len(data) - m + 1
    z = [_znorm(data[u : u + m]) for u in range(L)]
    root2m = math.sqrt(2 * m)
    values, nn = [], []
    for u in range(L):
        best, arg = math.inf, -1
        zu = z[u]
        for v in range(L):
            if abs(u - v) <= exclusion:
                continue
            zv = z[v]
            if zu is None or zv is None:
                d = 0.0 if zu is zv else root2m
            else:
                d = math.sqrt(sum((a - b) ** 2 for a, b in zip(zu, zv)))
            if d < best:
                best, arg = d, v + 1
        values.append(best)
        nn.append(arg)
    return np.array(values), np.array(nn)


def assert_same_neighbors(fast, ref, tol=1e-9):
    """Neighbour indices agree except where both candidates tie within ``tol``."""
    from bpdd.distance import brute_force_distance_row

    diff = np.flatnonzero(fast.neighbor_index != ref.neighbor_index)
    for i in diff:
        row = brute_force_distance_row(fast.series, int(i) + 1, fast.m)
        a, b = fast.neighbor_index[i], ref.neighbor_index[i]
        assert a > 0 and b > 0, f"u={i + 1}: only one profile evaluated"
        assert abs(row[a - 1] - row[b - 1]) <= tol, f"u={i + 1}: {a} vs {b} is not a tie"


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance verdict line; printed again in the terminal summary."""

    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
