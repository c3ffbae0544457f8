import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpdd.bench import TrialSpec, detect_window
from bpdd.detector import (
    DetectionConfig,
    DetectionReport,
    compute_threshold,
    detect,
    match_report,
)
from bpdd.exceptions import EmptyProfileError, ParameterError
from bpdd.injector import BadDataScenario, TruthLabel, inject
from bpdd.profile import BoundaryPolicy, StnnProfile, compute_profile
from bpdd.synthgen import Event, GridScenario, generate
from bpdd.tsdata import ConcatenatedSeries, concatenate, ingest_window, normalize_per_channel


def profile_of(values, m=3):
    values = np.asarray(values, dtype=float)
    L = values.size
    series = ConcatenatedSeries(np.zeros(L + m - 1), L + m - 1, 1)
    return StnnProfile(
        values, np.ones(L, dtype=int), m, 0, BoundaryPolicy.INCLUDE, np.zeros(L, bool), series
    )


def event_window(seed, onset=150):
    _, noisy = generate(GridScenario(events=(Event(onset, 0.15),), seed=seed))
    return noisy


class TestThreshold:
    def test_constant_profile(self):
        assert compute_threshold(profile_of([2.5] * 6), 6) == 2.5

    def test_hand_arithmetic(self):
        p = profile_of([1, 1, 1, 1, 10])
        assert compute_threshold(p, 1) == pytest.approx(6.4, abs=1e-12)

    def test_k_zero_is_mean(self):
        vals = np.random.default_rng(0).random(30)
        assert compute_threshold(profile_of(vals), 0) == pytest.approx(vals.mean())

    def test_ignores_sentinels(self):
        assert compute_threshold(profile_of([1, np.nan, 3, np.nan]), 0) == 2.0

    def test_all_sentinel(self):
        with pytest.raises(EmptyProfileError):
            compute_threshold(profile_of([np.nan, np.nan, 1.0]), 6)


class TestConfig:
    def test_defaults(self):
        c = DetectionConfig()
        assert (c.K, c.max_anomalies, c.step_for(50), c.step_for(8)) == (6.0, 32, 5, 1)

    @pytest.mark.parametrize("kwargs", [{"K": 0}, {"K": -1}, {"peak_step": 0}, {"max_anomalies": 0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ParameterError):
            DetectionConfig(**kwargs)


class TestDetect:
    def test_below_threshold_is_clean(self):
        report = detect(profile_of(np.full(100, 1.0)))
        assert report.anomalies == ()
        assert not report.flagged

    def test_probe_and_mask_on_synthetic_profile(self):
        vals = np.full(200, 1.0)
        vals[100:104] = [9.0, 10.0, 9.5, 9.0]
        report = detect(profile_of(vals, m=10), DetectionConfig(K=3, peak_step=1))
        [a] = report.anomalies
        assert (a.peak_index, a.peak_value) == (102, 10.0)
        assert (a.flat_start, a.flat_end) == (101, 104 + 9)

    def test_max_anomalies_cap(self):
        vals = np.full(400, 1.0)
        vals[[50, 150, 250, 350]] = 10.0
        report = detect(profile_of(vals, m=5), DetectionConfig(K=2, max_anomalies=2))
        assert len(report.anomalies) == 2

    def test_single_spike_localised(self):
        window, truth = inject(event_window(0), BadDataScenario("spike", 3, 320, 2, 0.3))
        report = detect_window(window, TrialSpec())
        [a] = report.anomalies
        assert all(c == "ch3" for c, _ in a.channel_locations)
        [(_, (s, e))] = a.channel_locations
        assert s <= 321 and e >= 320
        assert match_report(report, truth).ta == 1

    def test_two_separated_spikes(self):
        window, t1 = inject(event_window(0), BadDataScenario("spike", 3, 320, 2, 0.3))
        window, t2 = inject(window, BadDataScenario("spike", 1, 60, 1, -0.25))
        report = detect_window(window, TrialSpec(m=20))
        a, b = sorted(report.anomalies, key=lambda x: x.flat_start)
        assert a.flat_end < b.flat_start
        res = match_report(report, t1 + t2)
        assert (res.ta, res.fn, res.fa) == (2, 0, 0)

    def test_spans_disjoint_and_above_threshold(self):
        vals = np.random.default_rng(3).random(300)
        vals[[40, 44, 120, 200]] = [30, 28, 25, 26]
        report = detect(profile_of(vals, m=6), DetectionConfig(K=2, peak_step=2))
        spans = sorted((a.flat_start, a.flat_end) for a in report.anomalies)
        assert all(e < s for (_, e), (s, _) in zip(spans, spans[1:]))
        assert all(a.peak_value > report.threshold for a in report.anomalies)

    def test_pre_flagged_cells_not_reported(self):
        window = event_window(2)
        rows = [(t, list(col)) for t, col in zip(window.times, window.values.T)]
        for k in range(200, 206):
            rows[k][1][1] = math.nan
        w = ingest_window(rows, window.dt)
        assert len(w.pre_flags) == 6
        report = detect_window(w, TrialSpec())
        assert report.pre_flags == w.pre_flags
        flagged = {(c, s) for c, s in w.pre_flags}
        for a in report.anomalies:
            cells = {(c, j) for c, (s, e) in a.channel_locations for j in range(s, e + 1)}
            assert not cells <= flagged


class TestReportJson:
    def test_keys_and_round_trip(self):
        window, _ = inject(event_window(0), BadDataScenario("spike", 3, 320, 2, 0.3))
        report = detect_window(window, TrialSpec())
        d = json.loads(report.to_json())
        assert list(d) == ["window_id", "threshold", "profile_mean", "profile_std", "anomalies", "pre_flags"]
        assert DetectionReport.from_dict(d) == report

    def test_deterministic(self):
        window, _ = inject(event_window(1), BadDataScenario("spike", 2, 100, 3, -0.2))
        a = detect_window(window, TrialSpec()).to_json()
        b = detect_window(window, TrialSpec()).to_json()
        assert a == b


class TestMatch:
    def _report(self, *locs):
        from bpdd.detector import Anomaly

        anomalies = tuple(Anomaly(1, 10, (loc,), 5.0, 1) for loc in locs)
        return DetectionReport(0, 1.0, 0.5, 0.1, anomalies)

    def test_hit(self):
        res = match_report(self._report(("ch1", (5, 14))), [TruthLabel("ch1", 10, 10, "spike")])
        assert (res.ta, res.fn, res.fa) == (1, 0, 0)
        assert res.window_outcome == "ta"

    def test_clean_false_alarm(self):
        res = match_report(self._report(("ch1", (5, 14))), [])
        assert (res.ta, res.fn, res.fa) == (0, 0, 1)
        assert res.window_outcome == "fa"

    def test_wrong_channel(self):
        res = match_report(self._report(("ch2", (5, 14))), [TruthLabel("ch1", 10, 10, "spike")])
        assert (res.ta, res.fn, res.fa) == (0, 1, 1)
        assert res.window_outcome == "fn"

    def test_accepts_scenarios(self):
        truth = [BadDataScenario("spike", 2, 10, 1, 0.1)]
        res = match_report(self._report(("ch2", (1, 10))), truth, ("ch1", "ch2"))
        assert res.ta == 1

    def test_clean_quiet(self):
        assert match_report(self._report(), []).window_outcome == "tn"


@pytest.fixture(scope="module")
def spiky_profile():
    window, _ = inject(event_window(5), BadDataScenario("spike", 4, 260, 2, 0.4))
    return compute_profile(concatenate(normalize_per_channel(window)), 50)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 8), st.floats(0.01, 4))
def test_threshold_monotone_in_k(spiky_profile, k1, dk):
    low = detect(spiky_profile, DetectionConfig(K=k1))
    high = detect(spiky_profile, DetectionConfig(K=k1 + dk))
    assert high.threshold >= low.threshold
    for a in high.anomalies:
        assert any(b.flat_start <= a.flat_start and a.flat_end <= b.flat_end for b in low.anomalies)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 50), st.floats(-100, 100), st.integers(0, 30))
def test_affine_invariance(scale, shift, seed):
    window, _ = inject(event_window(seed), BadDataScenario("spike", 2, 300, 2, 0.3))
    series = concatenate(normalize_per_channel(window))
    moved = ConcatenatedSeries(scale * series.data + shift, series.n, series.n_b, series.channel_ids)
    a = detect(compute_profile(series, 50))
    b = detect(compute_profile(moved, 50))
    key = lambda r: [(x.flat_start, x.flat_end, x.channel_locations, x.peak_index) for x in r.anomalies]
    assert key(a) == key(b)
