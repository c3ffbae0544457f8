import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpdd.bench import TrialSpec, detect_window, make_trial
from bpdd.exceptions import ParameterError
from bpdd.synthgen import Event, GridScenario, event_library, generate, random_scenario


def test_full_coupling_identical_channels():
    _, noisy = generate(GridScenario(coupling=1.0, noise_std=0.0, events=(Event(100),), seed=3))
    assert np.all(noisy.values == noisy.values[0])


def test_quiescent_steady_state():
    clean, noisy = generate(GridScenario(noise_std=0.0, ambient_std=0.0, seed=3))
    assert np.all(clean.values == 1.0) and np.all(noisy.values == 1.0)


def test_event_region_correlation():
    onset = 150
    for seed in range(5):
        _, noisy = generate(GridScenario(coupling=0.9, events=(Event(onset, 0.15),), seed=seed))
        region = noisy.values[:, onset - 1 : onset + 250]
        corr = np.corrcoef(region)
        assert corr[np.triu_indices(noisy.n_b, 1)].min() > 0.95


def test_clean_is_noise_free_copy():
    clean, noisy = generate(GridScenario(noise_std=0.002, events=(Event(100),), seed=1))
    resid = noisy.values - clean.values
    assert 0.0015 < resid.std() < 0.0025


def test_synchronised_dip():
    onset = 222
    clean, _ = generate(GridScenario(n_b=7, ambient_std=0.0, events=(Event(onset, 0.2),), seed=4))
    first_drop = [int(np.flatnonzero(row < 1.0)[0]) + 1 for row in clean.values]
    assert set(first_drop) == {onset}


def test_deterministic():
    sc = GridScenario(events=(Event(80),), seed=11)
    a, b = generate(sc), generate(sc)
    assert np.array_equal(a[1].values, b[1].values)


def test_scenario_json_round_trip():
    sc = random_scenario(np.random.default_rng(2))
    back = GridScenario.from_dict(json.loads(sc.to_json()))
    assert back == sc


@pytest.mark.parametrize(
    "kwargs",
    [{"coupling": 1.2}, {"noise_std": -0.1}, {"events": (Event(0),)}, {"events": (Event(501),)}],
)
def test_invalid_scenarios(kwargs):
    with pytest.raises(ParameterError):
        GridScenario(**kwargs)


def test_event_library():
    lib = event_library()
    assert len(lib) == 16 and all(len(s) == 200 for s in lib)
    assert all(np.std(s) > 0.001 for s in lib)


def test_clean_window_specificity():
    spec = TrialSpec(noise_std=0.002)
    seeds = np.random.SeedSequence(77).generate_state(200)
    quiet = sum(not detect_window(make_trial(int(s), None, spec)[0], spec).flagged for s in seeds)
    assert quiet >= 0.92 * 200


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.9, 1.0))
def test_channels_track_each_other(seed, coupling):
    sc = random_scenario(np.random.default_rng(seed), coupling=coupling, noise_std=0.0)
    clean, _ = generate(sc)
    dev = clean.values - 1.0
    ratio = dev[1:] / np.where(dev[0] == 0, np.nan, dev[0])
    finite = ratio[np.isfinite(ratio)]
    assert np.all((finite > 0.8 / 1.2 - 1e-9) & (finite < 1.2 / 0.8 + 1e-9))
