"""
Spikes, frozen values, injected segments and zero-filled losses
===============================================================

Each kind of bad data is injected into windows that also contain a genuine
event. A spike breaks the cross-channel similarity at a single point. A
frozen run is a constant stretch, and a constant stretch matches nothing
varying. A copied oscillation does not line up with its neighbours.
"""

from collections import Counter

from bpdd.bench import TrialSpec, detect_window, make_trial
from bpdd.detector import match_report
from bpdd.injector import Kind

spec = TrialSpec()
for kind in Kind:
    outcomes = Counter()
    for seed in range(30):
        window, truth, _, bad = make_trial(1000 + seed, kind.value, spec)
        outcomes[match_report(detect_window(window, spec), truth).window_outcome] += 1
    print(f"{kind.value:16s} detected {outcomes['ta']:2d}/30")

clean = sum(detect_window(make_trial(seed, None, spec)[0], spec).flagged for seed in range(30))
print(f"{'clean':16s} flagged  {clean:2d}/30")
