"""
A small benchmark table
=======================

Half of the seeded trials are clean. The other half carry one spike, one
frozen run or one injected segment. Window outcomes are summed into the
misdetection, false-alarm, precision and accuracy percentages. The
``bpdd bench`` command produces the same table at a larger scale.
"""

from bpdd.bench import TrialSpec, run_suite, time_profiles, totals
from bpdd.metrics import format_table, score

records = run_suite(60, seed=7, spec=TrialSpec())
t = totals(records)
print(f"n_all={t.n_all} n_ta={t.n_ta} n_fn={t.n_fn} n_fa={t.n_fa}")
print(format_table({"proposed": score(t)}))

timings = time_profiles(3, seed=7)
for r in timings:
    print(f"N={r.N} m={r.m}: fast {r.fast_seconds:.3f} s, brute {r.brute_seconds:.3f} s ({r.speedup:.1f}x)")
