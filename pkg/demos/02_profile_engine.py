"""
Fast profile versus brute force
===============================

A dot-product row comes from FFTs. Each later row follows from the one
before it in O(N). The brute-force oracle instead z-normalises every
subsequence explicitly. Both must produce the same profile.
"""

import time

import numpy as np

from bpdd.distance import direct_dot_row, fft_sliding_dot, recursive_dot_update
from bpdd.profile import compute_profile, self_join_oracle
from bpdd.bench import TrialSpec, make_trial
from bpdd.tsdata import concatenate, normalize_per_channel

rng = np.random.default_rng(0)
x = rng.normal(size=512)

# The first row from the FFT matches the direct sums.
row = fft_sliding_dot(x, 1, 32)
print("fft row vs direct:", np.max(np.abs(row.products - direct_dot_row(x, 1, 32).products)))

# Chaining the recursion across the whole series stays accurate.
for u in range(2, 482):
    row = recursive_dot_update(row, x, 32)
print("after 480 recursive steps:", np.max(np.abs(row.products - direct_dot_row(x, 481, 32).products)))

# A full 5 x 500 window at m = 50
window, *_ = make_trial(1, None, TrialSpec())
series = concatenate(normalize_per_channel(window))
t0 = time.perf_counter()
fast = compute_profile(series, 50)
t1 = time.perf_counter()
slow = self_join_oracle(series, 50)
t2 = time.perf_counter()
print(f"fast {t1 - t0:.3f} s, brute force {t2 - t1:.3f} s, speedup {(t2 - t1) / (t1 - t0):.1f}x")
print("max |difference|:", np.max(np.abs(fast.values - slow.values)))
print("same neighbours:", np.array_equal(fast.neighbor_index, slow.neighbor_index))
