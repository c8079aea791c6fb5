"""
Noiseless coding and channel capacity
=====================================

Block prefix codes for a biased coin approach its entropy from above; the
typical subspace of many copies of a qubit state is exponentially smaller
than the full space; and alternating maximization finds channel capacity.
"""

import numpy as np

from qteleport import channel_capacity, empirical_coding_rate, trial_rng, typical_subspace
from qteleport.infotheory import binary_entropy, expected_coding_rate

p = (0.9, 0.1)
h = binary_entropy(0.9)
print(f"H = {h:.4f} bits/symbol")
for block_len in (1, 2, 4, 8, 12):
    rate = empirical_coding_rate(p, block_len, 10_000, trial_rng(seed=block_len))
    print(f"block {block_len:2d}: expected {expected_coding_rate(p, block_len):.4f}  sampled {rate:.4f}"
          f"  bound {h + 1 / block_len:.4f}")

rho = np.diag([0.9, 0.1])
for n in (4, 8, 12, 16, 20):
    t = typical_subspace(rho, n, epsilon=0.05)
    print(f"n={n:2d}: {t.dimension:7d} of {2 ** n:7d} dims keep {t.probability:.3f}, "
          f"{t.rate(n):.3f} qubits/copy")

for f in (0.0, 0.05, 0.11, 0.25, 0.5):
    c, dist = channel_capacity([[1 - f, f], [f, 1 - f]])
    print(f"BSC f={f:.2f}: capacity {c:.6f}  (closed form {1 - binary_entropy(f):.6f})")
