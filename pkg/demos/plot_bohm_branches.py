"""
Spin vectors in the four branches
=================================

Before Alice acts, systems 2 and 3 form a singlet and carry no spin vector.
After the measurement interaction Bob's relative state in each branch has a
unit spin vector; only in the psi- branch does it already equal the
original s(alpha, beta).
"""

import numpy as np

from qteleport import UnknownState, bohm_branch_analysis, trial_rng
from qteleport.teleport import sample_active_branches

chi = UnknownState.normalized(1.0, 1.0j)
report = bohm_branch_analysis(chi, trial_rng(seed=5))

print("original spin", np.round(report.original_spin, 6))
print("pre-measurement spins", {k: np.round(v, 6) for k, v in report.pre_spins.items()})
for b in report.branches:
    print(f"{b.outcome:5s} p={b.probability:.2f} spin {np.round(b.spin, 6)}")
print("active branch", report.active, "-> corrected spin", np.round(report.final_spin, 6))

# The configuration lands in the psi- packet about a quarter of the time.
counts = sample_active_branches(chi, 100_000, trial_rng(seed=5, trial=1))
print({k: c / 100_000 for k, c in counts.items()})
