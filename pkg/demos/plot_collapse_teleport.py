"""
Teleporting a qubit with a Bell measurement
===========================================

Alice holds an unknown qubit on system 1 and half of a singlet (system 2);
Bob holds system 3. A Bell measurement on 1, 2 leaves Bob with one of four
rotated copies of the state, and two classical bits tell him which
correction to apply.
"""

import numpy as np

from qteleport import UnknownState, bell_decomposition, build_initial, run_collapse, trial_rng

chi = UnknownState.normalized(0.6, 0.8j)

# Before anything happens the three-system state is a product of |chi> and
# the singlet. Rewriting it over Bell states of 1, 2 gives four equally
# weighted branches.
decomp = bell_decomposition(build_initial(chi))
for b in decomp.branches:
    print(f"{b.outcome:5s} weight {b.coefficient ** 2:.3f}  Bob holds {b.operator:>10s} |chi>")

# One run: sample an outcome, send its two bits, correct.
t = run_collapse(chi, trial_rng(seed=1))
print("\noutcome", t.outcome, "bits", t.bits, "correction", t.correction)
for s in t.stages:
    rho1 = s.reduced["1"].matrix
    print(f"{s.name:10s} Bob fidelity {s.bob_fidelity:.6f}   Alice's system 1 mixed: "
          f"{np.allclose(rho1, np.eye(2) / 2)}")
