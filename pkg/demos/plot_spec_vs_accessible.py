"""
Specification versus accessible information
===========================================

Choosing one of N equal-area cells on the Bloch sphere takes log2 N bits to
specify, but the Holevo quantity of the resulting qubit ensemble never
exceeds one bit. Teleporting each state still costs two classical bits.
"""

from qteleport import StateSource, cost_ledger, spec_vs_accessible, trial_rng

print(f"{'N':>6s} {'H_spec':>8s} {'chi':>8s} {'gap':>8s}")
for n in (1, 2, 4, 64, 1024, 16384):
    r = spec_vs_accessible(StateSource.uniform(n))
    print(f"{n:6d} {r.h_spec:8.3f} {r.chi:8.4f} {r.gap:8.3f}")

led = cost_ledger(StateSource.uniform(1024), n_runs=200, rng=trial_rng(seed=8))
print(f"\n{led.runs} runs: {led.bits_sent} bits sent, at most {led.accessible_bound:.1f} "
      f"extractable, ratio {led.ratio:.2f}")
