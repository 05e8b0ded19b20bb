#!/usr/bin/env python
# Commutators on the 2x2 matrix ball from a shared Monte Carlo rule, with
# batch-means standard errors.  K-invariant symbols commute; two torus
# invariant symbols that see the multiplicity-2 block do not.
import bergman_toeplitz as bt

lam, cutoff = 5.0, 2
rule = bt.mc_sample(bt.matrix_ball(2, 2), lam, 200_000, 6)
print("acceptance rate", round(rule.acceptance_rate, 4), " batches", rule.n_batches)

pairs = {
    "K-invariant": (bt.k_invariant("arctan(t1)"), bt.k_invariant("arctan(t2)")),
    "torus": (bt.torus_invariant("a11"), bt.torus_invariant("cross_re")),
}
for name, (a, b) in pairs.items():
    res = bt.commutator_study(a, b, rule, cutoff)
    print(f"{name:12s} {res.spectral:.2e} +- {res.stderr:.1e}  ({res.spectral / res.stderr:5.1f} SE) "
          f"-> {res.verdict}")
