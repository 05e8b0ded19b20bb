#!/usr/bin/env python
# Symbols constant on the arcs through +-1 commute, but the truncated
# matrices only show it once the basis is padded beyond the cutoff.
import bergman_toeplitz as bt
from bergman_toeplitz.quadrature import hyperbolic_grid_rule

lam, cutoff = 2.5, 10
rule = hyperbolic_grid_rule(lam)
a, b = bt.hyperbolic_arc("cos(u)**2"), bt.hyperbolic_arc("cos(u)**4")
r2 = bt.radial("r**2")

print(" pad   [arc, arc]    [arc, radial]")
for pad in (0, 10, 30, 60, 100, 150):
    same = bt.commutator_study(a, b, rule, cutoff, pad=pad).spectral
    mixed = bt.commutator_study(a, r2, rule, cutoff, pad=pad).spectral
    print(f"{pad:4d}   {same:.3e}     {mixed:.3e}")

# horocycle symbols behave the same way
rr = bt.radial_rule(bt.disk(), lam, 100)
for pad in (0, 40, 80):
    v = bt.commutator_study(bt.parabolic("t"), bt.parabolic("t**2"), rr, cutoff, pad=pad).spectral
    print(f"parabolic pair, pad {pad:3d}: {v:.3e}")
