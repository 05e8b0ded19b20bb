#!/usr/bin/env python
# Monomials on the 2x2 matrix ball grouped by torus weight, and what the
# collisions do to the commutant and to the Gram matrix.
import numpy as np

import bergman_toeplitz as bt

rep = bt.weight_census(2, 2, 4)
print(f"{rep.total} monomials, {len(rep.classes)} weights, max multiplicity {rep.max_multiplicity}")
for w, members in sorted(rep.classes.items()):
    if len(members) > 1:
        print(" ", w, "->", [a.grid.tolist() for a in members])

# commutant of the torus action: dimension = sum of squared multiplicities
for cutoff in (1, 2, 3):
    basis = bt.commutant_basis(bt.torus_generators(2, 2, cutoff))
    comm, err = bt.algebra_is_commutative(basis)
    free, _ = bt.is_multiplicity_free_torus(2, 2, cutoff)
    print(f"cutoff {cutoff}: commutant dim {len(basis)}, commutative {comm}, multiplicity free {free}")

# the single degree-2 collision makes the Gram matrix non-diagonal
lam = 4.0
rule = bt.mc_sample(bt.matrix_ball(2, 2), lam, 200_000, 0)
basis = bt.bergman_basis(bt.matrix_ball(2, 2), lam, 2, rule)
grids = [tuple(a.grid.ravel()) for a in basis.indices]
i, j = grids.index((1, 0, 0, 1)), grids.index((0, 1, 1, 0))
print("<z12 z21, z11 z22> =", np.round(basis.gram[i, j].real, 5), " expected -1/(lam(lam^2-1)) =",
      round(-1 / (lam * (lam ** 2 - 1)), 5))
