#!/usr/bin/env python
# Toeplitz matrices on the weighted Bergman spaces of the unit disk.
import numpy as np

import bergman_toeplitz as bt
from bergman_toeplitz.symbols import expression

lam = 2.5
basis = bt.bergman_basis(bt.disk(), lam, 12)
rule = bt.radial_rule(bt.disk(), lam, 20)

# |z|^2 is diagonal, with entries (k+1)/(k+lam)
t = bt.toeplitz_matrix(basis, bt.radial("r**2"), rule)
k = np.arange(basis.dim)
print("diag T_|z|^2     ", np.round(np.diag(t.entries).real[:6], 6))
print("(k+1)/(k+lam)    ", np.round((k[:6] + 1) / (k[:6] + lam), 6))

# Re z only couples neighbouring degrees
re = bt.toeplitz_matrix(basis, expression("real(z)", 1.0), rule).entries
print("nonzero bands of T_Re z:", sorted({int(j - i) for i, j in zip(*np.nonzero(np.abs(re) > 1e-12))}))

# two radial symbols commute, Re z and Im z do not
a, b = bt.radial("exp(-r**2)"), bt.radial("cos(3*r)")
print("[T_a, T_b] radial pair:", bt.commutator_study(a, b, rule, 10).spectral)
print("[T_Re z, T_Im z]      :", bt.commutator_study(expression("real(z)", 1.0),
                                                  expression("imag(z)", 1.0), rule, 10).spectral)

# the truncated kernel approaches (1 - z conj(w))^-lam
z, w = 0.5 + 0.2j, 0.4 - 0.3j
for n in (5, 10, 20, 40):
    kb = bt.kernel_eval(bt.bergman_basis(bt.disk(), lam, n), z, w)
    print(f"cutoff {n:2d}: |k_N - k| = {abs(kb - (1 - z * np.conj(w)) ** -lam):.2e}")

# rotations act diagonally; the fractional power carries the phase of the path
u = bt.pi_lambda_matrix(basis, bt.rotation_subgroup().element(0.8)).entries
print("pi(rotation) diagonal phases / theta:", np.round(-np.angle(np.diag(u))[:3] / 0.8, 6))
