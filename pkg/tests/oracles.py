"""Reference values computed without the package.

Each function is an independent route to a quantity the library computes:
one-dimensional quadrature with algebraic weights, series expansion of the
closed-form kernel, a box-proposal Monte Carlo sampler, finite differences
and brute-force enumeration.
"""
from __future__ import annotations

import itertools
from collections import Counter

import numpy as np
from scipy import integrate


def disk_moment(k: float, lam: float) -> float:
    """E|z|^{2k} under the normalized weight (1-|z|^2)^(lam-2) on the disk.

    In ``s = |z|^2`` the measure is ``(1-s)^(lam-2) ds`` on [0, 1].
    """
    one = lambda s: 1.0
    num = integrate.quad(one, 0.0, 1.0, weight="alg", wvar=(k, lam - 2.0), epsabs=0, epsrel=1e-13)[0]
    den = integrate.quad(one, 0.0, 1.0, weight="alg", wvar=(0.0, lam - 2.0), epsabs=0, epsrel=1e-13)[0]
    return num / den


def disk_radial_moment(f, k: int, lam: float) -> float:
    """E[f(|z|) |z|^{2k}] on the disk, by adaptive quadrature in s = |z|^2."""
    g = lambda s: f(np.sqrt(s)) * s ** k
    num = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(0.0, lam - 2.0), epsabs=0, epsrel=1e-13)[0]
    den = integrate.quad(lambda s: 1.0, 0.0, 1.0, weight="alg", wvar=(0.0, lam - 2.0))[0]
    return num / den


def ball2_moment(a: int, b: int, lam: float) -> float:
    """E|z1|^{2a}|z2|^{2b} on B^2 with weight (1-|z|^2)^(lam-3), nested quad in s1, s2."""
    def raw(a, b):
        def inner(s1):
            v = integrate.quad(lambda s2: 1.0, 0.0, 1.0 - s1, weight="alg", wvar=(b, lam - 3.0),
                               epsabs=0, epsrel=1e-12)[0]
            return s1 ** a * v
        return integrate.quad(inner, 0.0, 1.0, epsabs=0, epsrel=1e-11, limit=200)[0]
    return raw(a, b) / raw(0, 0)


def ball_kernel(z, w, lam: float) -> complex:
    """Closed form (1 - <z, w>)^(-lam) on a unit ball."""
    return complex((1.0 - np.vdot(np.ravel(w), np.ravel(z))) ** (-lam))


def matrix_ball_kernel(z, w, lam: float) -> complex:
    n = z.shape[0]
    return complex(np.linalg.det(np.eye(n) - z @ np.conj(w).T) ** (-lam))


def collision_gram_block(lam: float) -> np.ndarray:
    """Gram block of (z11 z22, z12 z21) on D_{2,2}.

    The degree-2 part of det(I - Z W*)^(-lam) = exp(lam sum tr(X^k)/k),
    X = Z W*, is lam^2 (tr X)^2 / 2 + lam tr(X^2) / 2.  Its coefficient matrix
    on the block is [[lam^2, lam], [lam, lam^2]]; the reproducing property
    makes the Gram block the inverse of it.
    """
    c = np.array([[lam ** 2, lam], [lam, lam ** 2]])
    return np.linalg.inv(c)


def box_mc_matrix_ball(lam: float, count: int, seed: int):
    """Points of D_{2,2} from uniform box proposals with density weights.

    Returns ``(z, w)``: accepted ``(N, 2, 2)`` samples and normalized weights
    ``det(I - ZZ*)^(lam-4)``.  Membership uses the closed-form largest
    eigenvalue of ``ZZ*``.
    """
    rng = np.random.default_rng(seed)
    keep = []
    left = count
    while left > 0:
        c = min(left, 400_000)
        x = rng.uniform(-1.0, 1.0, (c, 8))
        z = (x[:, :4] + 1j * x[:, 4:]).reshape(c, 2, 2)
        tr = np.sum(np.abs(z) ** 2, axis=(1, 2))
        det2 = np.abs(z[:, 0, 0] * z[:, 1, 1] - z[:, 0, 1] * z[:, 1, 0]) ** 2
        top = (tr + np.sqrt(np.maximum(tr ** 2 - 4 * det2, 0.0))) / 2
        keep.append(z[top < 1.0])
        left -= c
    z = np.concatenate(keep)
    tr = np.sum(np.abs(z) ** 2, axis=(1, 2))
    det2 = np.abs(z[:, 0, 0] * z[:, 1, 1] - z[:, 0, 1] * z[:, 1, 0]) ** 2
    w = (1.0 - tr + det2) ** (lam - 4.0)
    return z, w / w.sum()


def weighted_mean(values, w) -> tuple[complex, float]:
    """Self-normalized mean and its delta-method standard error."""
    mean = np.sum(w * values)
    resid = (values - mean) * w
    return mean, float(np.sqrt(np.sum(np.abs(resid) ** 2)))


def numerical_jacobian_det(f, z: np.ndarray, h: float = 1e-6) -> complex:
    """det of the complex derivative of a holomorphic map C^{n x m} -> C^{n x m}."""
    flat = z.ravel()
    d = flat.size
    jac = np.zeros((d, d), dtype=complex)
    for k in range(d):
        e = np.zeros(d, dtype=complex)
        e[k] = h
        plus = f((flat + e).reshape(z.shape)).ravel()
        minus = f((flat - e).reshape(z.shape)).ravel()
        jac[:, k] = (plus - minus) / (2 * h)
    return complex(np.linalg.det(jac))


def su_nm_generator(rng, n: int, m: int, scale: float = 0.5) -> np.ndarray:
    """Random element of su(n, m): [[A, B], [B*, D]] with A, D skew, trace zero."""
    def skew(k):
        x = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        return (x - x.conj().T) / 2
    a, d = skew(n), skew(m)
    b = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    x = np.block([[a, b], [b.conj().T, d]]) * scale
    x -= np.trace(x) / (n + m) * np.eye(n + m)
    return x


def brute_grids(n: int, m: int, max_degree: int):
    """All n x m nonnegative integer grids of total degree <= max_degree."""
    out = []
    for flat in itertools.product(range(max_degree + 1), repeat=n * m):
        if sum(flat) <= max_degree:
            out.append(np.array(flat).reshape(n, m))
    return out


def brute_weight_counts(n: int, m: int, max_degree: int) -> Counter:
    return Counter((tuple(g.sum(axis=1)), tuple(g.sum(axis=0))) for g in brute_grids(n, m, max_degree))
