"""Integration rules for ``(D, mu_lam)`` and for compact groups.

Every rule is self-normalized: weights sum to one, so ``integrate(rule, 1)``
is exactly 1 and the normalizing constants ``c_lam`` never appear.

Monte Carlo rules are generated in chunks; chunk ``c`` draws from a Philox
stream keyed on ``(seed, c)``, so the node list depends only on
``(domain, lam, count, seed, chunk_size)`` and never on how the work is split.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi
from scipy.stats import unitary_group

from .domains import Domain, _det_defect, _opnorm

__all__ = [
    "QuadratureRule",
    "Estimate",
    "QuadratureError",
    "ball_radial_rule",
    "radial_rule",
    "hyperbolic_grid_rule",
    "mc_sample",
    "torus_rule",
    "haar_rule",
    "integrate",
    "gauss_jacobi01",
]

MIN_ACCEPTANCE = 1e-4


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class Estimate:
    """An integral value with its standard error (0 for deterministic rules)."""

    value: complex | float
    stderr: float = 0.0

    def __float__(self):
        return float(np.real(self.value))

    def __complex__(self):
        return complex(self.value)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and normalized weights.

    ``nodes`` is ``(N, n, m)`` for domain rules, ``(N, dim)`` angles for
    torus grids and ``(N, k, k)`` unitaries for Haar samples.  ``batches``
    holds ``K + 1`` boundaries of contiguous node blocks used for
    batch-means error estimates (Monte Carlo only).
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    exactness: int | str | None
    domain: Domain | None = None
    lam: float | None = None
    seed: int | None = None
    params: dict = field(default_factory=dict)
    batches: np.ndarray | None = None
    acceptance_rate: float | None = None

    def __len__(self):
        return len(self.weights)

    @property
    def stochastic(self) -> bool:
        return self.kind == "monte_carlo"

    @property
    def effective_sample_size(self) -> float:
        w = self.weights
        return float(w.sum() ** 2 / np.sum(w ** 2))

    def batch(self, k: int) -> "QuadratureRule":
        """The ``k``-th batch as a standalone self-normalized rule."""
        if self.batches is None:
            raise QuadratureError("rule has no batches")
        a, b = self.batches[k], self.batches[k + 1]
        w = self.weights[a:b]
        return QuadratureRule(self.kind, self.nodes[a:b], w / w.sum(), self.exactness,
                              self.domain, self.lam, self.seed,
                              dict(self.params, batch=k), None, self.acceptance_rate)

    @property
    def n_batches(self) -> int:
        return 0 if self.batches is None else len(self.batches) - 1

    def describe(self) -> dict:
        """Parameters identifying the rule (no node data)."""
        out = {"kind": self.kind, "params": dict(self.params), "size": len(self),
               "exactness": self.exactness}
        if self.domain is not None:
            out["domain"] = self.domain.to_json()
        if self.lam is not None:
            out["lam"] = self.lam
        if self.seed is not None:
            out["seed"] = self.seed
        if self.acceptance_rate is not None:
            out["acceptance_rate"] = self.acceptance_rate
            out["effective_sample_size"] = self.effective_sample_size
        return out

    def to_json(self) -> dict:
        nodes = np.asarray(self.nodes)
        flat = nodes.reshape(len(nodes), -1)
        if np.iscomplexobj(flat):
            node_list = [[[float(v.real), float(v.imag)] for v in row] for row in flat]
        else:
            node_list = flat.tolist()
        out = self.describe()
        out["node_shape"] = list(nodes.shape[1:])
        out["nodes"] = node_list
        out["weights"] = self.weights.tolist()
        return out


def gauss_jacobi01(q: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes on ``[0, 1]`` for the weight ``(1-u)^a u^b``, weights summing to 1."""
    x, w = roots_jacobi(q, a, b)
    return (1.0 + x) / 2.0, w / w.sum()


def _simplex_rule(n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Conical-product rule for the uniform probability on the simplex ``sum t = 1``.

    Exact for polynomials in ``t`` of degree ``<= 2q - 1``.  Returns ``(T, w)``
    with ``T`` of shape ``(q^(n-1), n)``.
    """
    if n == 1:
        return np.ones((1, 1)), np.ones(1)
    grids = [gauss_jacobi01(q, n - 1 - i, 0.0) for i in range(1, n)]
    us = np.meshgrid(*[g[0] for g in grids], indexing="ij")
    ws = np.meshgrid(*[g[1] for g in grids], indexing="ij")
    us = [u.ravel() for u in us]
    w = np.prod([x.ravel() for x in ws], axis=0)
    t = np.empty((len(w), n))
    rest = np.ones(len(w))
    for i, u in enumerate(us):
        t[:, i] = rest * u
        rest = rest * (1.0 - u)
    t[:, n - 1] = rest
    return t, w


def ball_radial_rule(n: int, lam: float, k_max: int, *, radial_points: int | None = None,
                     angular_points: int | None = None, oversample: int = 4) -> QuadratureRule:
    """Product rule on ``B^n`` for ``mu_lam``.

    With ``s_j = |z_j|^2 = rho * t_j``, ``rho`` is Gauss-Jacobi for the
    ``Beta(n, lam - n)`` radial law (weight ``r^(2n-1)(1-r^2)^(lam-n-1)`` in
    ``r``), ``t`` runs over a conical-product rule on the simplex and every
    phase over a uniform grid.  Integrands polynomial in ``z, zbar`` of total
    degree ``<= 2 k_max`` are integrated exactly.
    """
    if not lam > n:
        raise QuadratureError(f"ball_radial_rule needs lam > n (= p - 1), got lam={lam}, n={n}")
    if k_max < 0:
        raise QuadratureError("k_max must be nonnegative")
    q = radial_points or (k_max // 2 + 1 + oversample)
    a = angular_points or (2 * k_max + 1)
    if 2 * q - 1 < k_max:
        raise QuadratureError("too few radial points for the requested exactness")
    rho, wr = gauss_jacobi01(q, lam - n - 1, n - 1)
    t, wt = _simplex_rule(n, q)
    theta = 2.0 * np.pi * np.arange(a) / a
    phases = np.stack(np.meshgrid(*([theta] * n), indexing="ij"), -1).reshape(-1, n)
    s = rho[:, None, None] * t[None, :, :]                      # (q, T, n)
    mod = np.sqrt(s).reshape(-1, n)                             # (q*T, n)
    w_mod = (wr[:, None] * wt[None, :]).ravel()
    z = mod[:, None, :] * np.exp(1j * phases)[None, :, :]       # (qT, A^n, n)
    w = (w_mod[:, None] * np.full(len(phases), 1.0 / len(phases))[None, :]).ravel()
    nodes = z.reshape(-1, n, 1)
    return QuadratureRule("radial_angular", nodes, w, 2 * k_max, Domain("unit_ball", n, 1),
                          float(lam), None,
                          {"n": n, "k_max": k_max, "radial_points": q, "angular_points": a})


def radial_rule(domain: Domain, lam: float, k_max: int, **kw) -> QuadratureRule:
    """:func:`ball_radial_rule` for any rank-one domain (``B^n`` in either orientation)."""
    if not domain.is_ball:
        raise QuadratureError(f"no exact radial rule for {domain}")
    domain.check_weight(lam)
    rule = ball_radial_rule(domain.dim, lam, k_max, **kw)
    nodes = rule.nodes.reshape((-1,) + domain.shape)
    return QuadratureRule(rule.kind, nodes, rule.weights, rule.exactness, domain, float(lam),
                          None, rule.params)


def hyperbolic_grid_rule(lam: float, *, arc_points: int = 60, step: float = 0.01,
                         half_width: float = 15.0) -> QuadratureRule:
    """Disk rule on the coordinates of the ``SO_0(1,1)`` orbits.

    With ``w = (1+z)/(1-z) = exp(sigma + i u)``, ``u`` labels the circle arc
    through ``+-1`` and ``sigma`` moves along it.  In these coordinates
    ``d mu_lam ~ cos(u)^(lam-2) e^(lam sigma) |w+1|^(-2 lam) d sigma du``;
    ``u`` gets Gauss-Jacobi nodes and ``sigma`` the trapezoid rule, which is
    spectrally accurate because the integrand decays like ``e^(-lam |sigma|)``.
    Symbols that only depend on ``u`` are smooth on this grid even though
    they are discontinuous at ``z = +-1``.
    """
    if not lam > 1:
        raise QuadratureError("lam must exceed 1 on the disk")
    x, wq = roots_jacobi(arc_points, lam - 2, lam - 2)
    u = 0.5 * np.pi * x
    wu = wq * (np.cos(u) / (1.0 - x ** 2)) ** (lam - 2)
    count = int(round(half_width / step))
    sigma = step * np.arange(-count, count + 1)
    U, S = np.meshgrid(u, sigma, indexing="ij")
    w = np.exp(S + 1j * U)
    z = (w - 1.0) / (w + 1.0)
    weights = wu[:, None] * np.exp(lam * S) / np.abs(w + 1.0) ** (2 * lam)
    weights = (weights / weights.sum()).ravel()
    return QuadratureRule("hyperbolic_grid", z.reshape(-1, 1, 1), weights, "spectral",
                          Domain("unit_ball", 1, 1), float(lam), None,
                          {"arc_points": arc_points, "step": step, "half_width": half_width})


def _chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def mc_sample(domain: Domain, lam: float, count: int, seed: int, *,
              chunk_size: int = 65536, n_batches: int = 10) -> QuadratureRule:
    """Importance-weighted Monte Carlo rule for ``mu_lam``.

    Proposals are uniform on the Frobenius ball of radius ``sqrt(rank)``
    (which contains the operator-norm ball); proposals with
    ``||Z||_op >= 1`` are rejected and survivors carry weight
    ``det(I - Z Z^*)^(lam - p)``.
    """
    domain.check_weight(lam)
    if count < 1:
        raise QuadratureError("count must be positive")
    n, m = domain.shape
    real_dim = 2 * n * m
    radius = math.sqrt(domain.rank)
    kept, proposed, c = [], 0, 0
    total = 0
    while total < count:
        rng = _chunk_generator(seed, c)
        g = rng.standard_normal((chunk_size, real_dim))
        g /= np.linalg.norm(g, axis=1)[:, None]
        g *= (radius * rng.random(chunk_size) ** (1.0 / real_dim))[:, None]
        z = (g[:, 0::2] + 1j * g[:, 1::2]).reshape(chunk_size, n, m)
        z = z[_opnorm(z) < 1.0]
        proposed += chunk_size
        kept.append(z)
        total += len(z)
        c += 1
        if c >= 8 and total / proposed < MIN_ACCEPTANCE:
            raise QuadratureError(f"acceptance rate {total / proposed:.2e} below {MIN_ACCEPTANCE}")
    nodes = np.concatenate(kept)[:count]
    rate = total / proposed
    if rate < MIN_ACCEPTANCE:
        raise QuadratureError(f"acceptance rate {rate:.2e} below {MIN_ACCEPTANCE}")
    dens = _det_defect(nodes) ** (lam - domain.genus)
    weights = dens / dens.sum()
    k = max(1, min(n_batches, count))
    batches = np.linspace(0, count, k + 1).round().astype(int)
    return QuadratureRule("monte_carlo", nodes, weights, "stochastic", domain, float(lam),
                          int(seed), {"count": count, "chunk_size": chunk_size,
                                      "n_batches": k},
                          batches, float(rate))


def torus_rule(torus_dim: int, points_per_circle: int) -> QuadratureRule:
    """Product trapezoid grid of angles on ``T^dim`` (Haar probability).

    Exact for trigonometric polynomials of degree ``< points_per_circle`` in
    each angle; ``exp(i P theta)`` aliases to 1.
    """
    if points_per_circle < 1:
        raise QuadratureError("points_per_circle must be positive")
    theta = 2.0 * np.pi * np.arange(points_per_circle) / points_per_circle
    if torus_dim == 0:
        nodes = np.zeros((1, 0))
    else:
        nodes = np.stack(np.meshgrid(*([theta] * torus_dim), indexing="ij"), -1).reshape(-1, torus_dim)
    w = np.full(len(nodes), 1.0 / len(nodes))
    return QuadratureRule("torus_grid", nodes, w, points_per_circle - 1, params={
        "torus_dim": torus_dim, "points_per_circle": points_per_circle})


def haar_rule(n: int, m: int, count: int, seed: int) -> QuadratureRule:
    """Haar sample of ``S(U(n) x U(m))`` as block-diagonal ``(n+m)``-square unitaries."""
    rng = np.random.default_rng(seed)
    k = n + m
    out = np.zeros((count, k, k), dtype=complex)
    for i in range(count):
        u = unitary_group.rvs(n, random_state=rng) if n > 1 else np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
        v = unitary_group.rvs(m, random_state=rng) if m > 1 else np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
        c = np.linalg.det(u) * np.linalg.det(v)
        root = rng.integers(k)
        zeta = np.exp(-1j * (np.angle(c) + 2 * np.pi * root) / k)
        out[i, :n, :n] = zeta * u
        out[i, n:, n:] = zeta * v
    w = np.full(count, 1.0 / count)
    return QuadratureRule("haar_sample", out, w, "stochastic", seed=int(seed),
                          params={"n": n, "m": m, "count": count})


def _fsum_complex(values: np.ndarray) -> complex | float:
    re = math.fsum(np.real(values).tolist())
    if np.iscomplexobj(values):
        return complex(re, math.fsum(np.imag(values).tolist()))
    return re


def integrate(rule: QuadratureRule, integrand) -> Estimate:
    """Weighted sum of ``integrand`` over the rule's nodes.

    ``integrand`` is a callable on the node array or a precomputed array of
    values.  Summation is exactly rounded (``math.fsum``), so the result does
    not depend on node order.  Monte Carlo rules also report the delta-method
    standard error of the self-normalized estimator.
    """
    if callable(integrand):
        values = np.asarray(integrand(rule.nodes))
    else:
        values = np.asarray(integrand)
        if values.ndim == 0:
            values = np.full(len(rule), values[()])
    values = values.reshape(len(rule))
    if not np.all(np.isfinite(values)):
        raise QuadratureError("non-finite integrand value at a node")
    w = rule.weights
    value = _fsum_complex(w * values)
    stderr = 0.0
    if rule.stochastic:
        dev = np.abs(values - value) ** 2
        stderr = math.sqrt(math.fsum((w ** 2 * dev).tolist()))
    return Estimate(value, stderr)

