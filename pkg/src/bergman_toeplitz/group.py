"""``SU(n, m)`` acting on the matrix ball and the holomorphic discrete series.

Elements are ``(n+m)``-square matrices ``g = [[A, B], [C, D]]`` preserving
``J = diag(I_n, -I_m)``.  They act by ``Z -> (AZ + B)(CZ + D)^-1`` and the
representation on ``H^2_lam`` is

    (pi_lam(g) f)(z) = j(g^-1, z)^(lam/p) f(g^-1 z),   j(g, Z) = det(CZ + D)^-p.

For non-integer ``lam/p`` the power is defined by continuing the phase of
``j(exp(-sX), z)`` from ``s = 0`` along the element's one-parameter path.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, schur

from .basis import BergmanBasis, monomial_values
from .domains import Domain, DomainError, _opnorm, as_points
from .quadrature import QuadratureRule, haar_rule, radial_rule, torus_rule
from .symbols import Symbol
from .toeplitz import OperatorMatrix, toeplitz_matrix

__all__ = [
    "GroupElement",
    "GroupError",
    "Subgroup",
    "torus_subgroup",
    "maximal_compact_subgroup",
    "rotation_subgroup",
    "hyperbolic_subgroup",
    "parabolic_subgroup",
    "real_form_subgroup",
    "subgroup_from_name",
    "mobius_apply",
    "pkp_factorize",
    "pkp_assemble",
    "jacobian_factor",
    "continued_power",
    "pi_lambda_matrix",
    "intertwine_defect",
    "translate_symbol",
    "average_symbol",
    "average_operator",
    "invariance_defect",
]

MEMBERSHIP_TOL = 1e-10
MAX_PHASE_STEP = np.pi / 4


class GroupError(ValueError):
    pass


def _jmat(n: int, m: int) -> np.ndarray:
    return np.diag(np.r_[np.ones(n), -np.ones(m)]).astype(complex)


@dataclass(frozen=True, eq=False)
class GroupElement:
    """An element of ``SU(n, m)``, optionally with a path ``exp(s X)``, ``s in [0, t]``."""

    matrix: np.ndarray
    n: int
    m: int
    generator: np.ndarray | None = None
    t: float | None = None
    tol: float = MEMBERSHIP_TOL

    def __post_init__(self):
        g = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", g)
        if g.shape != (self.n + self.m,) * 2:
            raise GroupError(f"matrix shape {g.shape} does not match SU({self.n},{self.m})")
        if self.membership_defect > self.tol:
            raise GroupError(f"not in SU({self.n},{self.m}): defect {self.membership_defect:.2e}")

    @property
    def membership_defect(self) -> float:
        g, j = self.matrix, _jmat(self.n, self.m)
        return float(max(np.max(np.abs(g.conj().T @ j @ g - j)), abs(np.linalg.det(g) - 1.0)))

    @property
    def blocks(self):
        n, g = self.n, self.matrix
        return g[:n, :n], g[:n, n:], g[n:, :n], g[n:, n:]

    @property
    def has_path(self) -> bool:
        return self.generator is not None

    @property
    def is_compact_type(self) -> bool:
        """Block diagonal, i.e. in ``S(U(n) x U(m))``; such elements preserve degree."""
        _, b, c, _ = self.blocks
        return bool(np.max(np.abs(b), initial=0) < 1e-12 and np.max(np.abs(c), initial=0) < 1e-12)

    @classmethod
    def identity(cls, n: int, m: int) -> "GroupElement":
        k = n + m
        return cls(np.eye(k), n, m, np.zeros((k, k), complex), 0.0)

    @classmethod
    def from_generator(cls, x, t: float, n: int, m: int) -> "GroupElement":
        x = np.asarray(x, dtype=complex)
        k = n + m
        j = _jmat(n, m)
        if np.max(np.abs(x.conj().T @ j + j @ x)) > 1e-12 or abs(np.trace(x)) > 1e-12:
            raise GroupError("generator is not in su(n,m)")
        return cls(expm(t * x), n, m, x, float(t))

    def inverse(self) -> "GroupElement":
        j = _jmat(self.n, self.m)
        inv = j @ self.matrix.conj().T @ j
        if self.has_path:
            return GroupElement(inv, self.n, self.m, self.generator, -self.t, self.tol)
        return GroupElement(inv, self.n, self.m, None, None, self.tol)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.matrix @ other.matrix, self.n, self.m, tol=self.tol * 10)

    def path_point(self, s) -> np.ndarray:
        """``exp(s X)`` for an array of times ``s``."""
        if not self.has_path:
            raise GroupError("element has no path record")
        x = self.generator
        # eigendecomposition is unreliable for nilpotent generators; fall back to expm
        return np.array([expm(si * x) for si in np.atleast_1d(s)])

    def to_json(self) -> dict:
        def c(a):
            return [[[float(v.real), float(v.imag)] for v in row] for row in a]
        out = {"n": self.n, "m": self.m, "matrix": c(self.matrix),
               "membership_defect": self.membership_defect}
        if self.has_path:
            out["generator"] = c(self.generator)
            out["t"] = self.t
        return out


def _as_element(g, n=None, m=None) -> GroupElement:
    if isinstance(g, GroupElement):
        return g
    g = np.asarray(g, dtype=complex)
    if n is None:
        raise GroupError("raw matrices need (n, m)")
    return GroupElement(g, n, m)


# -- action -----------------------------------------------------------------

def _cz_d(g: GroupElement, pts: np.ndarray) -> np.ndarray:
    _, _, c, d = g.blocks
    return np.einsum("ij,njk->nik", c, pts) + d


def mobius_apply(g, z, domain: Domain | None = None, *, check: bool = True) -> np.ndarray:
    """``(AZ + B)(CZ + D)^-1`` for a point or batch; result returned as a batch."""
    g = _as_element(g)
    dom = domain or Domain("matrix_ball" if g.m > 1 else "unit_ball", g.n, g.m)
    pts = as_points(dom, z)
    a, b, _, _ = g.blocks
    den = _cz_d(g, pts)
    if np.any(1.0 / np.linalg.cond(den) < 1e-14):
        raise GroupError("CZ + D is numerically singular")
    num = np.einsum("ij,njk->nik", a, pts) + b
    # W = num den^-1  <=>  den^T W^T = num^T
    w = np.swapaxes(np.linalg.solve(np.swapaxes(den, 1, 2), np.swapaxes(num, 1, 2)), 1, 2)
    if check and not np.all(_opnorm(w) < 1.0):
        raise DomainError("image left the domain; the element is not in SU(n,m)")
    return w


def pkp_factorize(mat, n: int, m: int):
    """``M = [[I, p+], [0, I]] diag(k1, k2) [[I, 0], [p-, I]]``.

    Returns ``(p_plus, (k1, k2), p_minus)`` with ``p+ = B D^-1``,
    ``k = (A - B D^-1 C, D)`` and ``p- = D^-1 C``.
    """
    mat = np.asarray(mat, dtype=complex)
    a, b, c, d = mat[:n, :n], mat[:n, n:], mat[n:, :n], mat[n:, n:]
    if np.linalg.cond(d) > 1e13:
        raise GroupError("D block is singular")
    dinv_c = np.linalg.solve(d, c)
    p_plus = np.linalg.solve(d.T, b.T).T
    return p_plus, (a - b @ dinv_c, d), dinv_c


def pkp_assemble(p_plus, k, p_minus) -> np.ndarray:
    n, m = p_plus.shape
    up = np.eye(n + m, dtype=complex)
    up[:n, n:] = p_plus
    lo = np.eye(n + m, dtype=complex)
    lo[n:, :n] = p_minus
    mid = np.zeros((n + m, n + m), dtype=complex)
    mid[:n, :n], mid[n:, n:] = k
    return up @ mid @ lo


def jacobian_factor(g, z, domain: Domain | None = None) -> np.ndarray:
    """``j(g, Z) = det(CZ + D)^-(n+m)``, the complex Jacobian of ``Z -> gZ``."""
    g = _as_element(g)
    dom = domain or Domain("matrix_ball" if g.m > 1 else "unit_ball", g.n, g.m)
    det = np.linalg.det(_cz_d(g, as_points(dom, z)))
    if np.any(np.abs(det) < 1e-300):
        raise GroupError("CZ + D is singular")
    return det ** -(g.n + g.m)


def continued_power(g: GroupElement, pts: np.ndarray, lam: float, *, steps: int = 16,
                    max_steps: int = 1 << 16) -> np.ndarray:
    """``j(g, z)^(lam/p)`` continued along the path ``exp(s X)``, ``s: 0 -> t``.

    ``log j`` is tracked on a uniform grid of the path; the grid is refined
    until every phase increment of ``j`` is below ``pi/4``.
    """
    p = g.n + g.m
    if not g.has_path:
        raise GroupError("fractional powers need a path record")
    if g.t == 0:
        return np.ones(len(pts), dtype=complex)
    while steps <= max_steps:
        s = np.linspace(0.0, g.t, steps + 1)
        mats = g.path_point(s)
        n = g.n
        c, d = mats[:, n:, :n], mats[:, n:, n:]
        den = np.einsum("sij,njk->snik", c, pts) + d[:, None]
        det = np.linalg.det(den)
        incr = np.angle(det[1:] / det[:-1])
        if np.max(np.abs(p * incr), initial=0.0) < MAX_PHASE_STEP:
            phase = np.sum(incr, axis=0)
            log_abs = np.log(np.abs(det[-1]))
            return np.exp(-lam * (log_abs + 1j * phase))
        steps *= 2
    raise GroupError("phase continuation did not converge")


def _probe_points(domain: Domain, count: int, seed: int = 7) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n, m = domain.shape
    out = []
    while sum(len(x) for x in out) < count:
        z = (rng.standard_normal((4 * count, n, m)) + 1j * rng.standard_normal((4 * count, n, m)))
        z *= 0.8 / np.sqrt(2 * n * m)
        out.append(z[_opnorm(z) < 0.9])
    return np.concatenate(out)[:count]


def _pi_values(basis: BergmanBasis, g: GroupElement, pts: np.ndarray) -> np.ndarray:
    """``(pi(g) e_j)(z_s)`` as an ``(N, dim)`` array."""
    ginv = g.inverse()
    mult = continued_power(ginv, pts, basis.lam)
    moved = mobius_apply(ginv, pts, basis.domain, check=False)
    return mult[:, None] * (monomial_values(moved, basis.powers) @ basis.transform)


def pi_lambda_matrix(basis: BergmanBasis, g: GroupElement, *, lam: float | None = None,
                     rule: QuadratureRule | None = None, exact: bool = True) -> OperatorMatrix:
    """Matrix of ``pi_lam(g)`` on the truncated space, ``U[i, j] = <pi(g) e_j, e_i>``.

    Block-diagonal (compact-type) elements preserve degree, so the truncated
    space is invariant and the matrix is exact: on rank-one domains it is
    computed by an exact radial rule, otherwise by interpolation at probe
    points.  Other elements need ``exact=False`` and a rule; the result is
    then a compression only and is flagged as such.
    """
    if lam is not None and not np.isclose(lam, basis.lam):
        raise GroupError(f"lam={lam} does not match the basis weight {basis.lam}")
    if (g.n, g.m) != basis.domain.shape:
        raise GroupError("element does not act on this domain")
    meta = {"element": g.to_json(), "exact": bool(g.is_compact_type)}
    if g.is_compact_type:
        if basis.domain.is_ball:
            r = radial_rule(basis.domain, basis.lam, basis.cutoff)
            vals = _pi_values(basis, g, r.nodes)
            ev = monomial_values(r.nodes, basis.powers) @ basis.transform
            u = (ev.conj().T * r.weights) @ vals
            meta["method"] = "radial_rule"
        else:
            pts = _probe_points(basis.domain, 3 * basis.dim)
            ev = monomial_values(pts, basis.powers) @ basis.transform
            vals = _pi_values(basis, g, pts)
            u, *_ = np.linalg.lstsq(ev, vals, rcond=None)
            res = np.max(np.abs(ev @ u - vals)) / max(np.max(np.abs(vals)), 1e-300)
            meta["method"] = "interpolation"
            meta["interpolation_residual"] = float(res)
        return OperatorMatrix(u, basis.basis_id, basis.lam, meta)
    if exact:
        raise GroupError("non-compact elements do not preserve the truncated space; "
                         "pass exact=False with a rule for a compression")
    if rule is None:
        raise GroupError("a rule is required for non-compact elements")
    vals = _pi_values(basis, g, rule.nodes)
    ev = monomial_values(rule.nodes, basis.powers) @ basis.transform
    u = (ev.conj().T * rule.weights) @ vals
    meta["method"] = "rule_projection"
    meta["rule"] = rule.describe()
    return OperatorMatrix(u, basis.basis_id, basis.lam, meta)


def translate_symbol(symbol: Symbol, h: GroupElement, domain: Domain) -> Symbol:
    """``phi_h(z) = phi(h^-1 z)``."""
    hinv = h.inverse()
    return Symbol("oracle", lambda p: symbol(mobius_apply(hinv, p, domain, check=False)),
                  symbol.bound, "none", f"translate[{symbol.label}]", {}, symbol.real)


def intertwine_defect(basis: BergmanBasis, h: GroupElement, symbol: Symbol,
                      rule: QuadratureRule) -> float:
    """``|| pi(h) T_phi - T_{phi_h} pi(h) ||_2``."""
    u = pi_lambda_matrix(basis, h).entries
    t = toeplitz_matrix(basis, symbol, rule).entries
    th = toeplitz_matrix(basis, translate_symbol(symbol, h, basis.domain), rule).entries
    return float(np.linalg.norm(u @ t - th @ u, 2))


# -- subgroups --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Subgroup:
    """A connected subgroup with a parametrization by generator coordinates.

    ``generators`` span its Lie algebra; ``element(theta)`` is
    ``exp(sum theta_k X_k)``, recorded with path ``X = sum theta_k X_k, t = 1``.
    """

    name: str
    n: int
    m: int
    generators: tuple
    compact: bool
    invariance: str
    period: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.generators)

    def element(self, theta) -> GroupElement:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if len(theta) != self.dim:
            raise GroupError(f"{self.name} has {self.dim} coordinates, got {len(theta)}")
        x = sum((th * g for th, g in zip(theta, self.generators)),
                np.zeros((self.n + self.m,) * 2, complex))
        return GroupElement.from_generator(x, 1.0, self.n, self.m)

    def sample(self, count: int, seed: int, scale: float = 1.0) -> list[GroupElement]:
        """Random elements; compact groups use Haar measure, others a Gaussian in the algebra."""
        rng = np.random.default_rng(seed)
        if self.name == "maximal_compact":
            return [_unitary_with_path(g, self.n, self.m) for g in
                    haar_rule(self.n, self.m, count, seed).nodes]
        if self.compact:
            return [self.element(rng.random(self.dim) * self.period) for _ in range(count)]
        return [self.element(scale * rng.standard_normal(self.dim)) for _ in range(count)]

    def rule(self, points_per_circle: int = 16, count: int = 256, seed: int = 0) -> QuadratureRule:
        """Integration rule on the subgroup (Haar probability); compact groups only."""
        if not self.compact:
            raise GroupError(f"{self.name} is not compact; no Haar probability")
        if self.name == "maximal_compact":
            return haar_rule(self.n, self.m, count, seed)
        r = torus_rule(self.dim, points_per_circle)
        return QuadratureRule(r.kind, r.nodes * (self.period / (2 * np.pi)), r.weights,
                              r.exactness, params={**r.params, "subgroup": self.name})

    def elements_of_rule(self, rule: QuadratureRule) -> list[GroupElement]:
        if rule.kind == "haar_sample":
            return [_unitary_with_path(g, self.n, self.m) for g in rule.nodes]
        return [self.element(theta) for theta in rule.nodes]

    def describe(self) -> dict:
        return {"name": self.name, "n": self.n, "m": self.m, "dim": self.dim,
                "compact": self.compact, **self.params}


def _unitary_with_path(g: np.ndarray, n: int, m: int) -> GroupElement:
    """Attach a trace-free skew-Hermitian logarithm to a block unitary of det 1."""
    k = n + m
    x = np.zeros((k, k), dtype=complex)
    angles = []
    vecs = []
    for sl in (slice(0, n), slice(n, k)):
        t, z = schur(g[sl, sl], output="complex")
        ang = np.angle(np.diag(t))
        angles.append(ang)
        vecs.append((sl, z))
    total = np.concatenate(angles).sum()
    shift = int(np.round(total / (2 * np.pi)))
    angles[0][0] -= 2 * np.pi * shift
    for ang, (sl, z) in zip(angles, vecs):
        x[sl, sl] = z @ np.diag(1j * ang) @ z.conj().T
    return GroupElement(g, n, m, x, 1.0, tol=1e-9)


def torus_subgroup(n: int, m: int) -> Subgroup:
    """Diagonal maximal torus of ``SU(n, m)``; coordinates ``i(E_kk - E_NN)``."""
    k = n + m
    gens = []
    for a in range(k - 1):
        x = np.zeros((k, k), dtype=complex)
        x[a, a], x[k - 1, k - 1] = 1j, -1j
        gens.append(x)
    return Subgroup("torus", n, m, tuple(gens), True, "torus", 2 * np.pi)


def rotation_subgroup() -> Subgroup:
    """``U(1)`` in ``SU(1,1)``: ``theta`` rotates the disk by ``e^(i theta)``."""
    return Subgroup("rotation", 1, 1, (np.diag([0.5j, -0.5j]),), True, "rotation", 2 * np.pi)


def maximal_compact_subgroup(n: int, m: int) -> Subgroup:
    """``S(U(n) x U(m))``; coordinates are those of the torus, sampling is Haar."""
    t = torus_subgroup(n, m)
    return Subgroup("maximal_compact", n, m, t.generators, True, "maximal_compact", 2 * np.pi)


def hyperbolic_subgroup() -> Subgroup:
    """``SO_0(1,1)``: ``[[cosh t, sinh t], [sinh t, cosh t]]``."""
    return Subgroup("hyperbolic", 1, 1, (np.array([[0, 1], [1, 0]], complex),), False,
                    "hyperbolic")


def parabolic_subgroup() -> Subgroup:
    """Unipotent ``N`` fixing the boundary point ``1``; ``exp(tX) = I + tX``."""
    return Subgroup("parabolic_n", 1, 1, (np.array([[1j, -1j], [1j, -1j]]),), False,
                    "parabolic_n")


def real_form_subgroup(n: int) -> Subgroup:
    """``SO_0(n, 1)`` as the real points of ``SU(n, 1)``."""
    k = n + 1
    gens = []
    for a in range(n):
        for b in range(a + 1, n):
            x = np.zeros((k, k), dtype=complex)
            x[a, b], x[b, a] = -1, 1
            gens.append(x)
    for a in range(n):
        x = np.zeros((k, k), dtype=complex)
        x[a, n] = x[n, a] = 1
        gens.append(x)
    return Subgroup("real_form", n, 1, tuple(gens), False, "real_form")


def subgroup_from_name(name: str, n: int = 1, m: int = 1) -> Subgroup:
    table = {"torus": lambda: torus_subgroup(n, m),
             "maximal_compact": lambda: maximal_compact_subgroup(n, m),
             "rotation": rotation_subgroup, "hyperbolic": hyperbolic_subgroup,
             "parabolic_n": parabolic_subgroup,
             "real_form": lambda: real_form_subgroup(n)}
    if name not in table:
        raise GroupError(f"unknown subgroup {name!r}")
    return table[name]()


# -- averaging --------------------------------------------------------------

def average_symbol(subgroup: Subgroup, symbol: Symbol, rule: QuadratureRule,
                   domain: Domain | None = None) -> Symbol:
    """``phi_hat(z) = int_H phi(h^-1 z) dh`` by the subgroup rule."""
    if not subgroup.compact:
        raise GroupError(f"cannot average over the non-compact group {subgroup.name}")
    dom = domain or Domain("matrix_ball" if subgroup.m > 1 else "unit_ball", subgroup.n,
                           subgroup.m)
    inverses = [h.inverse() for h in subgroup.elements_of_rule(rule)]
    weights = rule.weights

    def evaluator(pts):
        acc = np.zeros(len(pts), dtype=complex)
        for w, hi in zip(weights, inverses):
            acc += w * symbol(mobius_apply(hi, pts, dom, check=False))
        return acc.real if symbol.real else acc

    return Symbol("oracle", evaluator, symbol.bound, subgroup.invariance,
                  f"average[{subgroup.name}]({symbol.label})", {"rule": rule.describe()},
                  symbol.real)


def average_operator(subgroup: Subgroup, basis: BergmanBasis, t: OperatorMatrix,
                     rule: QuadratureRule) -> OperatorMatrix:
    """``int_H pi(h) T pi(h)^-1 dh`` by the subgroup rule."""
    if not subgroup.compact:
        raise GroupError(f"cannot average over the non-compact group {subgroup.name}")
    if t.basis_id != basis.basis_id:
        raise GroupError("operator and basis do not match")
    acc = np.zeros_like(t.entries, dtype=complex)
    for w, h in zip(rule.weights, subgroup.elements_of_rule(rule)):
        u = pi_lambda_matrix(basis, h).entries
        acc += w * (u @ t.entries @ u.conj().T)
    return OperatorMatrix(acc, basis.basis_id, basis.lam,
                          {"op": "average", "subgroup": subgroup.describe(),
                           "rule": rule.describe()})


def invariance_defect(symbol: Symbol, subgroup: Subgroup, domain: Domain, *, elements: int = 50,
                      points: int = 200, seed: int = 0, scale: float = 0.7) -> dict:
    """Max ``|phi(h z) - phi(z)|`` over sampled elements and points."""
    hs = subgroup.sample(elements, seed, scale)
    pts = _probe_points(domain, points, seed + 1)
    base = symbol(pts)
    worst = 0.0
    for h in hs:
        moved = mobius_apply(h, pts, domain)
        worst = max(worst, float(np.max(np.abs(symbol(moved) - base))))
    return {"max_defect": worst, "elements": elements, "points": points,
            "max_membership_defect": max(h.membership_defect for h in hs)}
