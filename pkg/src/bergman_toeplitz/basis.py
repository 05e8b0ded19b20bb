"""Orthonormal polynomial bases of truncated weighted Bergman spaces.

A :class:`BergmanBasis` holds the Gram matrix of the monomials ``z^alpha``
(``|alpha| <= cutoff``, graded order) and the change of basis ``X`` with
``X^* G X = I``; the orthonormal functions are ``e = (z^alpha) @ X``.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import cholesky, solve_triangular, LinAlgError
from scipy.special import gammaln

from .domains import Domain, MultiIndex, as_points, contains, index_array, multi_index_enumerate
from .quadrature import Estimate, QuadratureRule, integrate, mc_sample

__all__ = [
    "BergmanBasis",
    "BasisError",
    "monomial_norm",
    "closed_form_norms",
    "gram_matrix",
    "orthonormal_basis",
    "bergman_basis",
    "kernel_eval",
    "bergman_project",
    "monomial_values",
    "weight_mask",
    "assemble_moments",
]

FORMAT_VERSION = 1
MAX_CONDITION = 1e12
DEFAULT_MC_COUNT = 200_000
CHUNK = 16384


class BasisError(RuntimeError):
    pass


def monomial_values(points: np.ndarray, powers: np.ndarray) -> np.ndarray:
    """``z^alpha`` for every point ``(N, n, m)`` and exponent grid ``(d, n, m)`` -> ``(N, d)``."""
    n_pts = len(points)
    flat = points.reshape(n_pts, -1)
    pw = powers.reshape(len(powers), -1)
    top = int(pw.max()) if pw.size else 0
    table = np.ones((n_pts, flat.shape[1], top + 1), dtype=complex)
    for e in range(1, top + 1):
        table[:, :, e] = table[:, :, e - 1] * flat
    out = np.ones((n_pts, len(pw)), dtype=complex)
    for v in range(flat.shape[1]):
        out *= table[:, v, pw[:, v]]
    return out


def _weights_of(powers: np.ndarray) -> np.ndarray:
    """Torus weights (row sums, column sums) flattened, one row per exponent grid."""
    return np.concatenate([powers.sum(axis=2), powers.sum(axis=1)], axis=1)


def weight_mask(indices) -> np.ndarray:
    """Boolean ``(d, d)``: True where the two monomials share a torus weight."""
    wt = _weights_of(index_array(indices))
    return np.all(wt[:, None, :] == wt[None, :, :], axis=2)


def closed_form_norms(lam: float, powers: np.ndarray) -> np.ndarray:
    """``||z^alpha||^2 = alpha! Gamma(lam) / Gamma(lam + |alpha|)`` on the ball."""
    pw = powers.reshape(len(powers), -1)
    deg = pw.sum(axis=1)
    return np.exp(gammaln(pw + 1).sum(axis=1) + gammaln(lam) - gammaln(lam + deg))


def assemble_moments(rule: QuadratureRule, evaluate, values, *, per_batch: bool = False,
                     chunk: int = CHUNK):
    """``sum_s w_s f(z_s) conj(E_s)^T E_s`` for each value array ``f`` in ``values``.

    ``evaluate`` maps a point batch to the ``(N, d)`` matrix of basis values.
    Entry ``(i, j)`` of the result is ``<f E_j, E_i>``.  With
    ``per_batch=True`` also returns the unnormalized per-batch sums and the
    weight mass of each batch, for batch-means error estimates.
    """
    vals = [np.broadcast_to(np.asarray(v), (len(rule),)) if np.ndim(v) == 0 else np.asarray(v)
            for v in values]
    bounds = rule.batches if (per_batch and rule.batches is not None) else np.array([0, len(rule)])
    totals, batch_sums, batch_mass = None, [], []
    for b in range(len(bounds) - 1):
        acc = None
        for a in range(bounds[b], bounds[b + 1], chunk):
            e = min(a + chunk, bounds[b + 1])
            ev = evaluate(rule.nodes[a:e])
            evh = ev.conj().T
            w = rule.weights[a:e]
            part = [(evh * (w * v[a:e])) @ ev for v in vals]
            acc = part if acc is None else [x + y for x, y in zip(acc, part)]
        batch_sums.append(acc)
        batch_mass.append(float(rule.weights[bounds[b]:bounds[b + 1]].sum()))
        totals = acc if totals is None else [x + y for x, y in zip(totals, acc)]
    if per_batch:
        return totals, batch_sums, np.array(batch_mass)
    return totals


def monomial_norm(domain: Domain, lam: float, alpha, rule: QuadratureRule | None = None) -> Estimate:
    """``||z^alpha||^2_lam``: closed form on rank-one domains, otherwise a rule estimate."""
    domain.check_weight(lam)
    if not isinstance(alpha, MultiIndex):
        alpha = MultiIndex.from_grid(np.asarray(alpha).reshape(domain.shape))
    powers = alpha.grid[None]
    if domain.is_ball and rule is None:
        return Estimate(float(closed_form_norms(lam, powers)[0]), 0.0)
    if rule is None:
        raise BasisError(f"a quadrature rule is required for monomial norms on {domain}")
    est = integrate(rule, lambda z: np.abs(monomial_values(z, powers)[:, 0]) ** 2)
    return Estimate(float(np.real(est.value)), est.stderr)


def _check_condition(gram: np.ndarray) -> None:
    ev = np.linalg.eigvalsh(gram)
    if ev[0] <= 0 or ev[-1] / ev[0] > MAX_CONDITION:
        raise BasisError(f"Gram matrix condition number {ev[-1] / max(ev[0], 1e-300):.3e} exceeds "
                         f"{MAX_CONDITION:.0e}; truncation too deep for the integration accuracy")


def gram_matrix(domain: Domain, lam: float, cutoff: int,
                rule: QuadratureRule | None = None) -> np.ndarray:
    """``G[a, b] = <z^b, z^a>_lam`` over the graded index list.

    Entries between monomials of different torus weight are set to exactly
    zero.  Without a rule the rank-one closed form is used.
    """
    domain.check_weight(lam)
    indices = multi_index_enumerate(domain, cutoff)
    powers = index_array(indices)
    if rule is None:
        if not domain.is_ball:
            raise BasisError(f"a quadrature rule is required for the Gram matrix on {domain}")
        return np.diag(closed_form_norms(lam, powers)).astype(complex)
    gram = assemble_moments(rule, lambda z: monomial_values(z, powers), [1.0])[0]
    gram = np.where(weight_mask(indices), gram, 0.0)
    gram = 0.5 * (gram + gram.conj().T)
    _check_condition(gram)
    return gram


def orthonormal_basis(gram: np.ndarray) -> np.ndarray:
    """Inverse of the upper Cholesky factor ``R`` of ``G = R^* R``.

    The result is upper triangular, so the ``j``-th orthonormal function only
    involves monomials up to position ``j`` of the graded order.
    """
    gram = np.asarray(gram)
    try:
        r = cholesky(gram, lower=False)
    except LinAlgError as exc:
        raise BasisError("Gram matrix is not positive definite") from exc
    return solve_triangular(r, np.eye(len(gram), dtype=r.dtype), lower=False)


def _hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=float)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _complex_to_json(a: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(a, dtype=complex)]


def _complex_from_json(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True, eq=False)
class BergmanBasis:
    domain: Domain
    lam: float
    cutoff: int
    indices: tuple
    gram: np.ndarray
    transform: np.ndarray
    source: dict = field(default_factory=dict)

    @cached_property
    def basis_id(self) -> str:
        return _hash({"domain": self.domain.to_json(), "lam": self.lam,
                      "cutoff": self.cutoff, "source": self.source})

    @cached_property
    def powers(self) -> np.ndarray:
        return index_array(self.indices)

    @property
    def dim(self) -> int:
        return len(self.indices)

    @cached_property
    def degrees(self) -> np.ndarray:
        return self.powers.reshape(self.dim, -1).sum(axis=1)

    @cached_property
    def mask(self) -> np.ndarray:
        return weight_mask(self.indices)

    def monomials(self, points) -> np.ndarray:
        return monomial_values(as_points(self.domain, points), self.powers)

    def evaluate(self, points) -> np.ndarray:
        """Orthonormal functions at the points, ``(N, dim)``."""
        return self.monomials(points) @ self.transform

    def size_at(self, cutoff: int) -> int:
        return int(np.searchsorted(self.degrees, cutoff, side="right"))

    def truncate(self, cutoff: int) -> "BergmanBasis":
        """Leading block: the same orthonormal functions up to degree ``cutoff``."""
        if cutoff > self.cutoff:
            raise BasisError("cannot extend a basis by truncation")
        d = self.size_at(cutoff)
        return BergmanBasis(self.domain, self.lam, cutoff, self.indices[:d],
                            self.gram[:d, :d], self.transform[:d, :d], self.source)

    def to_json(self) -> dict:
        return {
            "format": "bergman-basis", "version": FORMAT_VERSION,
            "basis_id": self.basis_id, "domain": self.domain.to_json(), "lam": self.lam,
            "cutoff": self.cutoff, "source": self.source,
            "indices": [list(a.entries) for a in self.indices],
            "gram": _complex_to_json(self.gram),
            "transform": _complex_to_json(self.transform),
        }

    @classmethod
    def from_json(cls, data: dict) -> "BergmanBasis":
        if data.get("format") != "bergman-basis" or data.get("version") != FORMAT_VERSION:
            raise BasisError("not a bergman-basis artifact of a supported version")
        domain = Domain.from_json(data["domain"])
        indices = tuple(MultiIndex(tuple(e), domain.shape) for e in data["indices"])
        expected = multi_index_enumerate(domain, int(data["cutoff"]))
        if list(indices) != expected:
            raise BasisError("index list does not match the domain and cutoff")
        out = cls(domain, float(data["lam"]), int(data["cutoff"]), indices,
                  _complex_from_json(data["gram"]), _complex_from_json(data["transform"]),
                  data.get("source", {}))
        if data.get("basis_id") not in (None, out.basis_id):
            raise BasisError("basis_id does not match content")
        return out


def _source_of(rule: QuadratureRule | None) -> dict:
    if rule is None:
        return {"kind": "closed_form"}
    return {k: v for k, v in rule.describe().items()
            if k not in ("acceptance_rate", "effective_sample_size")}


def bergman_basis(domain: Domain, lam: float, cutoff: int, rule: QuadratureRule | None = None, *,
                  mc_count: int = DEFAULT_MC_COUNT, seed: int = 0,
                  cache_dir: str | os.PathLike | None = None) -> BergmanBasis:
    """Orthonormal basis of polynomials of degree ``<= cutoff`` in ``H^2_lam(D)``.

    Rank-one domains use the closed-form Gram unless a rule is passed.  Other
    domains need a rule; if none is given a Monte Carlo rule with
    ``mc_count`` samples and ``seed`` is generated and shared by all entries.
    """
    domain.check_weight(lam)
    if cutoff < 0:
        raise BasisError("cutoff must be nonnegative")
    if rule is None and not domain.is_ball:
        rule = mc_sample(domain, lam, mc_count, seed)
    source = _source_of(rule)
    path = None
    if cache_dir is not None:
        key = _hash({"domain": domain.to_json(), "lam": float(lam), "cutoff": cutoff,
                     "source": source})
        path = os.path.join(cache_dir, f"basis-{key}.json")
        if os.path.exists(path):
            with open(path) as fh:
                return BergmanBasis.from_json(json.load(fh))
    indices = tuple(multi_index_enumerate(domain, cutoff))
    gram = gram_matrix(domain, lam, cutoff, rule)
    basis = BergmanBasis(domain, float(lam), cutoff, indices, gram, orthonormal_basis(gram), source)
    if path is not None:
        os.makedirs(cache_dir, exist_ok=True)
        with open(path, "w") as fh:
            json.dump(basis.to_json(), fh)
    return basis


def kernel_eval(basis: BergmanBasis, z, w) -> complex | np.ndarray:
    """Truncated reproducing kernel ``sum_i e_i(z) conj(e_i(w))``.

    Accepts single points or equal-length batches (evaluated pairwise).
    """
    zp, wp = as_points(basis.domain, z), as_points(basis.domain, w)
    if not (np.all(contains(basis.domain, zp)) and np.all(contains(basis.domain, wp))):
        raise BasisError("kernel arguments must lie in the domain")
    out = np.sum(basis.evaluate(zp) * basis.evaluate(wp).conj(), axis=1)
    return complex(out[0]) if len(out) == 1 and np.ndim(z) <= 2 else out


def bergman_project(basis: BergmanBasis, f, rule: QuadratureRule) -> np.ndarray:
    """Coefficients ``<f, e_i>_lam`` of ``f`` in the orthonormal basis."""
    vals = np.asarray(f(rule.nodes)) if callable(f) else np.asarray(f)
    if not np.all(np.isfinite(vals)):
        raise BasisError("non-finite function value at a node")
    out = np.zeros(basis.dim, dtype=complex)
    for a in range(0, len(rule), CHUNK):
        e = min(a + CHUNK, len(rule))
        ev = monomial_values(rule.nodes[a:e], basis.powers) @ basis.transform
        out += ev.conj().T @ (rule.weights[a:e] * vals[a:e])
    return out
