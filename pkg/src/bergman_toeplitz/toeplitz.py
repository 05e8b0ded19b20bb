"""Truncated Toeplitz matrices and commutator measurements.

Entry ``(i, j)`` of a Toeplitz matrix is ``<phi e_j, e_i>_lam`` over the
orthonormal basis; with ``E`` the monomial values at the rule nodes and ``X``
the basis transform this is ``X^* (E^* diag(w phi) E) X``.

Truncation does not commute with multiplication by a general symbol, so the
product of two truncated Toeplitz matrices is not the truncation of the
operator product.  :func:`commutator_study` therefore builds both matrices
on a padded basis (``cutoff + pad``) and reports the leading block of the
commutator, which converges to the compression of the true commutator.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .basis import BergmanBasis, assemble_moments, bergman_basis, monomial_values
from .quadrature import QuadratureRule
from .symbols import Symbol

__all__ = [
    "OperatorMatrix",
    "ToeplitzError",
    "CommutatorNorm",
    "CommutatorResult",
    "toeplitz_matrix",
    "toeplitz_matrices",
    "commutator_norm",
    "commutator_study",
    "significance",
    "diff_exports",
]

ZERO_SE = 3.0
NONZERO_SE = 10.0
# symbols invariant under the diagonal torus give weight-block-diagonal matrices
_TORUS_STABLE = ("torus", "maximal_compact", "rotation")


class ToeplitzError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    basis_id: str
    lam: float
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def _check(self, other: "OperatorMatrix") -> None:
        if not isinstance(other, OperatorMatrix):
            raise ToeplitzError("operand is not an OperatorMatrix")
        if other.basis_id != self.basis_id:
            raise ToeplitzError(f"basis mismatch: {self.basis_id} vs {other.basis_id}")
        if other.entries.shape != self.entries.shape:
            raise ToeplitzError("dimension mismatch")

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.entries @ other.entries, self.basis_id, self.lam,
                              {"op": "product"})

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.entries - other.entries, self.basis_id, self.lam,
                              {"op": "difference"})

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.basis_id, self.lam, {"op": "adjoint"})

    def block(self, d: int) -> "OperatorMatrix":
        return OperatorMatrix(self.entries[:d, :d], self.basis_id + f"[:{d}]", self.lam,
                              {**self.meta, "compressed_to": d})

    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2)) if self.entries.size else 0.0

    def to_json(self) -> dict:
        return {"format": "operator-matrix", "version": 1, "basis_id": self.basis_id,
                "lam": self.lam, "meta": self.meta,
                "entries": [[[float(v.real), float(v.imag)] for v in row]
                            for row in np.asarray(self.entries, dtype=complex)]}

    @classmethod
    def from_json(cls, data: dict) -> "OperatorMatrix":
        if data.get("format") != "operator-matrix":
            raise ToeplitzError("not an operator-matrix export")
        arr = np.asarray(data["entries"], dtype=float)
        if arr.size == 0:
            arr = np.zeros((0, 0, 2))
        return cls(arr[..., 0] + 1j * arr[..., 1], data["basis_id"], float(data["lam"]),
                   data.get("meta", {}))


def _check_rule(basis: BergmanBasis, rule: QuadratureRule) -> None:
    if rule.domain is not None and rule.domain != basis.domain:
        raise ToeplitzError(f"rule is on {rule.domain}, basis on {basis.domain}")
    if rule.nodes.shape[1:] != basis.domain.shape:
        raise ToeplitzError("rule nodes do not match the basis domain shape")
    if rule.lam is not None and not np.isclose(rule.lam, basis.lam):
        raise ToeplitzError(f"rule weight lam={rule.lam} differs from basis lam={basis.lam}")


def _symbol_values(symbol: Symbol, nodes: np.ndarray) -> np.ndarray:
    vals = np.asarray(symbol(nodes))
    if not np.all(np.isfinite(vals)):
        raise ToeplitzError(f"symbol {symbol.label} is not finite at some node")
    if np.max(np.abs(vals), initial=0.0) > symbol.bound * (1 + 1e-9):
        raise ToeplitzError(f"symbol {symbol.label} exceeds its declared bound {symbol.bound}")
    return vals


def _finish(basis: BergmanBasis, moment: np.ndarray, symbol: Symbol) -> np.ndarray:
    if symbol.invariance in _TORUS_STABLE:
        moment = np.where(basis.mask, moment, 0.0)
    x = basis.transform
    return x.conj().T @ moment @ x


def toeplitz_matrices(basis: BergmanBasis, symbols: list[Symbol], rule: QuadratureRule, *,
                      per_batch: bool = False):
    """Assemble several Toeplitz matrices in one pass over the rule.

    With ``per_batch=True`` (stochastic rules) also returns, for every batch
    of the rule, the matrices built from that batch alone.
    """
    _check_rule(basis, rule)
    values = [_symbol_values(s, rule.nodes) for s in symbols]
    powers = basis.powers
    out = assemble_moments(rule, lambda z: monomial_values(z, powers), values,
                           per_batch=per_batch)
    meta = {"rule": rule.describe()}
    if not per_batch:
        return [OperatorMatrix(_finish(basis, mom, s), basis.basis_id, basis.lam,
                               {**meta, "symbol": s.describe()})
                for mom, s in zip(out, symbols)]
    totals, sums, mass = out
    mats = [OperatorMatrix(_finish(basis, mom, s), basis.basis_id, basis.lam,
                           {**meta, "symbol": s.describe()})
            for mom, s in zip(totals, symbols)]
    batches = [[_finish(basis, mom / w, s) for mom, s in zip(batch, symbols)]
               for batch, w in zip(sums, mass)]
    return mats, batches


def toeplitz_matrix(basis: BergmanBasis, symbol: Symbol, rule: QuadratureRule) -> OperatorMatrix:
    """``T_phi`` on the truncated space: entry ``(i, j) = <phi e_j, e_i>_lam``."""
    return toeplitz_matrices(basis, [symbol], rule)[0]


@dataclass(frozen=True)
class CommutatorNorm:
    spectral: float
    frobenius: float


def commutator_norm(a: OperatorMatrix, b: OperatorMatrix) -> CommutatorNorm:
    """Spectral and Frobenius norms of ``AB - BA``."""
    a._check(b)
    c = a.entries @ b.entries - b.entries @ a.entries
    if c.size == 0:
        return CommutatorNorm(0.0, 0.0)
    return CommutatorNorm(float(np.linalg.norm(c, 2)), float(np.linalg.norm(c, "fro")))


def significance(value: float, stderr: float) -> str:
    """``zero`` below 3 SE, ``nonzero`` above 10 SE, otherwise ``inconclusive``."""
    if value < ZERO_SE * stderr:
        return "zero"
    if value > NONZERO_SE * stderr:
        return "nonzero"
    return "inconclusive"


@dataclass
class CommutatorResult:
    spectral: float
    frobenius: float
    stderr: float
    verdict: str | None
    cutoff: int
    pad: int
    dim: int
    basis_id: str
    a: OperatorMatrix | None = None
    b: OperatorMatrix | None = None
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"spectral": self.spectral, "frobenius": self.frobenius, "stderr": self.stderr,
               "verdict": self.verdict, "cutoff": self.cutoff, "pad": self.pad, "dim": self.dim,
               "basis_id": self.basis_id}
        out.update(self.extras)
        return out


def commutator_study(sym_a: Symbol, sym_b: Symbol, rule: QuadratureRule, cutoff: int, *,
                     pad: int = 0, basis: BergmanBasis | None = None,
                     keep_matrices: bool = False) -> CommutatorResult:
    """Compressed commutator ``P_c [T_a, T_b] P_c`` at truncation ``cutoff``.

    Both Toeplitz matrices are assembled on the basis of degree
    ``cutoff + pad`` (built from ``rule`` on matrix balls, closed form on
    rank-one domains) and the leading block of degree ``<= cutoff`` of the
    commutator is reported.  For stochastic rules the standard error comes
    from batch means: with ``C_k`` the commutator built from batch ``k``,
    ``SE^2 = sum ||C_k - mean C||_2^2 / (K (K - 1))``.
    """
    domain, lam = rule.domain, rule.lam
    if domain is None or lam is None:
        raise ToeplitzError("commutator_study needs a rule tied to a domain and weight")
    total = cutoff + pad
    if basis is None:
        basis = bergman_basis(domain, lam, total, None if domain.is_ball else rule)
    elif basis.cutoff != total:
        basis = basis.truncate(total)
    d = basis.size_at(cutoff)
    stochastic = rule.stochastic and rule.batches is not None and len(rule.batches) > 2
    if stochastic:
        (a, b), batches = toeplitz_matrices(basis, [sym_a, sym_b], rule, per_batch=True)
    else:
        a, b = toeplitz_matrices(basis, [sym_a, sym_b], rule)
    c = (a.entries @ b.entries - b.entries @ a.entries)[:d, :d]
    spectral = float(np.linalg.norm(c, 2)) if c.size else 0.0
    frob = float(np.linalg.norm(c, "fro"))
    stderr, verdict = 0.0, None
    if stochastic:
        cs = np.array([(ta @ tb - tb @ ta)[:d, :d] for ta, tb in batches])
        cbar = cs.mean(axis=0)
        k = len(cs)
        stderr = float(np.sqrt(sum(np.linalg.norm(x - cbar, 2) ** 2 for x in cs) / (k * (k - 1))))
        verdict = significance(spectral, stderr)
    return CommutatorResult(spectral, frob, stderr, verdict, cutoff, pad, d, basis.basis_id,
                            a if keep_matrices else None, b if keep_matrices else None,
                            {"symbols": [sym_a.label, sym_b.label], "rule": rule.describe()})


def diff_exports(path_a: str, path_b: str, tol: float) -> tuple[bool, float]:
    """Compare two operator-matrix JSON exports entrywise; returns (within tol, max diff)."""
    with open(path_a) as fh:
        a = OperatorMatrix.from_json(json.load(fh))
    with open(path_b) as fh:
        b = OperatorMatrix.from_json(json.load(fh))
    if a.entries.shape != b.entries.shape:
        return False, float("inf")
    diff = float(np.max(np.abs(a.entries - b.entries), initial=0.0))
    return diff <= tol and a.basis_id == b.basis_id, diff
