"""Torus weights of monomials and the commutant test for multiplicity-freeness.

The diagonal torus ``diag(e^{is}, e^{it})`` of ``SU(n, m)`` acts on
``z_jk`` by ``e^{i(s_j - t_k)}``, so the monomial ``z^alpha`` is a weight
vector whose character is fixed by the row and column sums of ``alpha``.
Two raw weights ``(r, c)``, ``(r', c')`` give the same character on the
trace-free torus iff ``r - r' = q 1_n`` and ``c - c' = -q 1_m``; comparing
the totals gives ``n q = -m q``, hence ``q = 0``.  Raw vectors are therefore
compared directly.  The scalar twist ``j^(lam/p)`` of ``pi_lam`` multiplies
all monomials of one degree by the same character and is left out.
"""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, svd

from .domains import Domain, MultiIndex, count_monomials, make_domain, multi_index_enumerate

__all__ = [
    "Weight",
    "CensusReport",
    "weight_of",
    "weight_census",
    "is_multiplicity_free_torus",
    "torus_generators",
    "commutant_basis",
    "algebra_is_commutative",
    "q_shift_families",
]

NULL_RCOND = 1e-8
COMMUTE_TOL = 1e-8


@dataclass(frozen=True, order=True)
class Weight:
    row_sums: tuple[int, ...]
    col_sums: tuple[int, ...]

    def __post_init__(self):
        if sum(self.row_sums) != sum(self.col_sums):
            raise ValueError("row and column sums disagree")

    @property
    def degree(self) -> int:
        return sum(self.row_sums)

    def __str__(self):
        return f"rows={list(self.row_sums)} cols={list(self.col_sums)}"


def weight_of(alpha) -> Weight:
    grid = alpha.grid if isinstance(alpha, MultiIndex) else np.asarray(alpha, dtype=int)
    if grid.ndim == 1:
        grid = grid[:, None]
    return Weight(tuple(int(x) for x in grid.sum(axis=1)), tuple(int(x) for x in grid.sum(axis=0)))


def _census_domain(n: int, m: int) -> Domain:
    return make_domain("unit_ball" if m == 1 else "matrix_ball", n, m)


@dataclass
class CensusReport:
    n: int
    m: int
    cutoff: int
    classes: dict  # Weight -> list[MultiIndex]

    @property
    def max_multiplicity(self) -> int:
        return max((len(v) for v in self.classes.values()), default=0)

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.classes.values())

    def witnesses(self) -> list[tuple[MultiIndex, MultiIndex]]:
        out = []
        for members in self.classes.values():
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    out.append((members[i], members[j]))
        return out

    def degree_slice(self, degree: int) -> "CensusReport":
        return CensusReport(self.n, self.m, self.cutoff,
                            {w: v for w, v in self.classes.items() if w.degree == degree})

    def multiplicities(self) -> dict:
        return {w: len(v) for w, v in self.classes.items()}

    def to_json(self) -> dict:
        rows = []
        for w in sorted(self.classes):
            rows.append({"rows": list(w.row_sums), "cols": list(w.col_sums),
                         "multiplicity": len(self.classes[w]),
                         "indices": [a.grid.tolist() for a in self.classes[w]]})
        return {"n": self.n, "m": self.m, "cutoff": self.cutoff, "weights": rows,
                "distinct_weights": len(rows), "monomials": self.total,
                "max_multiplicity": self.max_multiplicity,
                "witness_pairs": [[a.grid.tolist(), b.grid.tolist()] for a, b in self.witnesses()]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["rows", "cols", "multiplicity", "witnesses"])
        for w in sorted(self.classes):
            members = self.classes[w]
            wr.writerow([" ".join(map(str, w.row_sums)), " ".join(map(str, w.col_sums)),
                         len(members), ";".join(str(a.grid.tolist()) for a in members)])
        return buf.getvalue()


def weight_census(n: int, m: int, cutoff: int) -> CensusReport:
    """Group the monomials of degree ``<= cutoff`` on ``D_{n,m}`` by torus weight."""
    classes = defaultdict(list)
    for alpha in multi_index_enumerate(_census_domain(n, m), cutoff):
        classes[weight_of(alpha)].append(alpha)
    report = CensusReport(n, m, cutoff, dict(classes))
    assert report.total == count_monomials(n * m, cutoff)
    return report


def q_shift_families(report: CensusReport) -> bool:
    """For ``2 x 2`` grids: every class is ``{alpha + q [[1,-1],[-1,1]]}`` for consecutive q."""
    if (report.n, report.m) != (2, 2):
        raise ValueError("q-shift families are defined for 2 x 2 grids")
    shift = np.array([[1, -1], [-1, 1]])
    for members in report.classes.values():
        grids = sorted((a.grid for a in members), key=lambda g: g[0, 0])
        base = grids[0]
        if any(not np.array_equal(g, base + q * shift) for q, g in enumerate(grids)):
            return False
        # the family must be complete: the next shift leaves the nonnegative cone
        if np.all(base - shift >= 0) or np.all(grids[-1] + shift >= 0):
            return False
    return True


def is_multiplicity_free_torus(n: int, m: int, cutoff: int):
    """``(True, None)`` if every weight occurs once, else ``(False, witness pair)``."""
    report = weight_census(n, m, cutoff)
    w = report.witnesses()
    return (not w, w[0] if w else None)


_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)


def torus_generators(n: int, m: int, cutoff: int, *, group_elements: bool = True) -> list[np.ndarray]:
    """Torus action on the monomials of degree ``<= cutoff`` (diagonal matrices).

    Returns the infinitesimal generators for the basis ``i(E_kk - E_NN)`` of
    the torus algebra and, with ``group_elements``, ``dim`` group elements at
    angles ``2 pi sqrt(prime)`` (rationally independent).  Entry for
    ``z^alpha`` under ``diag(e^{is}, e^{it})`` acting by ``f -> f(h^-1 .)``
    is ``exp(-i(s . rows - t . cols))``.
    """
    alphas = multi_index_enumerate(_census_domain(n, m), cutoff)
    rows = np.array([a.grid.sum(axis=1) for a in alphas], dtype=float)
    cols = np.array([a.grid.sum(axis=0) for a in alphas], dtype=float)
    k = n + m
    basis = []
    for a in range(k - 1):
        v = np.zeros(k)
        v[a], v[k - 1] = 1.0, -1.0
        basis.append(v)

    def phase(v):
        return -(rows @ v[:n] - cols @ v[n:])

    out = [np.diag(1j * phase(v)) for v in basis]
    if group_elements:
        for e in range(len(basis)):
            ang = [2 * np.pi * np.sqrt(_PRIMES[(e * len(basis) + q) % len(_PRIMES)])
                   for q in range(len(basis))]
            v = sum(t * b for t, b in zip(ang, basis))
            out.append(np.diag(np.exp(1j * phase(v))))
    return out


def commutant_basis(mats: list[np.ndarray], rcond: float = NULL_RCOND) -> list[np.ndarray]:
    """Basis of ``{X : X R = R X for all R in mats}``.

    Solves the stacked Sylvester system ``(R^T (x) I - I (x) R) vec X = 0``.
    Singular values below ``rcond`` times the largest ``||R||_2`` count as
    zero; the scale comes from the inputs, not from the system, so a list of
    near-scalar matrices still yields the full matrix space.
    """
    if not mats:
        raise ValueError("need at least one matrix")
    d = mats[0].shape[0]
    if any(r.shape != (d, d) for r in mats):
        raise ValueError("matrices must share one square shape")
    scale = max(float(np.linalg.norm(r, 2)) for r in mats)
    if scale == 0.0:
        return [np.eye(d * d)[:, i].reshape(d, d, order="F") for i in range(d * d)]
    eye = np.eye(d)
    stack = np.vstack([np.kron(r.T, eye) - np.kron(eye, r) for r in mats])
    if stack.shape[0] > stack.shape[1]:
        # same singular values and right vectors, without the tall left factor
        stack = qr(stack, mode="r")[0][: stack.shape[1]]
    _, s, vh = svd(stack, full_matrices=True)
    rank = int(np.sum(s > rcond * scale))
    ns = vh[rank:].conj().T
    return [ns[:, i].reshape(d, d, order="F") for i in range(ns.shape[1])]


def algebra_is_commutative(basis: list[np.ndarray], tol: float = COMMUTE_TOL):
    """``(commutative, max relative commutator norm)`` over all pairs."""
    if not basis:
        raise ValueError("empty basis")
    d = basis[0].shape
    if any(x.shape != d for x in basis):
        raise ValueError("dimension mismatch")
    norms = [np.linalg.norm(x, 2) for x in basis]
    worst = 0.0
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            c = basis[i] @ basis[j] - basis[j] @ basis[i]
            scale = max(norms[i] * norms[j], 1e-300)
            worst = max(worst, float(np.linalg.norm(c, 2)) / scale)
    return bool(worst < tol), float(worst)
