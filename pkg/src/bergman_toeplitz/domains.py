"""Bounded symmetric domains of type I: the unit ball and the matrix ball.

Points are always stored as ``(n, m)`` complex matrices; a point of the unit
ball ``B^n`` is an ``(n, 1)`` column.  Batches of points carry a leading axis,
``(N, n, m)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Domain",
    "DomainError",
    "MultiIndex",
    "make_domain",
    "unit_ball",
    "matrix_ball",
    "disk",
    "as_points",
    "contains",
    "density_unnormalized",
    "multi_index_enumerate",
    "index_array",
]


class DomainError(ValueError):
    """Invalid domain parameters, shapes, or points outside the domain."""


@dataclass(frozen=True)
class Domain:
    """Descriptor for ``B^n`` (``kind="unit_ball"``) or ``D^I_{n,m}``.

    Structure constants are derived from ``(kind, n, m)`` and never stored
    independently, so a descriptor loaded from JSON cannot disagree with them.
    """

    kind: str
    n: int
    m: int = 1

    def __post_init__(self):
        if self.kind not in ("unit_ball", "matrix_ball"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if int(self.n) != self.n or int(self.m) != self.m:
            raise DomainError("n and m must be integers")
        if self.n < 1 or self.m < 1:
            raise DomainError(f"n and m must be positive, got n={self.n}, m={self.m}")
        if self.kind == "unit_ball" and self.m != 1:
            raise DomainError("a unit ball has m = 1")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.m)

    @property
    def dim(self) -> int:
        return self.n * self.m

    @property
    def rank(self) -> int:
        return min(self.n, self.m)

    @property
    def tube_dim(self) -> int:
        return self.rank ** 2

    @property
    def genus(self) -> int:
        num = self.dim + self.tube_dim
        if num % self.rank:
            raise DomainError("genus is not an integer")  # cannot happen for type I
        return num // self.rank

    @property
    def is_ball(self) -> bool:
        """Rank one: ``B^n`` in either orientation."""
        return self.rank == 1

    @property
    def is_disk(self) -> bool:
        return self.dim == 1

    def check_weight(self, lam: float) -> None:
        if not lam > self.genus - 1:
            raise DomainError(
                f"weight lambda={lam} must exceed genus - 1 = {self.genus - 1}"
            )

    def to_json(self) -> dict:
        return {"kind": self.kind, "n": self.n, "m": self.m}

    @classmethod
    def from_json(cls, data: dict) -> "Domain":
        return make_domain(data["kind"], int(data["n"]), int(data.get("m", 1)))

    def __str__(self):
        if self.kind == "unit_ball":
            return f"B^{self.n}"
        return f"D^I_{{{self.n},{self.m}}}"


def make_domain(kind: str, n: int, m: int = 1) -> Domain:
    kind = {"ball": "unit_ball", "matrix": "matrix_ball"}.get(kind, kind)
    if kind == "unit_ball" and m != 1:
        raise DomainError("a unit ball has m = 1")
    return Domain(kind, n, m)


def unit_ball(n: int) -> Domain:
    return Domain("unit_ball", n, 1)


def matrix_ball(n: int, m: int) -> Domain:
    return Domain("matrix_ball", n, m)


def disk() -> Domain:
    return Domain("unit_ball", 1, 1)


def as_points(domain: Domain, z) -> np.ndarray:
    """Coerce ``z`` to a batch ``(N, n, m)`` of complex matrices.

    Scalars are accepted for the disk, length-``n`` vectors (or ``(N, n)``
    arrays) for rank-one domains with ``m = 1``.
    """
    z = np.asarray(z, dtype=complex)
    n, m = domain.shape
    if z.shape == (n, m):
        return z[None]
    if z.ndim == 3 and z.shape[1:] == (n, m):
        return z
    if m == 1:
        if z.ndim == 0 and n == 1:
            return z.reshape(1, 1, 1)
        if z.ndim == 1 and n == 1:
            return z.reshape(-1, 1, 1)
        if z.ndim == 1 and z.shape[0] == n:
            return z.reshape(1, n, 1)
        if z.ndim == 2 and z.shape[1] == n:
            return z.reshape(-1, n, 1)
    if n == 1 and z.ndim == 2 and z.shape[1] == m:
        return z.reshape(-1, 1, m)
    raise DomainError(f"point of shape {z.shape} does not fit {domain}")


def _opnorm(points: np.ndarray) -> np.ndarray:
    if points.shape[1] == 1 or points.shape[2] == 1:
        return np.sqrt(np.sum(np.abs(points) ** 2, axis=(1, 2)))
    return np.linalg.svd(points, compute_uv=False)[:, 0]


def contains(domain: Domain, point) -> bool | np.ndarray:
    """Strict membership ``||Z||_op < 1``; boundary points are rejected.

    Returns a bool for a single point and a boolean array for a batch.
    """
    pts = as_points(domain, point)
    inside = _opnorm(pts) < 1.0
    if len(pts) == 1 and np.ndim(point) <= 2:
        return bool(inside[0])
    return inside


def _det_defect(points: np.ndarray) -> np.ndarray:
    """``det(I - Z Z^*)`` for a batch, computed stably for rank one."""
    n, m = points.shape[1:]
    if n == 1 or m == 1:
        return 1.0 - np.sum(np.abs(points) ** 2, axis=(1, 2))
    s = np.linalg.svd(points, compute_uv=False)
    return np.prod(1.0 - s ** 2, axis=1)


def density_unnormalized(domain: Domain, lam: float, point) -> float | np.ndarray:
    """``det(I - Z Z^*)^(lam - p)``, the weight of ``mu_lam`` up to its constant."""
    domain.check_weight(lam)
    pts = as_points(domain, point)
    if not np.all(_opnorm(pts) < 1.0):
        raise DomainError("point outside the domain")
    out = _det_defect(pts) ** (lam - domain.genus)
    return float(out[0]) if np.ndim(point) <= 2 and len(pts) == 1 else out


@dataclass(frozen=True)
class MultiIndex:
    """Exponent grid ``alpha`` in ``N^(n x m)``, stored flattened row-major."""

    entries: tuple[int, ...]
    shape: tuple[int, int]

    def __post_init__(self):
        if len(self.entries) != self.shape[0] * self.shape[1]:
            raise DomainError("entries do not match shape")
        if any(e < 0 for e in self.entries):
            raise DomainError("exponents must be nonnegative")

    @classmethod
    def from_grid(cls, grid) -> "MultiIndex":
        g = np.asarray(grid, dtype=int)
        if g.ndim == 1:
            g = g[:, None]
        return cls(tuple(int(x) for x in g.ravel()), g.shape)

    @property
    def grid(self) -> np.ndarray:
        return np.array(self.entries, dtype=int).reshape(self.shape)

    @property
    def degree(self) -> int:
        return sum(self.entries)

    def __repr__(self):
        rows = [list(self.entries[i * self.shape[1]:(i + 1) * self.shape[1]])
                for i in range(self.shape[0])]
        return f"MultiIndex({rows})"


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative ints summing to ``total``, descending lex."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def multi_index_enumerate(domain: Domain, max_degree: int) -> list[MultiIndex]:
    """Multi-indices of degree ``<= max_degree`` in graded lexicographic order.

    Within a degree the flattened grids are sorted lexicographically with the
    leading entry most significant and larger exponents first, so ``z_11``
    precedes ``z_12``.
    """
    if max_degree < 0:
        return []
    shape = domain.shape
    k = domain.dim
    return [MultiIndex(c, shape)
            for d in range(max_degree + 1)
            for c in _compositions(d, k)]


def index_array(indices) -> np.ndarray:
    """Stack multi-indices into an integer array ``(d, n, m)``."""
    if not indices:
        return np.zeros((0, 1, 1), dtype=int)
    return np.array([a.grid for a in indices], dtype=int)


def count_monomials(dim: int, max_degree: int) -> int:
    """Number of monomials in ``dim`` variables of degree ``<= max_degree``."""
    from math import comb
    return comb(dim + max_degree, max_degree)

