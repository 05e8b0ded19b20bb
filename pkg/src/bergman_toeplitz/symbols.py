"""Bounded symbol families with declared invariance groups.

A :class:`Symbol` maps a batch of domain points ``(N, n, m)`` to complex
values.  Most families are a profile composed with an invariant coordinate:

==================  =====================================  ==================
family              coordinate(s) passed to the profile    invariance
==================  =====================================  ==================
radial              ``r = |z|`` (rank one)                 maximal_compact
k_invariant         ``t1 = tr ZZ*``, ``t2 = tr (ZZ*)^2``   maximal_compact
torus_invariant     ``a11, a12, ...`` = ``|z_jk|^2``,       torus
                    ``cross_re``, ``cross_im``
hyperbolic_arc      ``u = arg((1+z)/(1-z))``               hyperbolic
parabolic           ``t = arctan(Re((1+z)/(1-z)))``        parabolic_n
real_form           ``t = arctan(|1 - z.z| / (1-|z|^2))``  real_form
==================  =====================================  ==================

``cross`` is ``z11 z22 conj(z12) conj(z21)``.  Profiles are either Python
callables or expression strings such as ``"cos(u)**2"`` evaluated by a
restricted interpreter (numpy functions and arithmetic only).
"""
from __future__ import annotations

import ast
import hashlib
import operator
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domains import Domain, DomainError, _opnorm, as_points

__all__ = [
    "Symbol",
    "SymbolError",
    "radial",
    "k_invariant",
    "torus_invariant",
    "hyperbolic_arc",
    "parabolic",
    "real_form",
    "oracle",
    "expression",
    "constant",
    "symbol_eval",
    "symbol_from_config",
    "random_radial_profile",
    "compile_expression",
    "hyperbolic_coordinate",
    "parabolic_coordinate",
    "real_form_coordinate",
    "INVARIANCE_GROUPS",
]

INVARIANCE_GROUPS = ("none", "rotation", "maximal_compact", "torus", "hyperbolic",
                     "parabolic_n", "real_form")


class SymbolError(ValueError):
    pass


# -- restricted expression evaluator --------------------------------------

_FUNCS = {name: getattr(np, name) for name in (
    "sin", "cos", "tan", "arctan", "arcsin", "arccos", "sinh", "cosh", "tanh", "exp",
    "log", "log1p", "expm1", "sqrt", "abs", "real", "imag", "conj", "sign", "minimum",
    "maximum", "where", "clip")}
_FUNCS["cot"] = lambda x: 1.0 / np.tan(x)
_CONSTS = {"pi": np.pi, "e": np.e, "i": 1j}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_CMPOPS = {ast.Lt: operator.lt, ast.LtE: operator.le, ast.Gt: operator.gt, ast.GtE: operator.ge}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def _eval_node(node, env):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, env)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return node.value
    if isinstance(node, ast.Name):
        if node.id in env:
            return env[node.id]
        if node.id in _CONSTS:
            return _CONSTS[node.id]
        raise SymbolError(f"unknown name {node.id!r} in profile expression")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left, env), _eval_node(node.right, env))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_node(node.operand, env))
    if isinstance(node, ast.Compare) and len(node.ops) == 1 and type(node.ops[0]) in _CMPOPS:
        return _CMPOPS[type(node.ops[0])](_eval_node(node.left, env),
                                          _eval_node(node.comparators[0], env))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        fn = _FUNCS.get(node.func.id)
        if fn is None:
            raise SymbolError(f"function {node.func.id!r} not allowed in profile expression")
        return fn(*[_eval_node(a, env) for a in node.args])
    raise SymbolError(f"unsupported syntax in profile expression: {ast.dump(node)[:60]}")


_ALLOWED_NODES = (ast.Expression, ast.Constant, ast.Name, ast.Load, ast.BinOp, ast.UnaryOp,
                  ast.Compare, ast.Call, *_BINOPS, *_CMPOPS, *_UNOPS)


def _validate(tree: ast.AST, variables: set) -> None:
    """Reject anything the evaluator would not accept, before any evaluation."""
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise SymbolError(f"unsupported syntax in profile expression: {type(node).__name__}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float, complex)):
            raise SymbolError("only numeric constants are allowed in profile expressions")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
                raise SymbolError("only plain calls of numpy functions are allowed")
        elif isinstance(node, ast.Name) and node.id not in variables and node.id not in _CONSTS:
            if node.id not in _FUNCS:
                raise SymbolError(f"unknown name {node.id!r} in profile expression")


def compile_expression(expr: str, variables: tuple[str, ...]) -> Callable:
    """Compile ``expr`` into ``f(*arrays)`` over the named variables."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise SymbolError(f"cannot parse profile expression {expr!r}") from exc
    _validate(tree, set(variables))

    def f(*args):
        env = dict(zip(variables, args))
        out = _eval_node(tree, env)
        return np.broadcast_to(out, np.shape(args[0])) if args else out

    f.expression = expr
    return f


def _as_profile(profile, variables: tuple[str, ...]) -> tuple[Callable, str]:
    if isinstance(profile, str):
        return compile_expression(profile, variables), profile
    if callable(profile):
        return profile, getattr(profile, "expression", getattr(profile, "__name__", "callable"))
    raise SymbolError("profile must be a callable or an expression string")


# -- invariant coordinates --------------------------------------------------

def _disk_values(pts: np.ndarray) -> np.ndarray:
    if pts.shape[1:] != (1, 1):
        raise SymbolError("this coordinate is defined on the disk only")
    return pts[:, 0, 0]


def hyperbolic_coordinate(points) -> np.ndarray:
    """``u = arg((1+z)/(1-z))`` in ``(-pi/2, pi/2)``; constant on arcs through ``+-1``."""
    z = _disk_values(np.asarray(points).reshape(-1, 1, 1))
    return np.angle((1.0 + z) / (1.0 - z))


def parabolic_coordinate(points) -> np.ndarray:
    """``v = Re((1+z)/(1-z)) > 0``; constant on horocycles at ``1``, unbounded."""
    z = _disk_values(np.asarray(points).reshape(-1, 1, 1))
    return np.real((1.0 + z) / (1.0 - z))


def real_form_coordinate(points) -> np.ndarray:
    """``F = |1 - z.z| / (1 - |z|^2) >= 1`` on a rank-one ball; unbounded.

    ``z.z`` is the bilinear (not Hermitian) square.  ``F`` is invariant under
    the real points ``SO_0(n,1)`` of ``SU(n,1)``.
    """
    pts = np.asarray(points)
    z = pts.reshape(len(pts), -1)
    return np.abs(1.0 - np.sum(z * z, axis=1)) / (1.0 - np.sum(np.abs(z) ** 2, axis=1))


def _abs2_env(pts: np.ndarray) -> dict:
    n, m = pts.shape[1:]
    env = {f"a{j + 1}{k + 1}": np.abs(pts[:, j, k]) ** 2 for j in range(n) for k in range(m)}
    if n >= 2 and m >= 2:
        cross = pts[:, 0, 0] * pts[:, 1, 1] * np.conj(pts[:, 0, 1] * pts[:, 1, 0])
    else:
        cross = np.zeros(len(pts), dtype=complex)
    env["cross_re"], env["cross_im"] = cross.real, cross.imag
    return env


def _torus_names(shape) -> tuple[str, ...]:
    n, m = shape
    return tuple(f"a{j + 1}{k + 1}" for j in range(n) for k in range(m)) + ("cross_re", "cross_im")


# -- symbols ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Symbol:
    """A bounded function on a domain with a declared invariance group."""

    kind: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    bound: float
    invariance: str = "none"
    label: str = ""
    params: dict = field(default_factory=dict)
    real: bool = True

    def __post_init__(self):
        if self.invariance not in INVARIANCE_GROUPS:
            raise SymbolError(f"unknown invariance group {self.invariance!r}")
        if not (np.isfinite(self.bound) and self.bound > 0):
            raise SymbolError("esssup bound must be a positive finite number")

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points)
        out = np.asarray(self.evaluator(pts))
        return np.broadcast_to(out, (len(pts),))

    def describe(self) -> dict:
        return {"kind": self.kind, "label": self.label, "invariance": self.invariance,
                "bound": self.bound, **{k: v for k, v in self.params.items()
                                        if isinstance(v, (str, int, float, bool))}}

    def __add__(self, other: "Symbol") -> "Symbol":
        inv = self.invariance if self.invariance == other.invariance else "none"
        return Symbol("oracle", lambda p: self(p) + other(p), self.bound + other.bound, inv,
                      f"({self.label}) + ({other.label})", real=self.real and other.real)

    def __mul__(self, c) -> "Symbol":
        c = complex(c) if np.iscomplexobj(c) else float(c)
        return Symbol("oracle", lambda p: c * self(p), max(abs(c), 1e-300) * self.bound,
                      self.invariance, f"{c} * ({self.label})",
                      real=self.real and np.isrealobj(c))

    __rmul__ = __mul__


def _grid_bound(f, *ranges, points=4097) -> float:
    """Max of ``|f|`` on a dense grid of the coordinate range (slightly enlarged)."""
    axes = [np.linspace(a, b, points if len(ranges) == 1 else 257) for a, b in ranges]
    mesh = np.meshgrid(*axes, indexing="ij")
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(f(*[g.ravel() for g in mesh]), dtype=complex))
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        raise SymbolError("profile is not finite anywhere on its coordinate range")
    return float(vals.max()) * (1 + 1e-6) + 1e-15


def _profile_symbol(kind, profile, variables, coord, ranges, invariance, bound, params):
    f, text = _as_profile(profile, variables)
    est = bound is None
    if est:
        bound = _grid_bound(f, *ranges)

    def evaluator(pts):
        return f(*coord(pts))

    return Symbol(kind, evaluator, float(bound), invariance, f"{kind}[{text}]",
                  {"profile": text, "bound_estimated": est, **params})


def radial(profile, bound: float | None = None) -> Symbol:
    """``phi(z) = profile(|z|)`` on a rank-one domain."""
    def coord(pts):
        return (np.sqrt(np.sum(np.abs(pts.reshape(len(pts), -1)) ** 2, axis=1)),)
    return _profile_symbol("radial", profile, ("r",), coord, [(0.0, 1.0)],
                           "maximal_compact", bound, {})


def k_invariant(profile, bound: float | None = None, rank: int = 2) -> Symbol:
    """``phi(Z) = profile(tr ZZ*, tr (ZZ*)^2)``: a function of the singular values."""
    def coord(pts):
        g = pts @ np.conj(np.swapaxes(pts, 1, 2))
        t1 = np.real(np.trace(g, axis1=1, axis2=2))
        t2 = np.real(np.einsum("nij,nji->n", g, g))
        return t1, t2
    f, text = _as_profile(profile, ("t1", "t2"))
    est = bound is None
    if est:
        # t1 = sum s_i^2, t2 = sum s_i^4 over singular values in [0, 1)
        s2 = np.linspace(0.0, 1.0, 129)
        grids = np.meshgrid(*([s2] * rank), indexing="ij")
        sq = np.stack([g.ravel() for g in grids], axis=1)
        bound = _grid_bound(lambda a: f(sq.sum(1), (sq ** 2).sum(1)), (0.0, 1.0), points=2)
    return Symbol("k_invariant", lambda p: f(*coord(p)), float(bound), "maximal_compact",
                  f"k_invariant[{text}]", {"profile": text, "bound_estimated": est})


def torus_invariant(profile, shape=(2, 2), bound: float | None = None) -> Symbol:
    """Function of the ``|z_jk|^2`` and of ``cross = z11 z22 conj(z12 z21)``."""
    names = _torus_names(tuple(shape))
    f, text = _as_profile(profile, names)
    est = bound is None
    if est:
        rng = np.random.default_rng(12345)
        cnt = 200_000
        env = [rng.random(cnt) for _ in names[:-2]]
        c = np.sqrt(rng.random(cnt)) * np.exp(2j * np.pi * rng.random(cnt))
        with np.errstate(all="ignore"):
            vals = np.abs(np.asarray(f(*env, c.real, c.imag), dtype=complex))
        # corners of the coordinate box, where polynomial profiles peak
        corners = np.array(np.meshgrid(*([[0.0, 1.0]] * len(names[:-2])),
                                       indexing="ij")).reshape(len(names) - 2, -1)
        for cr, ci in ((1, 0), (-1, 0), (0, 1), (0, -1), (0, 0)):
            k = corners.shape[1]
            with np.errstate(all="ignore"):
                v = np.abs(np.asarray(f(*corners, np.full(k, cr, float), np.full(k, ci, float)),
                                      dtype=complex))
            vals = np.concatenate([vals, np.broadcast_to(v, (k,))])
        bound = float(np.nanmax(vals)) * (1 + 1e-6) + 1e-15

    def evaluator(pts):
        if pts.shape[1:] != tuple(shape):
            raise SymbolError(f"torus symbol built for shape {tuple(shape)}, got {pts.shape[1:]}")
        env = _abs2_env(pts)
        return f(*[env[k] for k in names])

    return Symbol("torus_invariant", evaluator, float(bound), "torus",
                  f"torus_invariant[{text}]", {"profile": text, "bound_estimated": est})


def hyperbolic_arc(profile, bound: float | None = None) -> Symbol:
    """``phi(z) = profile(u)`` with ``u = arg((1+z)/(1-z))`` on the disk."""
    return _profile_symbol("hyperbolic_arc", profile, ("u",),
                           lambda p: (hyperbolic_coordinate(p),),
                           [(-np.pi / 2, np.pi / 2)], "hyperbolic", bound, {})


def _bounding(name):
    if name == "arctan":
        return np.arctan
    if name is None or name == "none":
        return None
    raise SymbolError(f"unknown bounding map {name!r}")


def parabolic(profile, bounding: str | None = "arctan", bound: float | None = None) -> Symbol:
    """``phi(z) = profile(arctan v)`` with ``v = Re((1+z)/(1-z))`` on the disk.

    ``bounding=None`` yields the raw coordinate symbol, which is unbounded
    and rejected by :func:`symbol_eval`.
    """
    bmap = _bounding(bounding)
    if bmap is None:
        f, text = _as_profile(profile, ("v",))
        return Symbol("parabolic", lambda p: f(parabolic_coordinate(p)), np.finfo(float).max,
                      "parabolic_n", f"parabolic[{text}]",
                      {"profile": text, "bounding": "none", "unbounded": True})
    return _profile_symbol("parabolic", profile, ("t",),
                           lambda p: (bmap(parabolic_coordinate(p)),),
                           [(0.0, np.pi / 2)], "parabolic_n", bound, {"bounding": bounding})


def real_form(profile, bounding: str | None = "arctan", bound: float | None = None) -> Symbol:
    """``phi(z) = profile(arctan F)`` with ``F = |1 - z.z|/(1 - |z|^2)``."""
    bmap = _bounding(bounding)
    if bmap is None:
        f, text = _as_profile(profile, ("F",))
        return Symbol("real_form", lambda p: f(real_form_coordinate(p)), np.finfo(float).max,
                      "real_form", f"real_form[{text}]",
                      {"profile": text, "bounding": "none", "unbounded": True})
    return _profile_symbol("real_form", profile, ("t",),
                           lambda p: (bmap(real_form_coordinate(p)),),
                           [(np.pi / 4, np.pi / 2)], "real_form", bound, {"bounding": bounding})


def _coordinate_env(pts: np.ndarray) -> dict:
    n, m = pts.shape[1:]
    if m == 1:
        env = {f"z{j + 1}": pts[:, j, 0] for j in range(n)}
        env["z"] = pts[:, 0, 0]
    else:
        env = {f"z{j + 1}{k + 1}": pts[:, j, k] for j in range(n) for k in range(m)}
    return env


def expression(expr: str, bound: float, invariance: str = "none") -> Symbol:
    """Symbol given by an expression in the coordinates.

    Variables are ``z`` (first coordinate) and ``z1 .. zn`` on rank-one
    domains, ``z11, z12, ...`` on matrix balls; the bound must be declared.
    """
    tree_vars = {}

    def evaluator(pts):
        env = _coordinate_env(pts)
        names = tuple(sorted(env))
        key = (names, pts.shape[1:])
        if key not in tree_vars:
            tree_vars[key] = compile_expression(expr, names)
        return tree_vars[key](*[env[k] for k in names])

    real = True
    for shape in ((1, 1), (2, 1), (3, 1), (2, 2)):
        try:
            with np.errstate(all="ignore"):
                real = not np.iscomplexobj(np.asarray(evaluator(np.full((1,) + shape, 0.1 + 0.2j))))
            break
        except SymbolError:
            continue
    return Symbol("expression", evaluator, float(bound), invariance, f"expression[{expr}]",
                  {"profile": expr}, real)


def oracle(evaluator: Callable, bound: float, invariance: str = "none", label: str = "oracle",
           real: bool = True) -> Symbol:
    """Arbitrary evaluator ``(N, n, m) -> (N,)`` with a caller-declared bound."""
    return Symbol("oracle", evaluator, float(bound), invariance, label, {}, real)


def constant(c: float = 1.0) -> Symbol:
    return Symbol("oracle", lambda p: np.full(len(p), c), max(abs(c), 1e-300), "maximal_compact",
                  f"constant[{c}]", {}, np.isrealobj(c))


def symbol_eval(symbol: Symbol, domain: Domain, point) -> complex | np.ndarray:
    """Evaluate with membership and boundedness checks."""
    pts = as_points(domain, point)
    if not np.all(_opnorm(pts) < 1.0):
        raise DomainError("point outside the domain")
    if symbol.params.get("unbounded"):
        raise SymbolError(f"{symbol.kind} raw coordinate is unbounded; compose with a bounding map")
    out = symbol(pts)
    if len(pts) == 1 and np.ndim(point) <= 2:
        return complex(out[0])
    return out


def random_radial_profile(rng: np.random.Generator, terms: int = 4) -> tuple[Callable, float, str]:
    """``sum_k c_k cos(k pi r)`` with Gaussian coefficients; returns (f, bound, text)."""
    c = rng.standard_normal(terms + 1)
    text = " + ".join(f"({ck:.17g})*cos({k}*pi*r)" for k, ck in enumerate(c))
    return compile_expression(text, ("r",)), float(np.abs(c).sum()), text


_FACTORIES = {
    "radial": lambda cfg: radial(cfg["profile"], cfg.get("bound")),
    "k_invariant": lambda cfg: k_invariant(cfg["profile"], cfg.get("bound")),
    "torus_invariant": lambda cfg: torus_invariant(cfg["profile"], tuple(cfg.get("shape", (2, 2))),
                                                   cfg.get("bound")),
    "hyperbolic_arc": lambda cfg: hyperbolic_arc(cfg["profile"], cfg.get("bound")),
    "parabolic": lambda cfg: parabolic(cfg["profile"], cfg.get("bounding", "arctan"),
                                       cfg.get("bound")),
    "real_form": lambda cfg: real_form(cfg["profile"], cfg.get("bounding", "arctan"),
                                       cfg.get("bound")),
}


def symbol_from_config(cfg: dict, rng: np.random.Generator | None = None) -> Symbol:
    """Build a symbol from a config table ``{kind = ..., profile = ...}``.

    ``kind = "random_radial"`` draws a random cosine-series profile from ``rng``.
    """
    kind = cfg.get("kind")
    if kind == "random_radial":
        if rng is None:
            raise SymbolError("random_radial needs a random generator")
        f, b, text = random_radial_profile(rng, int(cfg.get("terms", 4)))
        sym = radial(text, b)
        digest = hashlib.sha256(text.encode()).hexdigest()[:6]
        return Symbol(sym.kind, sym.evaluator, sym.bound, sym.invariance,
                      f"radial[random cosine series {digest}]", sym.params)
    if kind == "sum":
        parts = [symbol_from_config(c, rng) for c in cfg["terms"]]
        out = parts[0]
        for p in parts[1:]:
            out = out + p
        return out
    if kind == "expression":
        if "bound" not in cfg or "profile" not in cfg:
            raise SymbolError("expression symbols need a profile and a declared bound")
        return expression(cfg["profile"], cfg["bound"], cfg.get("invariance", "none"))
    if kind not in _FACTORIES:
        raise SymbolError(f"unknown symbol kind {kind!r}")
    if "profile" not in cfg:
        raise SymbolError(f"symbol {kind!r} needs a profile")
    return _FACTORIES[kind](cfg)
