"""Experiment runners behind the command line.

A config is a mapping with an ``experiment`` name and optional ``cases``;
each case inherits every top-level key it does not override.  Runners
return, per case, the inputs, the measured quantities and a list of checks
(value, error estimate, tolerance, pass flag).
"""
from __future__ import annotations

import copy
import math

import numpy as np
from scipy.special import gammaln

from .basis import bergman_basis, bergman_project, kernel_eval
from .domains import Domain, DomainError, make_domain
from .group import (average_operator, average_symbol, intertwine_defect, invariance_defect,
                    pi_lambda_matrix, subgroup_from_name)
from .multiplicity import (algebra_is_commutative, commutant_basis, is_multiplicity_free_torus,
                           q_shift_families, torus_generators, weight_census)
from .quadrature import hyperbolic_grid_rule, mc_sample, radial_rule
from .symbols import SymbolError, symbol_from_config
from .toeplitz import commutator_study, significance, toeplitz_matrix

__all__ = ["ConfigError", "run", "EXPERIMENTS", "validate"]

EXPERIMENTS = ("census", "commutant", "commutator", "intertwine", "average", "kernel-check",
               "norms")


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2)."""


# -- checks -----------------------------------------------------------------

def check(name: str, value, tolerance, op: str = "<", stderr: float | None = None,
          **extra) -> dict:
    """A verdict record.  ``op`` is one of ``<``, ``>``, ``<=``, ``==``,
    ``within_se`` (value below 3 SE) or ``beyond_se`` (value above 10 SE)."""
    if op == "<":
        ok = value < tolerance
    elif op == "<=":
        ok = value <= tolerance
    elif op == ">":
        ok = value > tolerance
    elif op == "==":
        ok = value == tolerance
    elif op in ("within_se", "beyond_se"):
        verdict = significance(value, stderr)
        ok = verdict == ("zero" if op == "within_se" else "nonzero")
        tolerance = (3.0 if op == "within_se" else 10.0) * stderr
        extra["significance"] = verdict
    else:
        raise ValueError(op)
    out = {"check": name, "value": value, "tolerance": tolerance, "op": op, "pass": bool(ok)}
    if stderr is not None:
        out["stderr"] = stderr
    out.update(extra)
    return out


# -- config helpers ---------------------------------------------------------

def _domain(case) -> Domain:
    spec = case.get("domain")
    if spec is None:
        raise ConfigError("case has no domain")
    try:
        if spec == "disk":
            return make_domain("unit_ball", 1, 1)
        kind = spec.get("kind", "unit_ball")
        if kind == "disk":
            return make_domain("unit_ball", 1, 1)
        return make_domain(kind, int(spec["n"]), int(spec.get("m", 1)))
    except (DomainError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid domain {spec!r}: {exc}") from exc


def _lam(case, domain: Domain) -> float:
    if "lam" not in case:
        raise ConfigError("case has no lam")
    lam = float(case["lam"])
    if not lam > domain.genus - 1:
        raise ConfigError(f"lam={lam} must exceed genus - 1 = {domain.genus - 1} on {domain}")
    return lam


def _int(case, key, default=None, minimum=0) -> int:
    v = case.get(key, default)
    if v is None or isinstance(v, bool) or int(v) != v or v < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}, got {v!r}")
    return int(v)


def _cutoffs(case) -> list[int]:
    if "cutoffs" in case:
        cs = case["cutoffs"]
        if not cs or any(isinstance(c, bool) or int(c) != c or c < 0 for c in cs):
            raise ConfigError(f"invalid cutoffs {cs!r}")
        return [int(c) for c in cs]
    return [_int(case, "cutoff")]


def _symbol(cfg, rng):
    try:
        return symbol_from_config(cfg, rng)
    except (SymbolError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid symbol {cfg!r}: {exc}") from exc


def _rule(case, domain: Domain, lam: float, total: int, seed: int):
    spec = dict(case.get("rule", {}))
    kind = spec.pop("kind", "radial" if domain.is_ball else "monte_carlo")
    if kind == "radial":
        if not domain.is_ball:
            raise ConfigError("radial rules exist only on rank-one domains")
        k_max = int(spec.pop("k_max", total + int(spec.pop("extra", 10))))
        return radial_rule(domain, lam, k_max, **spec)
    if kind == "hyperbolic_grid":
        if not domain.is_disk:
            raise ConfigError("the hyperbolic grid is a disk rule")
        return hyperbolic_grid_rule(lam, **spec)
    if kind == "monte_carlo":
        count = int(spec.pop("count", 200_000))
        return mc_sample(domain, lam, count, int(spec.pop("seed", seed)), **spec)
    raise ConfigError(f"unknown rule kind {kind!r}")


# -- runners ----------------------------------------------------------------

def _run_census(case, seed):
    n, m = _int(case, "n", minimum=1), _int(case, "m", minimum=1)
    cutoff = _int(case, "cutoff")
    rep = weight_census(n, m, cutoff)
    q = {"census": rep.to_json()}
    checks = [check("multiplicities sum to monomial count", rep.total,
                    math.comb(n * m + cutoff, cutoff), "==")]
    exp = case.get("expect", {})
    if "max_multiplicity" in exp:
        checks.append(check("max multiplicity", rep.max_multiplicity, exp["max_multiplicity"], "=="))
    if exp.get("q_shift"):
        ok = q_shift_families(rep)
        checks.append(check("every collision class is a complete q-shift family", ok, True, "=="))
    if "slice_degree" in exp:
        sl = rep.degree_slice(int(exp["slice_degree"]))
        mult = sl.multiplicities()
        q["slice"] = sl.to_json()
        if "slice_weights" in exp:
            checks.append(check(f"distinct weights in degree {exp['slice_degree']}", len(mult),
                                exp["slice_weights"], "=="))
        if "slice_multiple_classes" in exp:
            multi = sorted(v for v in mult.values() if v > 1)
            checks.append(check(f"multiplicities > 1 in degree {exp['slice_degree']}", multi,
                                exp["slice_multiple_classes"], "=="))
    return q, checks


def _run_commutant(case, seed):
    checks, q = [], {}
    if "sweep" in case:
        sw = case["sweep"]
        rows = []
        for n in range(1, int(sw.get("n_max", 2)) + 1):
            for m in range(1, int(sw.get("m_max", 2)) + 1):
                for c in range(0, int(sw.get("cutoff_max", 3)) + 1):
                    free, _ = is_multiplicity_free_torus(n, m, c)
                    basis = commutant_basis(torus_generators(n, m, c))
                    comm, worst = algebra_is_commutative(basis)
                    squares = sum(v * v for v in weight_census(n, m, c).multiplicities().values())
                    rows.append({"n": n, "m": m, "cutoff": c, "multiplicity_free": free,
                                 "commutative": comm, "dim": len(basis),
                                 "sum_mult_squared": squares})
                    checks.append(check(f"({n},{m},{c}) criteria agree", comm, free, "=="))
                    checks.append(check(f"({n},{m},{c}) commutant dim = sum mult^2",
                                        len(basis), squares, "=="))
        q["sweep"] = rows
        return q, checks
    n, m = _int(case, "n", minimum=1), _int(case, "m", minimum=1)
    cutoff = _int(case, "cutoff")
    gens = torus_generators(n, m, cutoff)
    basis = commutant_basis(gens)
    comm, worst = algebra_is_commutative(basis)
    diag = all(np.allclose(x, np.diag(np.diag(x)), atol=1e-10) for x in basis)
    q.update({"space_dim": gens[0].shape[0], "commutant_dim": len(basis), "commutative": comm,
              "max_relative_commutator": worst, "all_diagonal": diag})
    exp = case.get("expect", {})
    if "dim" in exp:
        checks.append(check("commutant dimension", len(basis), int(exp["dim"]), "=="))
    if "commutative" in exp:
        checks.append(check("commutant is commutative", comm, bool(exp["commutative"]), "=="))
    if "diagonal" in exp:
        checks.append(check("commutant is diagonal", diag, bool(exp["diagonal"]), "=="))
    return q, checks


def _run_commutator(case, seed):
    domain = _domain(case)
    lam = _lam(case, domain)
    cutoffs = _cutoffs(case)
    pad = _int(case, "pad", 0)
    total = max(cutoffs) + pad
    rng = np.random.default_rng(seed)
    pairs = []
    for p in case.get("pairs", []):
        pairs.append((_symbol(p["a"], rng), _symbol(p["b"], rng)))
    for _ in range(_int(case, "random_pairs", 0)):
        cfg = case.get("random_symbol", {"kind": "random_radial"})
        pairs.append((_symbol(cfg, rng), _symbol(cfg, rng)))
    if not pairs:
        raise ConfigError("commutator case has no symbol pairs")
    expect = case.get("expect", "zero")
    if expect not in ("zero", "nonzero"):
        raise ConfigError("expect must be 'zero' or 'nonzero'")
    rule = _rule(case, domain, lam, total, seed)
    basis = bergman_basis(domain, lam, total, None if domain.is_ball else rule)
    tol = case.get("tol")
    q = {"rule": rule.describe(), "basis_id": basis.basis_id, "pairs": []}
    checks = []
    for a, b in pairs:
        series = []
        for c in cutoffs:
            res = commutator_study(a, b, rule, c, pad=total - c, basis=basis)
            series.append(res.to_json())
            label = f"[{a.label}, {b.label}] cutoff {c}"
            if rule.stochastic:
                op = "within_se" if expect == "zero" else "beyond_se"
                checks.append(check(label, res.spectral, None, op, res.stderr))
            else:
                if tol is None:
                    raise ConfigError("exact-rule commutator cases need tol")
                checks.append(check(label, res.spectral, float(tol),
                                    "<" if expect == "zero" else ">"))
        if case.get("trend") and len(series) > 1:
            for prev, cur in zip(series, series[1:]):
                if expect == "zero":
                    floor = 3 * max(prev["stderr"], cur["stderr"]) if rule.stochastic else float(tol)
                    limit = max(prev["spectral"], floor)
                    checks.append(check(f"trend cutoff {prev['cutoff']}->{cur['cutoff']} "
                                        f"does not grow", cur["spectral"], limit, "<="))
                else:
                    floor = 10 * cur["stderr"] if rule.stochastic else float(tol)
                    checks.append(check(f"trend cutoff {cur['cutoff']} stays significant",
                                        cur["spectral"], floor, ">"))
        q["pairs"].append({"a": a.describe(), "b": b.describe(), "series": series})
    inv = case.get("invariance_check")
    if inv:
        sub = subgroup_from_name(inv["subgroup"], domain.n, domain.m)
        for a, b in pairs[:1]:
            for s in (a, b):
                d = invariance_defect(s, sub, domain, elements=int(inv.get("elements", 50)),
                                      points=int(inv.get("points", 200)),
                                      seed=int(inv.get("seed", seed)),
                                      scale=float(inv.get("scale", 0.7)))
                q.setdefault("invariance", []).append({"symbol": s.label, **d})
                checks.append(check(f"invariance of {s.label} under {sub.name}",
                                    d["max_defect"], float(inv.get("tol", 1e-9))))
                checks.append(check("sampled elements are group members",
                                    d["max_membership_defect"], 1e-10))
    return q, checks


def _run_intertwine(case, seed):
    domain = _domain(case)
    lam = _lam(case, domain)
    cutoff = _int(case, "cutoff")
    rng = np.random.default_rng(seed)
    sym = _symbol(case["symbol"], rng)
    sub = subgroup_from_name(case.get("subgroup", "rotation"), domain.n, domain.m)
    basis = bergman_basis(domain, lam, cutoff)
    rule = _rule(case, domain, lam, cutoff, seed)
    tol = float(case.get("tol", 1e-6))
    q, checks = {"defects": []}, []
    for theta in case.get("angles", [np.pi / 3]):
        h = sub.element(np.atleast_1d(theta))
        d = intertwine_defect(basis, h, sym, rule)
        q["defects"].append({"theta": theta, "defect": d,
                             "membership_defect": h.membership_defect})
        checks.append(check(f"intertwining defect at theta={theta}", d, tol))
    return q, checks


def _run_average(case, seed):
    domain = _domain(case)
    lam = _lam(case, domain)
    cutoff = _int(case, "cutoff")
    rng = np.random.default_rng(seed)
    sym = _symbol(case["symbol"], rng)
    target = _symbol(case["target"], rng)
    sub = subgroup_from_name(case.get("subgroup", "rotation"), domain.n, domain.m)
    if not sub.compact:
        raise ConfigError(f"cannot average over the non-compact group {sub.name}")
    grule = sub.rule(int(case.get("points_per_circle", 16)), int(case.get("count", 256)), seed)
    basis = bergman_basis(domain, lam, cutoff)
    rule = _rule(case, domain, lam, cutoff, seed)
    tol = float(case.get("tol", 1e-8))
    t = toeplitz_matrix(basis, sym, rule)
    t_target = toeplitz_matrix(basis, target, rule).entries
    t_hat = average_operator(sub, basis, t, grule).entries
    t_sym = toeplitz_matrix(basis, average_symbol(sub, sym, grule, domain), rule).entries
    d_op = float(np.linalg.norm(t_hat - t_target, 2))
    d_sym = float(np.linalg.norm(t_sym - t_target, 2))
    d_both = float(np.linalg.norm(t_hat - t_sym, 2))
    comm = 0.0
    for h in sub.sample(8, seed):
        u = pi_lambda_matrix(basis, h).entries
        comm = max(comm, float(np.linalg.norm(u @ t_hat - t_hat @ u, 2)))
    q = {"operator_average_vs_target": d_op, "symbol_average_vs_target": d_sym,
         "operator_vs_symbol_average": d_both, "max_commutator_with_group": comm,
         "group_rule": grule.describe()}
    checks = [check("averaged operator equals target Toeplitz matrix", d_op, tol),
              check("Toeplitz matrix of averaged symbol equals target", d_sym, tol),
              check("operator average equals Toeplitz of symbol average", d_both, tol),
              check("averaged operator commutes with sampled group elements", comm, tol)]
    return q, checks


def _kernel_tail(lam: float, cutoff: int, x: np.ndarray) -> np.ndarray:
    """Bound on ``sum_{k > N} (lam)_k / k! x^k`` via the decreasing term ratio."""
    c = np.exp(gammaln(lam + cutoff + 1) - gammaln(lam) - gammaln(cutoff + 2))
    ratio = x * (lam + cutoff + 1) / (cutoff + 2)
    if np.any(ratio >= 1):
        raise ConfigError("points too close to the boundary for the geometric tail bound")
    return c * x ** (cutoff + 1) / (1 - ratio)


def _ball_points(rng, domain, count, radius):
    n = domain.n
    g = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1)[:, None]
    return g * (radius * rng.random(count) ** (1 / (2 * n)))[:, None]


def _run_kernel(case, seed):
    domain = _domain(case)
    lam = _lam(case, domain)
    cutoff = _int(case, "cutoff")
    mode = case.get("mode", "closed_form")
    rng = np.random.default_rng(seed)
    if not domain.is_ball:
        raise ConfigError("kernel checks use closed-form rank-one bases")
    basis = bergman_basis(domain, lam, cutoff)
    checks, q = [], {"mode": mode, "basis_id": basis.basis_id}
    if mode == "reproducing":
        rule = radial_rule(domain, lam, cutoff)
        tol = float(case.get("tol", 1e-10))
        worst = 0.0
        for _ in range(_int(case, "polynomials", 5, 1)):
            a = rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim)
            # z^alpha = e @ X^-1, so monomial coefficients a map to X^-1 a
            expected = np.linalg.solve(basis.transform, a)
            got = bergman_project(basis, lambda z: basis.monomials(z) @ a, rule)
            worst = max(worst, float(np.max(np.abs(got - expected))))
        q["max_coefficient_error"] = worst
        checks.append(check("projection reconstructs polynomial coefficients", worst, tol))
        return q, checks
    if mode != "closed_form":
        raise ConfigError(f"unknown kernel-check mode {mode!r}")
    count = _int(case, "pairs", 20, 1)
    radius = float(case.get("radius", 0.6))
    z = _ball_points(rng, domain, count, radius)
    w = _ball_points(rng, domain, count, radius)
    inner = np.sum(z * w.conj(), axis=1)
    exact = (1 - inner) ** (-lam)
    trunc = kernel_eval(basis, z, w)
    err = np.abs(trunc - exact)
    bound = _kernel_tail(lam, cutoff, np.abs(inner))
    ratio = float(np.max(err / (bound * (1 + 1e-9) + 1e-13)))
    q.update({"max_abs_error": float(err.max()), "max_tail_bound": float(bound.max()),
              "max_error_over_bound": ratio})
    checks.append(check("truncation error within geometric tail bound", ratio, 1.0, "<="))
    zero = np.zeros_like(z)
    checks.append(check("k(z, 0) = 1", float(np.max(np.abs(kernel_eval(basis, z, zero) - 1))),
                        1e-12))
    return q, checks


def _run_norms(case, seed):
    domain = _domain(case)
    lam = _lam(case, domain)
    mode = case.get("mode", "eigenvalues")
    if mode == "eigenvalues":
        if not domain.is_disk:
            raise ConfigError("the eigenvalue law is checked on the disk")
        k_max = _int(case, "k_max", 12)
        basis = bergman_basis(domain, lam, k_max)
        rule = radial_rule(domain, lam, k_max + 1)
        t = toeplitz_matrix(basis, symbol_from_config({"kind": "radial", "profile": "r**2"}),
                            rule).entries
        k = np.arange(k_max + 1)
        law = (k + 1) / (k + lam)
        err = float(np.max(np.abs(np.diag(t) - law)))
        off = float(np.max(np.abs(t - np.diag(np.diag(t)))))
        tol = float(case.get("tol", 1e-10))
        return ({"diagonal": np.diag(t).real.tolist(), "law": law.tolist(), "max_error": err,
                 "max_off_diagonal": off},
                [check("diagonal equals (k+1)/(k+lam)", err, tol),
                 check("off-diagonal entries vanish", off, tol)])
    if mode == "gram_block":
        if domain.shape != (2, 2):
            raise ConfigError("gram_block inspects the collision block on D_{2,2}")
        rule = _rule(case, domain, lam, 2, seed)
        basis = bergman_basis(domain, lam, 2, rule)
        names = [a.grid.tolist() for a in basis.indices]
        i, j = names.index([[1, 0], [0, 1]]), names.index([[0, 1], [1, 0]])
        blk = basis.gram[np.ix_([i, j], [i, j])]
        off = [(a, b) for a in range(basis.dim) for b in range(basis.dim)
               if a != b and basis.gram[a, b] != 0]
        # batch-means error of the off-diagonal entry
        vals = []
        for k in range(rule.n_batches):
            bk = bergman_basis(domain, lam, 2, rule.batch(k))
            vals.append(bk.gram[i, j].real)
        se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
        q = {"block": [[[v.real, v.imag] for v in row] for row in blk],
             "offdiag_real": float(blk[0, 1].real), "offdiag_stderr": se,
             "nonzero_offdiagonal_positions": [[int(a), int(b)] for a, b in off]}
        checks = [check("single off-diagonal pair in the Gram", len(off), 2, "=="),
                  check("collision entry nonzero", abs(float(blk[0, 1].real)), None, "beyond_se", se),
                  check("collision entry sign", float(np.sign(blk[0, 1].real)),
                        float(case.get("expect_sign", -1)), "==")]
        return q, checks
    raise ConfigError(f"unknown norms mode {mode!r}")


_RUNNERS = {"census": _run_census, "commutant": _run_commutant, "commutator": _run_commutator,
            "intertwine": _run_intertwine, "average": _run_average, "kernel-check": _run_kernel,
            "norms": _run_norms}


def _cases(config: dict) -> list[dict]:
    base = {k: v for k, v in config.items() if k != "cases"}
    cases = config.get("cases") or [{}]
    return [{**copy.deepcopy(base), **c} for c in cases]


def validate(config: dict) -> None:
    """Cheap structural checks, including ``lam > p - 1``, before any computation."""
    if not isinstance(config, dict):
        raise ConfigError("config must be a table")
    exp = config.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}")
    seed = config.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    for case in _cases(config):
        if "domain" in case and "lam" in case:
            _lam(case, _domain(case))
        elif "lam" in case and exp not in ("census", "commutant"):
            raise ConfigError("lam given without a domain")


def run(config: dict, *, seed: int | None = None, cutoff: int | None = None) -> dict:
    """Run an experiment config; ``seed``/``cutoff`` override every case."""
    config = copy.deepcopy(config)
    if seed is not None:
        config["seed"] = int(seed)
        for c in config.get("cases", []):
            c.pop("seed", None)
    if cutoff is not None:
        config["cutoff"] = int(cutoff)
        config.pop("cutoffs", None)
        for c in config.get("cases", []):
            c.pop("cutoff", None)
            c.pop("cutoffs", None)
    validate(config)
    runner = _RUNNERS[config["experiment"]]
    cases_out = []
    for idx, case in enumerate(_cases(config)):
        case_seed = int(case.get("seed", 0))
        q, checks = runner(case, case_seed)
        inputs = {k: v for k, v in case.items()
                  if k not in ("experiment", "name", "description", "criterion")}
        cases_out.append({"index": idx, "label": case.get("label", f"case {idx}"),
                          "inputs": inputs, "quantities": q, "checks": checks})
    all_checks = [c for case in cases_out for c in case["checks"]]
    report = {"format": "experiment-report", "version": 1,
              "experiment": config["experiment"], "name": config.get("name", ""),
              "description": config.get("description", ""), "seed": int(config.get("seed", 0)),
              "cases": cases_out, "checks_total": len(all_checks),
              "checks_passed": sum(c["pass"] for c in all_checks),
              "pass": all(c["pass"] for c in all_checks)}
    return report
