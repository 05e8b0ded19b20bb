"""Command line: run experiment configs and presets, render reports, diff exports.

Exit codes: 0 every check passed, 1 a check failed, 2 invalid config or usage.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .basis import BasisError
from .domains import DomainError
from .experiments import ConfigError, run
from .group import GroupError
from .quadrature import QuadratureError
from .reports import FORMATS, diff_documents, render
from .symbols import SymbolError
from .toeplitz import ToeplitzError


__all__ = ["main", "load_config", "list_presets", "preset_path"]

EXIT_PASS, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def list_presets() -> list[str]:
    root = resources.files("bergman_toeplitz") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def preset_path(name: str):
    path = resources.files("bergman_toeplitz") / "presets" / f"{name}.toml"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    return path


def load_config(path=None, preset: str | None = None) -> dict:
    try:
        if preset is not None:
            return tomllib.loads(preset_path(preset).read_text())
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bergman-toeplitz",
                                description="Toeplitz commutator and multiplicity experiments "
                                            "on weighted Bergman spaces.")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", help="TOML experiment config")
    src.add_argument("--preset", help="name of a shipped preset config")
    src.add_argument("--list-presets", action="store_true", help="list shipped presets")
    src.add_argument("--diff", nargs=2, metavar=("A", "B"),
                     help="compare two JSON exports (reports or operator matrices)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", default="json", choices=FORMATS)
    p.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
    p.add_argument("--cutoff", type=int, help="override the truncation degree")
    p.add_argument("--tol", type=float, default=0.0, help="tolerance for --diff")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_INVALID
    if args.list_presets:
        _emit("\n".join(list_presets()) + "\n", args.out)
        return EXIT_PASS
    if args.diff:
        try:
            docs = []
            for path in args.diff:
                with open(path) as fh:
                    docs.append(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        ok, worst, where = diff_documents(docs[0], docs[1], args.tol)
        _emit(f"{'same' if ok else 'different'}: max difference {worst:.6g}"
              f"{'' if where is None else ' at ' + where} (tol {args.tol:g})\n", None)
        return EXIT_PASS if ok else EXIT_FAIL
    if not (args.config or args.preset):
        parser.print_usage(sys.stderr)
        print("error: one of --config, --preset, --list-presets, --diff is required",
              file=sys.stderr)
        return EXIT_INVALID
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_INVALID
    try:
        config = load_config(args.config, args.preset)
        report = run(config, seed=args.seed, cutoff=args.cutoff)
    except (ConfigError, DomainError, SymbolError, GroupError, ToeplitzError, BasisError,
            QuadratureError) as exc:
        code = "invalid_config" if isinstance(exc, ConfigError) else type(exc).__name__
        print(f"{code}: {exc}", file=sys.stderr)
        _emit(render({"format": "experiment-report", "error": {"code": code,
                                                               "message": str(exc)}}, "json")
              if args.format == "json" else "", args.out)
        return EXIT_INVALID
    _emit(render(report, args.format), args.out)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
