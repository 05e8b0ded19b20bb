"""Deterministic rendering of experiment reports (json, csv, human)."""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

__all__ = ["render", "canonical_json", "to_plain", "FORMATS", "diff_documents"]

FORMATS = ("json", "csv", "human")


def to_plain(obj):
    """Convert numpy scalars/arrays and tuples into JSON-compatible values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _dump(obj, out: list) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(k))
            out.append(":")
            _dump(obj[k], out)
        out.append("}")
    elif isinstance(obj, list):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _dump(v, out)
        out.append("]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    else:
        out.append(json.dumps(str(obj) if not isinstance(obj, str) else obj))


def canonical_json(doc) -> str:
    """Sorted keys, no whitespace, floats with 17 significant digits."""
    out: list[str] = []
    _dump(to_plain(doc), out)
    return "".join(out) + "\n"


def _csv(doc: dict) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    if doc.get("experiment") == "census":
        wr.writerow(["case", "rows", "cols", "multiplicity", "witnesses"])
        for case in doc.get("cases", []):
            for w in case["quantities"]["census"]["weights"]:
                wr.writerow([case["index"], " ".join(map(str, w["rows"])),
                             " ".join(map(str, w["cols"])), w["multiplicity"],
                             ";".join(json.dumps(a) for a in w["indices"])])
        return buf.getvalue()
    wr.writerow(["case", "check", "value", "stderr", "tolerance", "op", "pass"])
    for case in doc.get("cases", []):
        for c in case["checks"]:
            wr.writerow([case["index"], c["check"], _cell(c["value"]), _cell(c.get("stderr")),
                         _cell(c["tolerance"]), c["op"], c["pass"]])
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return json.dumps(v) if isinstance(v, (list, dict)) else str(v)


def _human(doc: dict) -> str:
    if not doc:
        return ""
    lines = [f"experiment {doc.get('experiment')} ({doc.get('name', '')}) seed={doc.get('seed')}"]
    for case in doc.get("cases", []):
        lines.append(f"  {case['label']}")
        for c in case["checks"]:
            mark = "PASS" if c["pass"] else "FAIL"
            err = f" +- {c['stderr']:.3g}" if c.get("stderr") is not None else ""
            val = f"{c['value']:.6g}" if isinstance(c["value"], float) else str(c["value"])
            tol = f"{c['tolerance']:.3g}" if isinstance(c["tolerance"], float) else str(c["tolerance"])
            lines.append(f"    {mark} {c['check']}: {val}{err} {c['op']} {tol}")
    lines.append(f"{doc.get('checks_passed', 0)}/{doc.get('checks_total', 0)} checks passed"
                 f" -> {'PASS' if doc.get('pass') else 'FAIL'}")
    return "\n".join(lines) + "\n"


def render(doc: dict, fmt: str = "json") -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")
    doc = to_plain(doc)
    if fmt == "json":
        return canonical_json(doc)
    if fmt == "csv":
        return _csv(doc)
    return _human(doc)


def _numeric_diff(a, b, path="$"):
    """Yield (path, difference) for every leaf; inf when structure differs."""
    if isinstance(a, dict) and isinstance(b, dict):
        for k in sorted(set(a) | set(b)):
            if k not in a or k not in b:
                yield f"{path}.{k}", math.inf
            else:
                yield from _numeric_diff(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            yield path, math.inf
        for i, (x, y) in enumerate(zip(a, b)):
            yield from _numeric_diff(x, y, f"{path}[{i}]")
    elif isinstance(a, bool) or isinstance(b, bool):
        yield path, 0.0 if a == b else math.inf
    elif isinstance(a, (int, float)) and isinstance(b, (int, float)):
        yield path, abs(a - b) if a != b else 0.0
    else:
        yield path, 0.0 if a == b else math.inf


def diff_documents(a, b, tol: float) -> tuple[bool, float, str | None]:
    """Compare two JSON documents leafwise; numbers may differ by ``tol``."""
    worst, where = 0.0, None
    for path, d in _numeric_diff(a, b):
        if d > worst or (math.isnan(d)):
            worst, where = d, path
    return worst <= tol, worst, where
