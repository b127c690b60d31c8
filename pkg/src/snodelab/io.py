"""File formats and deterministic report serialization.

Wire conventions: complex scalars are 2-arrays [re, im]; matrices are
row-major nested arrays of those pairs.  Node files carry
{"n", "p", "A", "S", "Phi1", "Phi2"}; constant pair files {"R", "Q"};
disk-derived pair files {"q": "zero" | "identity" | matrix, "a": matrix}.

Reports serialize to JSON with sorted keys and 17-significant-digit reals so
identical inputs produce byte-identical outputs; files are written once,
atomically.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile

import numpy as np

from .errors import ConfigParse
from .lft import constant_pair, pair_from_disk_pair
from .linalg import from_reim, to_reim
from .snode import SNode

__all__ = [
    "parse_complex",
    "load_node",
    "save_node",
    "node_to_dict",
    "load_pair",
    "to_jsonable",
    "dumps_report",
    "emit_report",
    "entropy_reports_csv",
    "growth_report_csv",
    "density_grid_csv",
]


def parse_complex(text):
    """Parse the command-line complex syntax 'a+bi' (also 'i', '2i', '3')."""
    s = str(text).strip().replace(" ", "")
    if not s:
        raise ConfigParse("empty complex literal")
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise ConfigParse(f"cannot parse complex literal {text!r}") from exc


# -- nodes ----------------------------------------------------------------------

def node_to_dict(node):
    return {
        "n": node.n,
        "p": node.p,
        "A": to_reim(node.A),
        "S": to_reim(node.S),
        "Phi1": to_reim(node.Phi1),
        "Phi2": to_reim(node.Phi2),
    }


def node_from_dict(data):
    try:
        n, p = int(data["n"]), int(data["p"])
        A = from_reim(data["A"], "A")
        S = from_reim(data["S"], "S")
        Phi1 = from_reim(data["Phi1"], "Phi1")
        Phi2 = from_reim(data["Phi2"], "Phi2")
    except KeyError as exc:
        raise ConfigParse(f"node file missing field {exc}") from exc
    if A.shape != (n, n) or Phi1.shape != (n, p):
        raise ConfigParse(
            f"node file shape mismatch: n={n}, p={p}, A{A.shape}, Phi1{Phi1.shape}"
        )
    return SNode(A=A, S=S, Phi1=Phi1, Phi2=Phi2)


def load_node(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigParse(f"{path}: invalid JSON: {exc}") from exc
    return node_from_dict(data)


def save_node(node, path):
    emit_report(node_to_dict(node), path)


# -- pairs ----------------------------------------------------------------------

def load_pair(path, moebius=None):
    """Load a constant or disk-derived pair from JSON."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigParse(f"{path}: invalid JSON: {exc}") from exc
    return pair_from_dict(data, moebius=moebius)


def pair_from_dict(data, moebius=None):
    if "R" in data and "Q" in data:
        return constant_pair(from_reim(data["R"], "R"), from_reim(data["Q"], "Q"))
    if "q" in data and "a" in data:
        a = from_reim(data["a"], "a")
        p = a.shape[0]
        q = data["q"]
        if q == "zero":
            qm = np.zeros((p, p))
        elif q == "identity":
            qm = np.eye(p)
        else:
            qm = from_reim(q, "q")
        if moebius is None:
            raise ConfigParse("disk-derived pair needs a Moebius map (z0)")
        return pair_from_disk_pair(qm, a, moebius)
    raise ConfigParse("pair file must carry either R/Q or q/a")


# -- deterministic JSON -----------------------------------------------------------

def to_jsonable(obj):
    """Recursively convert reports/dataclasses/arrays to plain JSON types."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        if obj.dtype.kind == "c":
            if obj.ndim == 1:
                return [[float(v.real), float(v.imag)] for v in obj]
            if obj.ndim == 2:
                return to_reim(obj)
            return [to_jsonable(sub) for sub in obj]
        return obj.tolist()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {}
        for f in dataclasses.fields(obj):
            if f.name in ("map", "grid", "node", "pair", "R", "Q", "disk_q"):
                continue
            out[f.name] = to_jsonable(getattr(obj, f.name))
        return out
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return str(obj)


def _format_json(obj, indent=0):
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {_format_json(obj[k], indent + 2)}'
            for k in sorted(obj)
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        flat = all(not isinstance(v, (dict, list, tuple)) for v in obj)
        if flat:
            return "[" + ", ".join(_format_json(v) for v in obj) + "]"
        items = ",\n".join(f"{pad}  {_format_json(v, indent + 2)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, float):
        if not np.isfinite(obj):
            return json.dumps(str(obj))
        return format(obj, ".17g")
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(obj)


def dumps_report(report):
    """Canonical JSON text: sorted keys, 17 significant digits for reals."""
    return _format_json(to_jsonable(report)) + "\n"


def _atomic_write(text, path):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(report, path=None, fmt="json"):
    """Serialize a report deterministically; path None prints to stdout."""
    if fmt == "json":
        text = dumps_report(report)
    elif fmt == "csv":
        text = report if isinstance(report, str) else _csv_dispatch(report)
    else:
        raise ConfigParse(f"unknown report format {fmt!r}")
    if path is None:
        print(text, end="")
    else:
        _atomic_write(text, path)
    return text


def _csv_dispatch(report):
    from .entropy import EntropyReport, GrowthReport

    if isinstance(report, GrowthReport):
        return growth_report_csv(report)
    if isinstance(report, (list, tuple)) and report and isinstance(report[0], EntropyReport):
        return entropy_reports_csv(report)
    if hasattr(report, "values") and hasattr(report, "grid"):
        return density_grid_csv(report)
    raise ConfigParse(f"no CSV layout for {type(report).__name__}")


def _fmt(x):
    return format(float(x), ".17g")


def entropy_reports_csv(reports):
    lines = ["z_re,z_im,lhs_min,rhs_min,gap,equality"]
    for r in reports:
        lines.append(
            ",".join(
                [_fmt(r.z.real), _fmt(r.z.imag), _fmt(r.lhs_min), _fmt(r.rhs_min),
                 _fmt(r.gap), "1" if r.equality else "0"]
            )
        )
    return "\n".join(lines) + "\n"


def growth_report_csv(report):
    lines = ["r,M_upper,M_annulus,M_lower"]
    for i, r in enumerate(report.radii):
        lines.append(",".join(_fmt(v) for v in
                              (r, report.M_upper[i], report.M_annulus[i], report.M_lower[i])))
    return "\n".join(lines) + "\n"


def density_grid_csv(density):
    p = density.p
    header = ["theta", "t"]
    for i in range(p):
        for j in range(p):
            header += [f"mu_{i}{j}_re", f"mu_{i}{j}_im"]
    lines = [",".join(header)]
    ts = density.axis_points()
    for k, theta in enumerate(density.grid.angles):
        row = [_fmt(theta), _fmt(ts[k]) if np.isfinite(ts[k]) else "inf"]
        for i in range(p):
            for j in range(p):
                v = density.values[k, i, j]
                row += [_fmt(v.real), _fmt(v.imag)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
