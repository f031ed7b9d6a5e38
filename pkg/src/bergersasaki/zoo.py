"""Builtin example manifolds and the JSON manifold-spec format.

A spec is a JSON object::

    {
      "name": "flat-para-2",
      "dim": 2,
      "coords": ["x1", "x2"],
      "metric": [["1", "0"], ["1"]],        # upper-triangle rows, or full rows
      "phi": [["0", "1"], ["1", "0"]],      # optional, row = upper index
      "deltas": [0, 0.5, 1, 2],             # optional
      "vector_fields": {"x1-d2": ["0", "x1"]},   # optional
      "second_metric": [["2", "0"], ["2"]]       # optional
    }

Entries are numbers or expression strings in the coordinate names.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field

import numpy as np

from .chart import ChartManifold, VectorField, _sym_from_upper
from .expr import ParseError, as_expr, free_vars
from .para import ParaStructure

__all__ = ["SpecError", "ManifoldSpec", "BUILTINS", "builtin_names", "load_spec",
           "spec_from_dict", "dump_spec"]

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class SpecError(ValueError):
    """Malformed or invalid manifold spec; carries a location when known."""

    def __init__(self, message, line=None, column=None, field=None):
        where = []
        if field:
            where.append(f"field {field}")
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.column = column
        self.field = field


@dataclass
class ManifoldSpec:
    name: str
    chart: ChartManifold
    phi: ParaStructure | None
    deltas: list = field(default_factory=list)
    vector_fields: dict = field(default_factory=dict)
    second_metric: ChartManifold | None = None
    description: str = ""
    raw: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.chart.dim


def _flat(n, k):
    swap = [["0"] * n for _ in range(n)]
    for i in range(k):
        swap[i][i + k] = swap[i + k][i] = "1"
    return swap


def _identity_upper(n, scale="1"):
    return [[scale if j == i else "0" for j in range(i, n)] for i in range(n)]


def _para_surface():
    A = "(1 + 0.3*((x1 + x3)^2 + (x2 + x4)^2))"
    B = "(1 + 0.2*(x1 - x3)^2)"
    a, b = f"{A} + {B}", f"{A} - {B}"
    return [[a, "0", b, "0"], ["0", a, "0", b], [b, "0", a, "0"], ["0", b, "0", a]]


BUILTINS = {
    "flat-para-2": {
        "name": "flat-para-2",
        "description": "R^2 with the identity metric and the swap structure; flat anti-paraKahler.",
        "dim": 2,
        "coords": ["x1", "x2"],
        "metric": _identity_upper(2),
        "phi": _flat(2, 1),
        "deltas": [0, 0.5, 1, 2],
        "vector_fields": {
            "zero": ["0", "0"],
            "constant": ["1", "0.5"],
            "x1-d2": ["0", "x1"],
            "x1-d1": ["x1", "0"],
            "quadratic-d1": ["x1^2", "0"],
            "diagonal": ["x1", "x1"],
        },
        "second_metric": _identity_upper(2, "2"),
    },
    "flat-para-4": {
        "name": "flat-para-4",
        "description": "R^4 with the identity metric and the block swap of the two planes; "
                       "second metric is the para-surface metric.",
        "dim": 4,
        "coords": ["x1", "x2", "x3", "x4"],
        "metric": _identity_upper(4),
        "phi": _flat(4, 2),
        "deltas": [0, 0.5, 1, 2],
        "vector_fields": {
            "zero": ["0", "0", "0", "0"],
            "constant": ["1", "0", "0.5", "-0.25"],
            "x1-d2": ["0", "x1", "0", "0"],
            "diagonal": ["x1", "0", "x1", "0"],
        },
        "second_metric": _para_surface(),
    },
    "para-surface": {
        "name": "para-surface",
        "description": "Product of two curved surfaces written in the (x, y) chart of R^4: "
                       "g = A|dx + dy|^2 + B|dx - dy|^2 with phi swapping x and y. "
                       "Anti-paraKahler and not flat.",
        "dim": 4,
        "coords": ["x1", "x2", "x3", "x4"],
        "metric": _para_surface(),
        "phi": _flat(4, 2),
        "deltas": [0, 0.5, 1, 2],
        "vector_fields": {
            "zero": ["0", "0", "0", "0"],
            "x1-d2": ["0", "x1", "0", "0"],
            "coordinate-d1": ["1", "0", "0", "0"],
            "mixed": ["x1", "0.5", "x2*x3", "0"],
        },
        "second_metric": [[f"2.5*({e})" if e != "0" else "0" for e in row]
                          for row in _para_surface()],
    },
    "para-cr-2": {
        "name": "para-cr-2",
        "description": "R^2 with g = [[a, b], [b, a]], a + j b paraholomorphic; "
                       "anti-paraKahler but flat (a product of two lines).",
        "dim": 2,
        "coords": ["x1", "x2"],
        "metric": [["2 + 0.1*(x1^2 + x2^2)", "0.2*x1*x2"], ["2 + 0.1*(x1^2 + x2^2)"]],
        "phi": _flat(2, 1),
        "deltas": [1],
        "vector_fields": {"x1-d2": ["0", "x1"]},
    },
    "tilted-2": {
        "name": "tilted-2",
        "description": "Anti-paraHermitian but not anti-paraKahler; admission fails at the "
                       "parallelism rung.",
        "dim": 2,
        "coords": ["x1", "x2"],
        "metric": [["1 + 0.2*x1^2", "0.1*x2"], ["1 + 0.2*x1^2"]],
        "phi": _flat(2, 1),
        "deltas": [1],
        "vector_fields": {"x1-d2": ["0", "x1"]},
    },
}


def builtin_names():
    return sorted(BUILTINS)


def _entry(value, names, where):
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise SpecError(f"expected a number or expression string, got {value!r}", field=where)
    try:
        e = as_expr(value)
    except ParseError as exc:
        raise SpecError(f"cannot parse {value!r}: {exc}", column=exc.column, field=where) from None
    unknown = sorted(free_vars(e) - set(names))
    if unknown:
        raise SpecError(f"unknown coordinate(s) {unknown} in {value!r}", field=where)
    return e


def _matrix(rows, n, names, where, allow_upper):
    if not isinstance(rows, list) or len(rows) != n or not all(isinstance(r, list) for r in rows):
        raise SpecError(f"expected {n} rows", field=where)
    lengths = [len(r) for r in rows]
    exprs = [[_entry(v, names, f"{where}[{i}][{j}]") for j, v in enumerate(r)]
             for i, r in enumerate(rows)]
    if lengths == [n] * n:
        return np.array(exprs, dtype=object) if n else np.empty((0, 0), dtype=object)
    if allow_upper and lengths == list(range(n, 0, -1)):
        return _sym_from_upper(exprs, n)
    shape = "full rows" + (" or upper-triangle rows" if allow_upper else "")
    raise SpecError(f"row lengths {lengths} do not match {shape} for dimension {n}", field=where)


def spec_from_dict(data):
    """Validate a decoded spec and build its objects."""
    if not isinstance(data, dict):
        raise SpecError("a spec must be a JSON object")
    known = {"name", "description", "dim", "coords", "metric", "phi", "deltas",
             "vector_fields", "second_metric"}
    extra = sorted(set(data) - known)
    if extra:
        raise SpecError(f"unknown keys {extra}")
    for key in ("name", "dim", "coords", "metric"):
        if key not in data:
            raise SpecError(f"missing required key {key!r}")
    name = data["name"]
    if not isinstance(name, str) or not name:
        raise SpecError("name must be a non-empty string", field="name")
    n = data["dim"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SpecError("dim must be a positive integer", field="dim")
    coords = data["coords"]
    if not isinstance(coords, list) or len(coords) != n:
        raise SpecError(f"coords must list {n} names", field="coords")
    for c in coords:
        if not isinstance(c, str) or not _NAME.match(c):
            raise SpecError(f"bad coordinate name {c!r}", field="coords")
    if len(set(coords)) != n:
        raise SpecError("coordinate names must be distinct", field="coords")
    names = tuple(coords)

    metric = _matrix(data["metric"], n, names, "metric", allow_upper=True)
    for i in range(n):
        for j in range(i):
            if str(metric[i, j]) != str(metric[j, i]):
                raise SpecError(f"metric is not symmetric at ({i}, {j})", field="metric")
    chart = ChartManifold(names, metric, name=name)

    phi = None
    if data.get("phi") is not None:
        if n % 2:
            raise SpecError(f"an almost paracomplex structure needs even dimension, got {n}",
                            field="phi")
        phi = ParaStructure(_matrix(data["phi"], n, names, "phi", allow_upper=False), names)

    deltas = data.get("deltas", [])
    if not isinstance(deltas, list) or any(
            isinstance(d, bool) or not isinstance(d, (int, float)) or d < 0 for d in deltas):
        raise SpecError("deltas must be a list of non-negative numbers", field="deltas")

    fields = {}
    raw_fields = data.get("vector_fields", {})
    if not isinstance(raw_fields, dict):
        raise SpecError("vector_fields must be an object", field="vector_fields")
    for key, comps in raw_fields.items():
        where = f"vector_fields.{key}"
        if not isinstance(comps, list) or len(comps) != n:
            raise SpecError(f"expected {n} components", field=where)
        fields[key] = VectorField([_entry(v, names, f"{where}[{i}]") for i, v in enumerate(comps)],
                                  names)

    second = None
    if data.get("second_metric") is not None:
        h = _matrix(data["second_metric"], n, names, "second_metric", allow_upper=True)
        second = chart.with_metric(h, name=f"{name}:h")

    return ManifoldSpec(name, chart, phi, [float(d) for d in deltas], fields, second,
                        data.get("description", ""), copy.deepcopy(data))


def load_spec(source):
    """Load a builtin by name, or a JSON spec file by path."""
    if isinstance(source, dict):
        return spec_from_dict(source)
    if source in BUILTINS:
        return spec_from_dict(copy.deepcopy(BUILTINS[source]))
    try:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read spec {source!r}: {exc.strerror}; builtins are "
                        f"{', '.join(builtin_names())}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from None
    return spec_from_dict(data)


def dump_spec(spec_or_name):
    data = BUILTINS[spec_or_name] if isinstance(spec_or_name, str) else spec_or_name.raw
    return json.dumps(data, indent=2) + "\n"
