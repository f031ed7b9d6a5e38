"""Verification records, reports and their serialized forms."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

SCHEMA_VERSION = "1.0"


@dataclass
class CheckRecord:
    check_id: str
    formula: str
    points: int
    max_abs: float
    max_rel: float
    passed: bool
    verdicts: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self):
        d = asdict(self)
        d["max_abs"] = _clean(self.max_abs)
        d["max_rel"] = _clean(self.max_rel)
        d["passed"] = bool(self.passed)
        d["points"] = int(self.points)
        d["verdicts"] = {k: _clean(v) for k, v in sorted(self.verdicts.items())}
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _clean(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        v = v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    return v


def deviation(actual, expected):
    """(max |a - e|, max |a - e| / (1 + |e|)) over all components."""
    a = np.asarray(actual, dtype=float)
    e = np.asarray(expected, dtype=float)
    if a.size == 0:
        return 0.0, 0.0
    d = np.abs(a - e)
    return float(d.max()), float((d / (1.0 + np.abs(e))).max())


def within(actual, expected, atol, rtol=0.0):
    a = np.asarray(actual, dtype=float)
    e = np.asarray(expected, dtype=float)
    return bool(np.all(np.abs(a - e) <= atol + rtol * np.abs(e)))


def compare(check_id, formula, actual, expected, points, atol=1e-9, rtol=1e-9,
            verdicts=None, note=""):
    """Record comparing two stacked arrays of per-point values."""
    mabs, mrel = deviation(actual, expected)
    return CheckRecord(check_id, formula, int(points), mabs, mrel,
                       within(actual, expected, atol, rtol), dict(verdicts or {}), note)


def bound(check_id, formula, values, points, limit, verdicts=None, note="", where=None):
    """Record asserting max |values| <= limit.

    With ``where`` (the sample points, one per leading entry of ``values``)
    a failing record names the worst point in its note.
    """
    v = np.abs(np.asarray(values, dtype=float))
    m = float(v.max()) if v.size else 0.0
    ok = m <= limit
    if where is not None and not ok and v.ndim >= 1 and len(v) == len(where):
        k = int(np.argmax(v.reshape(len(v), -1).max(axis=1)))
        worst = ", ".join(f"{c:.6g}" for c in np.asarray(where[k]).ravel())
        note = (note + "; " if note else "") + f"worst point ({worst})"
    return CheckRecord(check_id, formula, int(points), m, m, ok,
                       dict(verdicts or {}), note)


def exceeds(check_id, formula, values, points, limit, verdicts=None, note=""):
    """Record asserting max |values| > limit (a nonvanishing witness)."""
    v = np.abs(np.asarray(values, dtype=float))
    m = float(v.max()) if v.size else 0.0
    return CheckRecord(check_id, formula, int(points), m, m, m > limit,
                       dict(verdicts or {}), note)


def adjudicate(check_id, formula, actual, candidates, points, atol, verdict_key, note=""):
    """Decide which candidate reading of a closed form the oracle supports.

    Passes when exactly one candidate matches, or when every candidate
    matches (the points cannot tell them apart).  The verdict names the
    winner, ``indistinguishable``, ``ambiguous: a | b`` or ``none``.
    """
    devs = {k: deviation(actual, v)[0] for k, v in candidates.items()}
    matches = [k for k, v in candidates.items() if within(actual, v, atol)]
    if len(matches) == len(candidates):
        verdict, ok = "indistinguishable", True
    elif len(matches) == 1:
        verdict, ok = matches[0], True
    elif matches:
        verdict, ok = "ambiguous: " + " | ".join(matches), False
    else:
        verdict, ok = "none", False
    best = min(devs, key=devs.get)
    text = "candidate deviations: " + ", ".join(f"{k}={v:.3e}" for k, v in devs.items())
    note = f"{note}; {text}" if note else text
    rel = deviation(actual, candidates[best])[1]
    return CheckRecord(check_id, formula, int(points), devs[best], rel, ok,
                       {verdict_key: verdict}, note)


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    spec_name: str = ""
    suite: str = ""
    seed: int = 0
    npoints: int = 0
    deltas: list = field(default_factory=list)
    engine_version: str = ""
    convention: str = ""
    admission: dict = field(default_factory=dict)
    uncovered_formulas: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def extend(self, records):
        self.checks.extend(records)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def summary(self):
        n = len(self.checks)
        bad = len(self.failures())
        return {"checks": n, "passed": n - bad, "failed": bad, "all_passed": bad == 0}

    def verdicts(self):
        out = {}
        for c in self.checks:
            for k, v in c.verdicts.items():
                out.setdefault(k, {})[c.check_id] = v
        return {k: dict(sorted(v.items())) for k, v in sorted(out.items())}

    def to_dict(self):
        checks = sorted(self.checks, key=lambda c: c.check_id)
        return {
            "schema_version": SCHEMA_VERSION,
            "engine_version": self.engine_version,
            "spec": self.spec_name,
            "suite": self.suite,
            "seed": self.seed,
            "npoints": self.npoints,
            "deltas": [float(d) for d in self.deltas],
            "convention": self.convention,
            "admission": _clean(self.admission),
            "summary": self.summary(),
            "uncovered_formulas": list(self.uncovered_formulas),
            "checks": [c.to_dict() for c in checks],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')!r}")
        return cls(
            checks=[CheckRecord.from_dict(c) for c in d["checks"]],
            spec_name=d["spec"], suite=d["suite"], seed=d["seed"],
            npoints=d["npoints"], deltas=list(d["deltas"]),
            engine_version=d["engine_version"], convention=d["convention"],
            admission=d["admission"], uncovered_formulas=list(d["uncovered_formulas"]),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _fmt(x):
    return f"{x:.3e}" if isinstance(x, float) else str(x)


def to_markdown(report):
    d = report.to_dict()
    s = d["summary"]
    lines = [
        f"# Verification report: {d['spec']}",
        "",
        f"- suite: `{d['suite']}`  seed: {d['seed']}  points: {d['npoints']}  "
        f"deltas: {', '.join(f'{x:g}' for x in d['deltas'])}",
        f"- engine: {d['engine_version']}  schema: {d['schema_version']}",
        f"- curvature convention: `{d['convention']}`",
        f"- result: {s['passed']}/{s['checks']} checks passed",
        "",
        "## Formulas",
        "",
        "| formula | checks | failed | max abs deviation |",
        "|---|---|---|---|",
    ]
    by_formula = {}
    for c in d["checks"]:
        by_formula.setdefault(c["formula"], []).append(c)
    for f, cs in sorted(by_formula.items()):
        failed = sum(not c["passed"] for c in cs)
        worst = max((c["max_abs"] for c in cs if isinstance(c["max_abs"], float)), default=0.0)
        lines.append(f"| {f} | {len(cs)} | {failed} | {_fmt(worst)} |")
    if d["uncovered_formulas"]:
        lines += ["", "Formulas without checks: " + ", ".join(d["uncovered_formulas"])]
    lines += ["", "## Checks", "",
              "| check | formula | points | max abs | max rel | result |",
              "|---|---|---|---|---|---|"]
    for c in d["checks"]:
        lines.append(f"| {c['check_id']} | {c['formula']} | {c['points']} | "
                     f"{_fmt(c['max_abs'])} | {_fmt(c['max_rel'])} | "
                     f"{'pass' if c['passed'] else 'FAIL'} |")
    verd = report.verdicts()
    lines += ["", "## Errata verdicts", ""]
    if not verd:
        lines.append("No candidate readings were adjudicated.")
    for key, per_check in verd.items():
        lines.append(f"- **{key}**")
        for cid, v in per_check.items():
            lines.append(f"  - {cid}: {v}")
    notes = [c for c in d["checks"] if c["note"]]
    if notes:
        lines += ["", "## Notes", ""]
        lines += [f"- {c['check_id']}: {c['note']}" for c in notes]
    return "\n".join(lines) + "\n"


def emit_report(report, fmt, path=None):
    """Serialize as ``json`` or ``markdown``; write to ``path`` if given."""
    if fmt == "json":
        text = report.to_json()
    elif fmt in ("markdown", "md"):
        text = to_markdown(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
