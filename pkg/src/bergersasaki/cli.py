"""Command line entry point.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 on infrastructure errors (bad spec, I/O, evaluation failures).
"""

from __future__ import annotations

import argparse
import sys

from .chart import NotPositiveDefiniteError
from .expr import DomainError
from .para import AdmissionError, admit
from .report import emit_report
from .sampling import base_points
from .suite import SUITES, run_suite
from .zoo import BUILTINS, SpecError, builtin_names, dump_spec, load_spec

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _add_run_options(p):
    p.add_argument("spec", help="builtin name or path to a JSON spec file")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--delta", type=float, action="append", default=None,
                   help="repeatable; defaults to the spec file's deltas, else 1.0")
    p.add_argument("--strict", action="store_true",
                   help="abort when the base fails admission")
    p.add_argument("--output", "-o", default=None, help="write the report to this file")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bergersasaki",
        description="Verify Berger-type deformed Sasaki geometry against numeric oracles.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a spec and run the admission checks")
    p.add_argument("spec")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--points", type=int, default=100)

    p = sub.add_parser("verify", help="run a suite and print one line per check")
    _add_run_options(p)
    p.add_argument("--format", choices=("json", "markdown"), default=None,
                   help="also emit the full report in this format")

    p = sub.add_parser("report", help="run a suite and emit the full report")
    _add_run_options(p)
    p.add_argument("--format", choices=("json", "markdown"), required=True)

    p = sub.add_parser("list-builtins", help="list the builtin example manifolds")
    p.add_argument("--show", metavar="NAME", default=None, help="print a builtin as JSON")
    return parser


def _validate(args, out):
    spec = load_spec(args.spec)
    print(f"spec {spec.name}: dim {spec.dim}, coordinates {', '.join(spec.chart.names)}",
          file=out)
    if spec.phi is None:
        print("no phi given; structural validation only", file=out)
        return EXIT_OK
    pts = base_points(spec.chart, args.points, args.seed)
    report, ok = admit(spec.chart, spec.phi, pts, strict=False)
    for c in report.checks:
        extra = f"  ({c.note})" if c.note else ""
        print(f"{'PASS' if c.passed else 'FAIL'} {c.check_id} max={c.max_abs:.3e}{extra}",
              file=out)
    print("admitted" if ok else "not admitted", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def _run(args):
    return run_suite(args.spec, args.suite, args.seed, args.points, args.delta, args.strict)


def _verify(args, out):
    report = _run(args)
    for c in sorted(report.checks, key=lambda c: c.check_id):
        verdict = "".join(f" [{k}: {v}]" for k, v in sorted(c.verdicts.items()))
        print(f"{'PASS' if c.passed else 'FAIL'} {c.check_id} max_abs={c.max_abs:.3e}{verdict}",
              file=out)
    s = report.summary()
    print(f"{s['passed']}/{s['checks']} checks passed", file=out)
    if report.uncovered_formulas:
        print("formulas without checks: " + ", ".join(report.uncovered_formulas), file=out)
    if args.format:
        text = emit_report(report, args.format, args.output)
        if args.output is None:
            out.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


def _report(args, out):
    report = _run(args)
    text = emit_report(report, args.format, args.output)
    if args.output is None:
        out.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


def _list(args, out):
    if args.show:
        if args.show not in BUILTINS:
            raise SpecError(f"no builtin named {args.show!r}")
        out.write(dump_spec(args.show))
        return EXIT_OK
    for name in builtin_names():
        print(f"{name}: {BUILTINS[name]['description']}", file=out)
    return EXIT_OK


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    handler = {"validate": _validate, "verify": _verify, "report": _report,
               "list-builtins": _list}[args.command]
    try:
        return handler(args, out)
    except AdmissionError as exc:
        print(f"admission failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (SpecError, DomainError, NotPositiveDefiniteError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
