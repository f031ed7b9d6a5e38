import io
import json

import pytest

from bergersasaki.cli import EXIT_ERROR, EXIT_FAIL, EXIT_OK, main
from bergersasaki.report import VerificationReport, emit_report
from bergersasaki.suite import FORMULAS, run_suite
from bergersasaki.zoo import BUILTINS, SpecError, builtin_names, dump_spec, load_spec

GOOD = {"name": "tiny", "dim": 2, "coords": ["x", "y"], "metric": [["1", "0"], ["1"]],
        "phi": [["0", "1"], ["1", "0"]], "deltas": [1]}


def _run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def _write(tmp_path, data, name="spec.json"):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(path)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtins_load_and_round_trip(name):
    spec = load_spec(name)
    assert spec.name == name
    again = load_spec(json.loads(dump_spec(name)))
    assert again.chart.names == spec.chart.names


def test_builtin_shapes():
    assert builtin_names() == sorted(BUILTINS)
    assert load_spec("para-surface").dim == 4
    assert load_spec("flat-para-2").second_metric is not None


@pytest.mark.parametrize("patch,match", [
    ({"dim": 3, "coords": ["x", "y", "z"], "metric": [["1", "0", "0"], ["1", "0"], ["1"]],
      "phi": [["0", "1", "0"], ["1", "0", "0"], ["0", "0", "1"]]}, "even dimension"),
    ({"metric": [["1", "0"], ["1", "2"]]}, "not symmetric"),
    ({"metric": [["1", "z"], ["1"]]}, "unknown coordinate"),
    ({"metric": [["1", "sin(x"], ["1"]]}, "cannot parse"),
    ({"colour": "red"}, "unknown keys"),
    ({"deltas": [-1]}, "non-negative"),
    ({"coords": ["x", "x"]}, "distinct"),
    ({"vector_fields": {"v": ["1"]}}, "components"),
])
def test_spec_validation_errors(patch, match):
    with pytest.raises(SpecError, match=match):
        load_spec({**GOOD, **patch})


def test_json_error_location(tmp_path):
    path = _write(tmp_path, '{\n  "name": "x",\n  "dim": 2,,\n}')
    with pytest.raises(SpecError) as err:
        load_spec(path)
    assert err.value.line == 3 and err.value.column == 12


def test_missing_file_mentions_builtins():
    with pytest.raises(SpecError, match="flat-para-2"):
        load_spec("/nonexistent/spec.json")


def test_report_json_round_trip():
    r = run_suite("flat-para-2", "connection", npoints=5, deltas=[1.0])
    text = emit_report(r, "json")
    assert VerificationReport.from_json(text).to_json() == text
    assert json.loads(text)["schema_version"]


def test_report_deterministic():
    a = run_suite("para-surface", "metric", seed=3, npoints=6).to_json()
    b = run_suite("para-surface", "metric", seed=3, npoints=6).to_json()
    c = run_suite("para-surface", "metric", seed=4, npoints=6).to_json()
    assert a == b and a != c


def test_markdown_has_one_row_per_formula():
    r = run_suite("flat-para-2", "metric", npoints=4, deltas=[0.5])
    md = emit_report(r, "markdown")
    rows = [line for line in md.splitlines() if line.startswith("| ") and "|" in line[2:]]
    formulas = {c.formula for c in r.checks}
    for f in formulas:
        assert sum(row.startswith(f"| {f} |") for row in rows) == 1
    assert "## Errata verdicts" in md


def test_every_formula_is_covered_by_all():
    r = run_suite("flat-para-2", "all", npoints=3, deltas=[1.0])
    assert r.uncovered_formulas == []
    assert {c.formula for c in r.checks} >= set(FORMULAS)
    assert VerificationReport.from_json(r.to_json()).summary() == r.summary()


def test_unknown_suite_rejected():
    with pytest.raises(ValueError):
        run_suite("flat-para-2", "everything")


def test_cli_validate_ok_and_failing():
    code, out = _run(["validate", "flat-para-2", "--points", "5"])
    assert code == EXIT_OK and "admitted" in out
    code, out = _run(["validate", "tilted-2", "--points", "5"])
    assert code == EXIT_FAIL and "not admitted" in out


def test_cli_infrastructure_errors(tmp_path):
    assert _run(["validate", "/nonexistent.json"])[0] == EXIT_ERROR
    bad = _write(tmp_path, {**GOOD, "dim": 3})
    assert _run(["validate", bad])[0] == EXIT_ERROR
    assert _run(["verify", "flat-para-2", "--points", "0"])[0] == EXIT_ERROR
    assert _run(["list-builtins", "--show", "nope"])[0] == EXIT_ERROR


def test_cli_strict_admission_failure():
    code, _ = _run(["verify", "tilted-2", "--suite", "metric", "--points", "5", "--strict"])
    assert code == EXIT_FAIL


def test_cli_verify_and_report(tmp_path):
    code, out = _run(["verify", "flat-para-2", "--suite", "metric", "--points", "5",
                      "--delta", "0.5", "--delta", "2"])
    assert code == EXIT_OK
    assert "checks passed" in out and "[delta=2]" in out
    dest = tmp_path / "r.json"
    code, out = _run(["report", "flat-para-2", "--suite", "metric", "--points", "5",
                      "--format", "json", "-o", str(dest)])
    assert code == EXIT_OK and out == ""
    assert json.loads(dest.read_text())["deltas"] == [0.0, 0.5, 1.0, 2.0]


def test_cli_list_builtins():
    code, out = _run(["list-builtins"])
    assert code == EXIT_OK
    assert [line.split(":")[0] for line in out.splitlines()] == builtin_names()
    code, out = _run(["list-builtins", "--show", "para-surface"])
    assert json.loads(out)["name"] == "para-surface"


def test_cli_user_spec_file(tmp_path):
    path = _write(tmp_path, GOOD)
    code, out = _run(["verify", path, "--suite", "connection", "--points", "4"])
    assert code == EXIT_OK, out
