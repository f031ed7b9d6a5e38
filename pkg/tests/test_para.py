import numpy as np
import pytest
from hypothesis import given, strategies as st

from bergersasaki.chart import ChartManifold, VectorField
from bergersasaki.para import (AdmissionError, ParaStructure, admit,
                               check_almost_paracomplex, check_anti_para_hermitian,
                               check_nijenhuis_vanishes, nijenhuis)
from bergersasaki.sampling import base_points
from bergersasaki.zoo import builtin_names, load_spec

NAMES = ("x1", "x2")
SWAP = ParaStructure([["0", "1"], ["1", "0"]], NAMES)
PTS = base_points(ChartManifold(NAMES, [["1", "0"], ["1"]]), 10, 3)


@pytest.mark.parametrize("phi,ok", [
    (SWAP, True),
    (ParaStructure([["1", "0"], ["0", "-1"]], NAMES), True),
    (ParaStructure([["1", "0"], ["0", "1"]], NAMES), False),  # squares to I but has trace 2
])
def test_almost_paracomplex(phi, ok):
    assert check_almost_paracomplex(phi, PTS).passed is ok


@pytest.mark.parametrize("metric,ok", [
    ([["2 + x1^2", "0.5*x2"], ["2 + x1^2"]], True),
    ([["1", "0"], ["2"]], False),
])
def test_anti_para_hermitian(metric, ok):
    assert check_anti_para_hermitian(ChartManifold(NAMES, metric), SWAP, PTS).passed is ok


def test_non_hermitian_metric_stops_admission():
    M = ChartManifold(NAMES, [["1", "0"], ["1 + x1^2"]])
    report, ok = admit(M, SWAP, PTS, strict=False)
    assert not ok
    assert [c.check_id for c in report.checks][-1].startswith("admission.anti-para-hermitian")
    with pytest.raises(AdmissionError):
        admit(M, SWAP, PTS, strict=True)


def test_odd_dimension_rejected():
    phi = ParaStructure([["1"]], ("x",))
    with pytest.raises(ValueError):
        check_almost_paracomplex(phi, [np.zeros(1)])


@pytest.mark.parametrize("name", builtin_names())
def test_builtin_admission(name):
    spec = load_spec(name)
    _, ok = admit(spec.chart, spec.phi, base_points(spec.chart, 12, 7), strict=False)
    assert ok is (name != "tilted-2")


def test_constant_structure_is_integrable():
    assert check_nijenhuis_vanishes(SWAP, PTS).passed


def test_nonconstant_structure_in_dimension_two_is_integrable():
    ch, sh = "(0.5*(exp(x2) + exp(-x2)))", "(0.5*(exp(x2) - exp(-x2)))"
    phi = ParaStructure([[ch, sh], [f"-{sh}", f"-{ch}"]], NAMES)
    assert check_almost_paracomplex(phi, PTS).passed
    assert check_nijenhuis_vanishes(phi, PTS).passed


comp = st.sampled_from(["1", "x1", "x2^2", "sin(x1)", "0"])


@given(st.tuples(comp, comp), st.tuples(comp, comp),
       st.tuples(st.floats(-0.7, 0.7), st.floats(-0.7, 0.7)))
def test_nijenhuis_antisymmetric(a, b, x):
    phi = ParaStructure([["0", "1 + 0.1*x1"], ["1/(1 + 0.1*x1)", "0"]], NAMES)
    X, Y = VectorField(list(a), NAMES), VectorField(list(b), NAMES)
    p = np.array(x)
    np.testing.assert_allclose(nijenhuis(phi, X, Y).values(p), -nijenhuis(phi, Y, X).values(p),
                               atol=1e-12)
