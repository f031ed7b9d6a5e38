import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergersasaki.chart import ChartManifold, structure_functions
from bergersasaki.para import AdmissionError
from bergersasaki.tangent import (FiberNameCollision, TangentBundleGeometry, berger_metric,
                                  berger_metric_inverse_closed_form, connection_closed_form,
                                  induce_tangent_chart, mean_connection, oracle_at,
                                  svk_closed_form, svk_connection, torsion)
from bergersasaki.zoo import load_spec


def _tbg(name, delta):
    s = load_spec(name)
    return TangentBundleGeometry(s.chart, s.phi, delta)


FLAT = _tbg("flat-para-2", 1.0)
SURFACE = _tbg("para-surface", 0.7)
P_FLAT = np.array([0.2, -0.1, 1.0, 0.0])

small = st.floats(-0.8, 0.8)
fiber = st.floats(-1.2, 1.2)


def surface_points():
    return st.tuples(*[small] * 4, *[fiber] * 4).map(np.array)


def test_induced_chart_names():
    chart = induce_tangent_chart(load_spec("flat-para-4").chart)
    assert chart.dim == 8
    assert chart.names[4:] == ("u1", "u2", "u3", "u4")


def test_fiber_name_collision():
    base = load_spec({"name": "c", "dim": 2, "coords": ["u1", "y"],
                      "metric": [["1", "0"], ["1"]], "phi": [["0", "1"], ["1", "0"]]})
    with pytest.raises(FiberNameCollision):
        TangentBundleGeometry(base.chart, base.phi, 1.0)
    assert TangentBundleGeometry(base.chart, base.phi, 1.0, fiber_prefix="v").names[2] == "v1"


@given(surface_points())
@settings(max_examples=25)
def test_frame_times_coframe(p):
    np.testing.assert_allclose(SURFACE.frame(p) @ SURFACE.coframe(p), np.eye(8), atol=1e-13)


def test_vertical_block_and_inverse_example():
    G = FLAT.adapted_metric(P_FLAT)
    np.testing.assert_allclose(G[2:, 2:], [[1, 0], [0, 2]], atol=1e-15)
    inv = berger_metric_inverse_closed_form(FLAT, P_FLAT)
    np.testing.assert_allclose(inv[2:, 2:], [[1, 0], [0, 0.5]], atol=1e-15)


@given(surface_points())
@settings(max_examples=25)
def test_inverse_closed_form(p):
    np.testing.assert_allclose(berger_metric_inverse_closed_form(SURFACE, p)
                               @ SURFACE.adapted_metric(p), np.eye(8), atol=1e-12)


@given(surface_points())
@settings(max_examples=25)
def test_metric_agrees_with_defining_identities(p):
    G = SURFACE.adapted_metric(p)
    X, Y = np.arange(1.0, 5.0), np.array([0.5, -1.0, 0.25, 2.0])
    for kind in ("HH", "HV", "VH", "VV"):
        a, b = SURFACE.lift(kind[0], X), SURFACE.lift(kind[1], Y)
        assert a @ G @ b == pytest.approx(SURFACE.defining_value(p, kind, X, Y), abs=1e-12)
    # the coordinate form is the same tensor
    cof = SURFACE.coframe(p)
    np.testing.assert_allclose(SURFACE.metric_at(p), cof.T @ G @ cof, atol=1e-12)


def test_sasaki_limit():
    s = FLAT.sasaki()
    assert s.delta == 0.0
    np.testing.assert_allclose(s.adapted_metric(P_FLAT), np.eye(4), atol=1e-15)
    np.testing.assert_allclose(oracle_at(s, P_FLAT).coefficients, 0.0, atol=1e-14)


def test_example_connection_values():
    C = oracle_at(FLAT, P_FLAT).line("VV")  # [c, ibar, jbar]
    np.testing.assert_allclose(C[2:, 0, 1], [0.0, 0.5], atol=1e-13)
    np.testing.assert_allclose(C[:, 0, 0], 0.0, atol=1e-13)


@pytest.mark.parametrize("tbg", [FLAT, SURFACE, SURFACE.with_delta(2.0)], ids=repr)
def test_oracle_matches_levi_civita_closed_form(tbg):
    rng = np.random.default_rng(5)
    for _ in range(5):
        p = np.concatenate([rng.uniform(-0.8, 0.8, tbg.n), rng.uniform(-1, 1, tbg.n)])
        diff = oracle_at(tbg, p) - connection_closed_form(tbg, p)
        assert np.abs(diff).max() < 1e-10


def test_wrong_denominator_is_detected():
    p = np.array([0.1, 0.3, 0.0, 1.3])
    diff = oracle_at(FLAT, p) - connection_closed_form(FLAT, p, "1+delta^2")
    assert np.abs(diff).max() > 1e-3


@given(surface_points())
@settings(max_examples=15)
def test_projection_idempotent_and_matches_closed_form(p):
    lc = oracle_at(SURFACE, p)
    sv = svk_connection(SURFACE, lc)
    np.testing.assert_allclose(svk_connection(SURFACE, sv).coefficients, sv.coefficients)
    np.testing.assert_allclose(sv.coefficients, svk_closed_form(SURFACE, p).coefficients,
                               atol=1e-10)


@given(surface_points())
@settings(max_examples=15)
def test_mean_connection_is_torsion_free(p):
    sv = svk_connection(SURFACE, oracle_at(SURFACE, p))
    c = structure_functions(SURFACE.adapted_frame, p)
    mc = mean_connection(SURFACE, sv, c)
    np.testing.assert_allclose(torsion(mc.coefficients, c), 0.0, atol=1e-11)
    # vertical-horizontal line is half of the Levi-Civita one
    np.testing.assert_allclose(mc.line("VH"), 0.5 * oracle_at(SURFACE, p).line("VH"),
                               atol=1e-11)


def test_continuity_in_delta():
    p = np.array([0.3, -0.2, 0.1, 0.4, 0.5, -1.0, 0.7, 0.2])
    base = oracle_at(SURFACE.sasaki(), p).coefficients
    gaps = [np.abs(oracle_at(SURFACE.with_delta(d), p).coefficients - base).max()
            for d in (1e-1, 1e-2, 1e-3)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-5


def test_berger_metric_admission():
    s = load_spec("tilted-2")
    with pytest.raises(AdmissionError):
        berger_metric(s.chart, s.phi, 1.0, npoints=10)
    with pytest.warns(UserWarning):
        tbg = berger_metric(s.chart, s.phi, 1.0, strict=False, npoints=10)
    assert tbg.admitted is False
    ok = load_spec("flat-para-2")
    assert berger_metric(ok.chart, ok.phi, 0.5, npoints=10).admitted is True


def test_mismatched_phi_rejected():
    s = load_spec("flat-para-2")
    other = ChartManifold(("a", "b"), [["1", "0"], ["1"]])
    with pytest.raises(ValueError):
        TangentBundleGeometry(other, s.phi, 1.0)
