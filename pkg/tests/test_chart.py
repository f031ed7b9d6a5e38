import numpy as np
import pytest
from hypothesis import given, strategies as st

from bergersasaki.chart import (ChartManifold, FrameField, NotPositiveDefiniteError, TensorField,
                                VectorField, christoffel, covariant_derivative,
                                frame_connection_coefficients, lie_bracket,
                                metric_inverse_at, riemann, structure_functions)

SPHERE = ChartManifold(("th", "ph"), [["1", "0"], ["sin(th)^2"]], name="sphere")
WARPED = ChartManifold(("x", "y", "z"),
                       [["1 + x^2", "0.3*y", "0"], ["2 + sin(x*z)", "0.1*x"], ["1.5 + y^2"]],
                       name="warped")
coords = st.floats(-0.7, 0.7)
point3 = st.tuples(coords, coords, coords).map(np.array)


def test_sphere_christoffel_at_quarter_turn():
    G = christoffel(SPHERE).values(np.array([np.pi / 4, 0.2]))
    assert G[0, 1, 1] == pytest.approx(-0.5, abs=1e-14)
    assert G[1, 0, 1] == pytest.approx(1.0, abs=1e-14)
    assert G[1, 1, 0] == pytest.approx(1.0, abs=1e-14)


def _scalar(M, x):
    R = riemann(M).values(x)
    ric = np.einsum("hjkh->jk", R)
    return np.einsum("jk,jk->", metric_inverse_at(M, x), ric)


def test_sphere_scalar_curvature_is_two():
    for th in (0.4, 1.0, 2.2):
        assert _scalar(SPHERE, np.array([th, 0.0])) == pytest.approx(2.0, abs=1e-12)


def test_metric_inverse_examples():
    flat = ChartManifold(("a", "b"), [["2", "0"], ["8"]])
    np.testing.assert_allclose(metric_inverse_at(flat, [0, 0]), np.diag([0.5, 0.125]))
    off = ChartManifold(("a", "b"), [["2", "1"], ["2"]])
    np.testing.assert_allclose(metric_inverse_at(off, [0, 0]),
                               np.array([[2, -1], [-1, 2]]) / 3, atol=1e-15)


def test_indefinite_metric_rejected():
    bad = ChartManifold(("a", "b"), [["1", "2"], ["1"]])
    with pytest.raises(NotPositiveDefiniteError):
        metric_inverse_at(bad, [0.0, 0.0])


@given(point3)
def test_christoffel_symmetric_lower(x):
    G = christoffel(WARPED).values(x)
    np.testing.assert_allclose(G, G.transpose(0, 2, 1), atol=1e-13)


@given(point3)
def test_curvature_antisymmetric_and_bianchi(x):
    R = riemann(WARPED).values(x)
    np.testing.assert_allclose(R, -R.transpose(1, 0, 2, 3), atol=1e-12)
    cyc = R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)
    np.testing.assert_allclose(cyc, 0, atol=1e-12)


@given(point3)
def test_metric_is_parallel(x):
    g = WARPED.metric_jet(x, 2)
    T = TensorField(WARPED.metric, ("d", "d"), WARPED.names)
    np.testing.assert_allclose(g.val, T.values(x))
    np.testing.assert_allclose(covariant_derivative(T, christoffel(WARPED)).values(x), 0,
                               atol=1e-12)


@given(point3)
def test_ricci_identity(x):
    # nabla_i nabla_j X^h - nabla_j nabla_i X^h = R_ijk^h X^k
    X = VectorField(["x*y", "sin(z)", "1 + x^2"], WARPED.names)
    G = christoffel(WARPED)
    dd = covariant_derivative(covariant_derivative(X, G), G).values(x)
    R = riemann(WARPED).values(x)
    np.testing.assert_allclose(dd - dd.transpose(1, 0, 2), np.einsum("ijkh,k->ijh", R,
                               X.values(x)), atol=1e-11)


def test_lie_bracket_example():
    X = VectorField(["x^2"], ("x",))
    Y = VectorField(["1"], ("x",))
    assert lie_bracket(X, Y).values(np.array([1.5]))[0] == pytest.approx(-3.0)


def test_identity_frame_reproduces_christoffels():
    x = np.array([0.2, -0.3, 0.5])
    C = frame_connection_coefficients(christoffel(WARPED), FrameField.identity(3)).values(x)
    np.testing.assert_allclose(C, christoffel(WARPED).values(x), atol=1e-15)


def test_frame_coefficients_match_change_of_basis():
    F = FrameField.from_exprs([["1", "x", "0"], ["0", "1", "y"], ["z", "0", "2"]],
                              WARPED.names, "skew")
    x = np.array([0.1, 0.4, -0.2])
    C = frame_connection_coefficients(christoffel(WARPED), F).values(x)
    E = F.matrix(x)
    G = christoffel(WARPED).values(x)
    dF = F.jet(x, 1).d1
    want = np.einsum("cB,Aa,BbA->cab", np.linalg.inv(E), E,
                     dF + np.einsum("BAC,Cb->BbA", G, E))
    np.testing.assert_allclose(C, want, atol=1e-13)
    # torsion-free: C_ab - C_ba equals the structure functions
    np.testing.assert_allclose(C - C.transpose(0, 2, 1), structure_functions(F, x), atol=1e-12)


@given(point3)
def test_raise_then_lower_round_trip(x):
    g = WARPED.metric_at(x)
    v = np.array([0.3, -1.2, 0.7])
    np.testing.assert_allclose(g @ (metric_inverse_at(WARPED, x) @ v), v, atol=1e-13)
