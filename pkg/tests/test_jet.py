import numpy as np
import pytest
import sympy as sp

from bergersasaki.chart import ExprArray
from bergersasaki.jet import Jet, jeinsum

NAMES = ("x", "y")
SYMS = sp.symbols(NAMES)
POINT = np.array([0.3, -0.4])


def _sympy_jet(matrix):
    """Value, gradient and Hessian of a sympy matrix at POINT (independent oracle)."""
    subs = dict(zip(SYMS, POINT))
    M = sp.Matrix(matrix)
    val = np.array(M.subs(subs), dtype=float)
    d1 = np.stack([np.array(M.diff(s).subs(subs), dtype=float) for s in SYMS], axis=-1)
    d2 = np.stack([np.stack([np.array(M.diff(a).diff(b).subs(subs), dtype=float)
                             for b in SYMS], axis=-1) for a in SYMS], axis=-2)
    return val, d1, d2


A_TEXT = [["2 + x^2", "x*y"], ["sin(y)", "3 + cos(x*y)"]]
B_TEXT = [["exp(x)", "y"], ["1", "x - y^2"]]


def _jet(text):
    return ExprArray(text, NAMES).jet(POINT, 2)


def _sym(text):
    return [[sp.sympify(e.replace("^", "**")) for e in row] for row in text]


def _close(jet, ref, tol=1e-12):
    for got, want in zip((jet.val, jet.d1, jet.d2), ref):
        np.testing.assert_allclose(got, want, atol=tol, rtol=tol)


def test_expr_array_jet_matches_sympy():
    _close(_jet(A_TEXT), _sympy_jet(_sym(A_TEXT)))


def test_matrix_product_rule():
    prod = jeinsum("ab,bc->ac", _jet(A_TEXT), _jet(B_TEXT))
    _close(prod, _sympy_jet(sp.Matrix(_sym(A_TEXT)) * sp.Matrix(_sym(B_TEXT))))


def test_three_factor_contraction():
    v = ExprArray(["x", "1 + y^2"], NAMES).jet(POINT, 2)
    out = jeinsum("a,ab,b->", v, _jet(A_TEXT), v)
    vs = sp.Matrix([SYMS[0], 1 + SYMS[1] ** 2])
    ref = _sympy_jet([[(vs.T * sp.Matrix(_sym(A_TEXT)) * vs)[0, 0]]])
    _close(out, tuple(r[0, 0] for r in ref))


def test_inverse_derivatives():
    _close(_jet(A_TEXT).inv(), _sympy_jet(sp.Matrix(_sym(A_TEXT)).inv()), 1e-11)


def test_reciprocal():
    f = ExprArray(["2 + x*y", "1 + exp(x)"], NAMES).jet(POINT, 2)
    ref = _sympy_jet([[1 / (2 + SYMS[0] * SYMS[1]), 1 / (1 + sp.exp(SYMS[0]))]])
    _close(f.reciprocal(), tuple(r[0] for r in ref))


def test_embed_places_derivatives():
    j = _jet(A_TEXT)
    e = j.embed(4, [1, 3])
    assert e.d1.shape == (2, 2, 4) and e.d2.shape == (2, 2, 4, 4)
    np.testing.assert_array_equal(e.d1[..., [1, 3]], j.d1)
    np.testing.assert_array_equal(e.d2[..., 1, 3], j.d2[..., 0, 1])
    assert not e.d1[..., [0, 2]].any() and not e.d2[..., 0, :].any()


def test_block_and_transpose():
    a = _jet(A_TEXT)
    z = np.zeros((2, 2))
    blk = Jet.block([[a, z], [z, a.transpose(1, 0)]])
    np.testing.assert_array_equal(blk.val[:2, :2], a.val)
    np.testing.assert_array_equal(blk.d2[2:, 2:], a.d2.transpose(1, 0, 2, 3))
    assert not blk.d1[:2, 2:].any()


def test_truncate_and_diff():
    a = _jet(A_TEXT)
    d = a.diff()
    assert d.order == 1
    np.testing.assert_array_equal(d.val, a.d1)
    np.testing.assert_array_equal(d.d1, a.d2)
    assert a.truncate(0).d1 is None


def test_jeinsum_requires_output():
    with pytest.raises(ValueError):
        jeinsum("ab,bc", _jet(A_TEXT), _jet(B_TEXT))
