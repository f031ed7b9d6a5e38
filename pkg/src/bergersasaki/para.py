"""Almost paracomplex structures and their compatibility with a metric.

The admission ladder is: almost paracomplex (phi^2 = id, trace phi = 0)
-> anti-paraHermitian (g(phi X, phi Y) = g(X, Y)) -> anti-paraKahler
(phi parallel for the Levi-Civita connection).  Each rung is decided
numerically at sample points.
"""

from __future__ import annotations

import numpy as np

from .chart import (ExprArray, TensorField, VectorField, christoffel,
                    covariant_derivative, lie_bracket)
from .expr import Const, mk_add, mk_mul
from .report import VerificationReport, bound

__all__ = [
    "ParaStructure", "AdmissionError",
    "check_almost_paracomplex", "check_anti_para_hermitian",
    "check_anti_para_kahler", "check_nijenhuis_vanishes", "nijenhuis",
    "admit",
]

TOL_ALGEBRAIC = 1e-10
TOL_PARALLEL = 1e-9


class AdmissionError(ValueError):
    """A base manifold failed one of the admission checks."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ParaStructure:
    """Components phi^i_j of a (1,1)-tensor; row index is the upper index."""

    def __init__(self, components, names):
        self.names = tuple(names)
        self.dim = len(self.names)
        self.components = ExprArray(components, self.names)
        if self.components.shape != (self.dim, self.dim):
            raise ValueError(f"phi must be {self.dim}x{self.dim}")
        self.field = TensorField(self.components.exprs, ("u", "d"), self.names)

    @property
    def exprs(self):
        return self.components.exprs

    def at(self, point):
        return self.components.values(point)

    def jet(self, point, order=0):
        return self.components.jet(point, order)

    def apply(self, X):
        """Symbolic phi X for a VectorField X."""
        out = []
        for i in range(self.dim):
            acc = Const(0.0)
            for j in range(self.dim):
                acc = mk_add(acc, mk_mul(self.exprs[i, j], X[j]))
            out.append(acc)
        return VectorField(out, X.names)


def _require_even(phi):
    if phi.dim % 2:
        raise ValueError(f"an almost paracomplex structure needs even dimension, got {phi.dim}")


def check_almost_paracomplex(phi, points):
    _require_even(phi)
    n = phi.dim
    sq, tr = [], []
    for x in points:
        P = phi.at(x)
        sq.append(P @ P - np.eye(n))
        tr.append(np.trace(P))
    report = VerificationReport()
    report.extend([
        bound("admission.phi-squared-identity", "paracomplex", sq, len(points),
              TOL_ALGEBRAIC, where=points),
        bound("admission.phi-traceless", "paracomplex", tr, len(points),
              TOL_ALGEBRAIC, where=points),
    ])
    return report


def check_anti_para_hermitian(M, phi, points):
    """Both g(phi X, phi Y) = g(X, Y) and g(phi X, Y) = g(X, phi Y) on basis pairs."""
    iso, sym = [], []
    for x in points:
        g = M.metric_at(x)
        P = phi.at(x)
        iso.append(P.T @ g @ P - g)
        sym.append(P.T @ g - g @ P)
    report = VerificationReport()
    report.extend([
        bound("admission.anti-para-hermitian.isometry", "anti-para-hermitian", iso,
              len(points), TOL_ALGEBRAIC, where=points),
        bound("admission.anti-para-hermitian.symmetry", "anti-para-hermitian", sym,
              len(points), TOL_ALGEBRAIC, where=points),
    ])
    return report


def covariant_phi(M, phi):
    """(nabla phi)[i, h, j] = d_i phi^h_j + Gamma^h_{is} phi^s_j - Gamma^s_{ij} phi^h_s."""
    return covariant_derivative(phi.field, christoffel(M))


def check_anti_para_kahler(M, phi, points):
    nabla_phi = covariant_phi(M, phi)
    vals = [nabla_phi.values(x) for x in points]
    report = VerificationReport()
    report.extend([bound("admission.anti-para-kahler", "anti-para-kahler", vals,
                         len(points), TOL_PARALLEL, where=points)])
    return report


def nijenhuis(phi, X, Y):
    """N(X, Y) = [phi X, phi Y] - phi[phi X, Y] - phi[X, phi Y] + [X, Y]."""
    pX, pY = phi.apply(X), phi.apply(Y)
    terms = [lie_bracket(pX, pY), phi.apply(lie_bracket(pX, Y)),
             phi.apply(lie_bracket(X, pY)), lie_bracket(X, Y)]
    out = []
    for h in range(phi.dim):
        e = mk_add(terms[0][h], terms[3][h])
        e = mk_add(e, mk_mul(Const(-1.0), mk_add(terms[1][h], terms[2][h])))
        out.append(e)
    return VectorField(out, X.names)


def coordinate_field(names, i):
    return VectorField([1.0 if k == i else 0.0 for k in range(len(names))], names)


def check_nijenhuis_vanishes(phi, points):
    names = phi.names
    vals = []
    for i in range(phi.dim):
        for j in range(i + 1, phi.dim):
            N = nijenhuis(phi, coordinate_field(names, i), coordinate_field(names, j))
            vals.extend(N.values(x) for x in points)
    report = VerificationReport()
    report.extend([bound("admission.nijenhuis-vanishes", "nijenhuis", vals or [0.0],
                         len(points), TOL_PARALLEL)])
    return report


def admit(M, phi, points, strict=True):
    """Run the admission ladder; returns (report, admitted).

    Later rungs are skipped once a rung fails.  With ``strict`` a failure
    raises AdmissionError carrying the report.
    """
    report = VerificationReport()
    for step in (lambda: check_almost_paracomplex(phi, points),
                 lambda: check_anti_para_hermitian(M, phi, points),
                 lambda: check_anti_para_kahler(M, phi, points)):
        part = step()
        report.extend(part.checks)
        if not part.passed:
            if strict:
                worst = part.failures()[0]
                raise AdmissionError(
                    f"{worst.check_id} failed: max deviation {worst.max_abs:.3e}, "
                    f"{worst.note}", report)
            return report, False
    return report, True
