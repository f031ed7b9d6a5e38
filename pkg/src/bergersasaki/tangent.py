"""Tangent bundle geometry: adapted frame, Berger-type deformed Sasaki metric,
closed-form connections and the coordinate oracle that checks them.

Points of TM are arrays ``p = (x^1..x^n, u^1..u^n)``.  Frame indices run over
``0..2n-1`` with the first n horizontal (E_i) and the last n vertical (E_ibar).
Connection coefficients follow ``C[c, a, b]``: nabla_{E_a} E_b = C^c_{ab} E_c.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .chart import (ChartManifold, FrameField, _spd_inverse, christoffel,
                    frame_connection_coefficients, index_shuffle, riemann_from_gamma_jet,
                    structure_functions)
from .jet import Jet, jeinsum
from .para import admit
from .sampling import base_points

__all__ = [
    "FiberNameCollision", "TangentBundleGeometry", "TBConnection", "BaseData",
    "induce_tangent_chart", "berger_metric", "berger_metric_inverse_closed_form",
    "connection_closed_form", "connection_oracle", "oracle_at", "svk_connection",
    "svk_closed_form", "torsion", "mean_connection", "mean_closed_form",
    "DENOMINATORS", "LINES",
]

DENOMINATORS = ("1+delta^2*g00", "1+delta^2")
LINES = ("HH", "VH", "HV", "VV")


class FiberNameCollision(ValueError):
    """A base coordinate name clashes with a generated fiber coordinate name."""


def _fiber_names(base, prefix):
    names = tuple(f"{prefix}{i + 1}" for i in range(base.dim))
    clash = sorted(set(names) & set(base.names))
    if clash:
        raise FiberNameCollision(
            f"base coordinates {clash} collide with fiber coordinates; "
            f"rename them or choose another fiber prefix")
    return names


def induce_tangent_chart(base, fiber_prefix="u"):
    """The 2n-dimensional chart (x^i, u^i) on TM, with no metric attached."""
    return ChartManifold(base.names + _fiber_names(base, fiber_prefix), None,
                         name=f"T({base.name})" if base.name else "TM")


@dataclass
class BaseData:
    """Base quantities at the foot point of a TM point (values only)."""
    x: np.ndarray
    u: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray
    R: np.ndarray
    phi: np.ndarray

    @property
    def g00(self):
        return float(self.u @ self.g @ self.u)

    @property
    def phi0(self):
        """phi^i_0 = phi^i_m u^m."""
        return self.phi @ self.u

    @property
    def gamma0(self):
        """Gamma^h_{i0} as [h, i]."""
        return self.gamma @ self.u

    def shuffle(self):
        """R_{.j0i}^{h.} as [h, j, i]."""
        return index_shuffle(self.R, self.g, self.u, self.ginv)


class TangentBundleGeometry:
    """Tangent bundle of (base, phi) with the Berger-type deformed Sasaki metric.

    Behaves as a metric chart (``dim``, ``names``, ``metric_jet``) whose
    metric is the coordinate-frame form of g_BS, so :func:`christoffel`
    applies to it directly.
    """

    def __init__(self, base, phi, delta, fiber_prefix="u", admitted=None):
        if phi.names != base.names:
            raise ValueError("phi and the base metric use different coordinates")
        self.base = base
        self.phi = phi
        self.delta = float(delta)
        self.n = base.dim
        self.chart = induce_tangent_chart(base, fiber_prefix)
        self.names = self.chart.names
        self.dim = 2 * self.n
        self.fiber_prefix = fiber_prefix
        self.admitted = admitted
        self.base_connection = christoffel(base)
        self.adapted_frame = FrameField(self._frame_jet, self.dim, "adapted")
        self._cache = {}

    def __repr__(self):
        return f"TangentBundleGeometry({self.base.name!r}, delta={self.delta:g})"

    def with_delta(self, delta):
        return TangentBundleGeometry(self.base, self.phi, delta, self.fiber_prefix, self.admitted)

    def sasaki(self):
        return self.with_delta(0.0)

    # -- jets of base quantities pulled back to TM ----------------------
    def _split(self, p):
        p = np.asarray(p, dtype=float)
        return p[:self.n], p[self.n:]

    def _embed(self, jet):
        return jet.embed(self.dim, range(self.n))

    def base_metric_jet(self, p, order):
        x, _ = self._split(p)
        return self._embed(self.base.metric_jet(x, order))

    def base_gamma_jet(self, p, order):
        x, _ = self._split(p)
        return self._embed(self.base_connection.at(x, order))

    def phi_jet(self, p, order):
        x, _ = self._split(p)
        return self._embed(self.phi.jet(x, order))

    def fiber_jet(self, p, order):
        _, u = self._split(p)
        d1 = np.hstack([np.zeros((self.n, self.n)), np.eye(self.n)]) if order >= 1 else None
        d2 = np.zeros((self.n, self.dim, self.dim)) if order >= 2 else None
        return Jet(u.copy(), d1, d2, self.dim)

    def base_data(self, p):
        key = ("base", np.asarray(p, dtype=float).tobytes())
        data = self._cache.get(key)
        if data is None:
            x, u = self._split(p)
            g = self.base.metric_at(x)
            G1 = self.base_connection.at(x, 1)
            data = BaseData(x, u, g, _spd_inverse(g, x), G1.val,
                            riemann_from_gamma_jet(G1).val, self.phi.at(x))
            self._remember(key, data)
        return data

    def _remember(self, key, value):
        if len(self._cache) > 20000:
            self._cache.clear()
        self._cache[key] = value

    # -- frame and metric ------------------------------------------------
    def _frame_jet(self, p, order):
        n = self.n
        G0 = jeinsum("hij,j->hi", self.base_gamma_jet(p, order), self.fiber_jet(p, order))
        I, Z = np.eye(n), np.zeros((n, n))
        return Jet.block([[I, Z], [-G0, I]])

    def coframe_jet(self, p, order=0):
        """Rows dx^i and delta u^i = du^i + Gamma^i_{h0} dx^h."""
        n = self.n
        G0 = jeinsum("hij,j->hi", self.base_gamma_jet(p, order), self.fiber_jet(p, order))
        I, Z = np.eye(n), np.zeros((n, n))
        return Jet.block([[I, Z], [G0, I]])

    def frame(self, p):
        return self._frame_jet(np.asarray(p, dtype=float), 0).val

    def coframe(self, p):
        return self.coframe_jet(np.asarray(p, dtype=float), 0).val

    def phi_form_jet(self, p, order):
        """w_i = g_{m0} phi^m_i, the covector g(., phi u)."""
        return jeinsum("mk,k,mi->i", self.base_metric_jet(p, order),
                       self.fiber_jet(p, order), self.phi_jet(p, order))

    def adapted_metric_jet(self, p, order=0):
        """g_BS in the adapted frame: [[g, 0], [0, g + delta^2 w w^T]]."""
        g = self.base_metric_jet(p, order)
        w = self.phi_form_jet(p, order)
        vert = g + jeinsum("i,j->ij", w, w) * self.delta ** 2
        Z = np.zeros((self.n, self.n))
        return Jet.block([[g, Z], [Z, vert]])

    def adapted_metric(self, p):
        return self.adapted_metric_jet(np.asarray(p, dtype=float), 0).val

    def metric_jet(self, p, order=1):
        """g_BS in coordinates: coframe^T . adapted matrix . coframe."""
        p = np.asarray(p, dtype=float)
        key = ("g", p.tobytes(), order)
        jet = self._cache.get(key)
        if jet is None:
            cof = self.coframe_jet(p, order)
            G = self.adapted_metric_jet(p, order)
            jet = jeinsum("aA,ab,bB->AB", cof, G, cof)
            self._remember(key, jet)
        return jet

    def metric_at(self, p):
        return self.metric_jet(p, 0).val

    # -- lifts and the defining identities -------------------------------
    def horizontal_lift(self, X):
        """Adapted-frame components of the horizontal lift of base vector X."""
        return np.concatenate([np.asarray(X, float), np.zeros(self.n)])

    def vertical_lift(self, X):
        return np.concatenate([np.zeros(self.n), np.asarray(X, float)])

    def defining_value(self, p, kind, X, Y):
        """g_BS on lifts straight from the defining identities.

        kind is 'HH', 'HV', 'VH' or 'VV'.
        """
        d = self.base_data(p)
        if kind == "HH":
            return float(X @ d.g @ Y)
        if kind in ("HV", "VH"):
            return 0.0
        gphiu = d.g @ d.phi0
        return float(X @ d.g @ Y + self.delta ** 2 * (X @ gphiu) * (Y @ gphiu))

    def lift(self, kind, X):
        return self.horizontal_lift(X) if kind == "H" else self.vertical_lift(X)


def berger_metric(base, phi, delta, strict=True, points=None, seed=42, npoints=100,
                  fiber_prefix="u"):
    """Build the geometry after running the anti-paraKahler admission ladder.

    In strict mode a failed admission raises AdmissionError; otherwise a
    warning is issued and the geometry is returned with ``admitted=False``.
    """
    if points is None:
        points = base_points(base, npoints, seed)
    report, ok = admit(base, phi, points, strict=strict)
    if not ok:
        warnings.warn(f"{base.name or 'base'} is not anti-paraKahler; closed forms "
                      "that assume nabla phi = 0 will be reported against the oracle only",
                      stacklevel=2)
    tbg = TangentBundleGeometry(base, phi, delta, fiber_prefix, admitted=ok)
    tbg.admission_report = report
    return tbg


def berger_metric_inverse_closed_form(tbg, p):
    """Claimed inverse: [[g^-1, 0], [0, g^-1 - delta^2/(1+delta^2 g00) phi0 phi0^T]]."""
    d = tbg.base_data(p)
    n = tbg.n
    dd = tbg.delta ** 2
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = d.ginv
    out[n:, n:] = d.ginv - dd / (1.0 + dd * d.g00) * np.outer(d.phi0, d.phi0)
    return out


# ---------------------------------------------------------------------------
# connections in the adapted frame

@dataclass
class TBConnection:
    """Adapted-frame connection coefficients at one point of TM."""
    coefficients: np.ndarray
    n: int
    provenance: str
    point: np.ndarray

    def line(self, name):
        """Coefficient block for nabla_{E_a} E_b with (a, b) types given by
        ``name``: 'HH', 'VH', 'HV' or 'VV' (first letter: differentiating field)."""
        n = self.n
        a = slice(0, n) if name[0] == "H" else slice(n, 2 * n)
        b = slice(0, n) if name[1] == "H" else slice(n, 2 * n)
        return self.coefficients[:, a, b]

    def __sub__(self, other):
        return self.coefficients - other.coefficients


def _denominator(tbg, d, which):
    dd = tbg.delta ** 2
    if which == "1+delta^2*g00":
        return 1.0 + dd * d.g00
    if which == "1+delta^2":
        return 1.0 + dd
    raise ValueError(f"unknown denominator candidate {which!r}")


def vertical_vertical_term(tbg, d, denominator="1+delta^2*g00"):
    """[h, i, j] = delta^2/D phi^k_j phi^h_0 g_{ik}."""
    D = _denominator(tbg, d, denominator)
    gphi = d.g @ d.phi  # [i, j] = g_{ik} phi^k_j
    return tbg.delta ** 2 / D * np.einsum("h,ij->hij", d.phi0, gphi)


def connection_closed_form(tbg, p, denominator="1+delta^2*g00"):
    """Levi-Civita connection of g_BS from the closed-form table.

    Horizontal-horizontal carries -1/2 R_{ij0}^h on the vertical part, the
    mixed blocks carry -1/2 R_{.j0i}^{h.} and -1/2 R_{.i0j}^{h.}, and the
    vertical-vertical block is delta^2/D phi^k_j phi^h_0 g_{ik} with D one of
    :data:`DENOMINATORS`.
    """
    p = np.asarray(p, dtype=float)
    d = tbg.base_data(p)
    n = tbg.n
    C = np.zeros((2 * n, 2 * n, 2 * n))
    R0 = np.einsum("ijkh,k->hij", d.R, d.u)  # R_{ij0}^h as [h, i, j]
    H = d.shuffle()  # [h, j, i] = R_{.j0i}^{h.}
    C[:n, :n, :n] = d.gamma
    C[n:, :n, :n] = -0.5 * R0
    C[:n, n:, :n] = -0.5 * H.transpose(0, 2, 1)  # C[h, ibar, j] = -1/2 H[h, j, i]
    C[:n, :n, n:] = -0.5 * H  # C[h, i, jbar] = -1/2 R_{.i0j} = -1/2 H[h, i, j]
    C[n:, :n, n:] = d.gamma
    C[n:, n:, n:] = vertical_vertical_term(tbg, d, denominator)
    return TBConnection(C, n, f"closed-form[{denominator}]", p)


def connection_oracle(tbg):
    """Coordinate Christoffels of g_BS moved into the adapted frame.

    Never consults the closed-form table; returns a ConnectionField whose
    ``at(p)`` gives adapted-frame coefficients.
    """
    return frame_connection_coefficients(christoffel(tbg), tbg.adapted_frame)


def oracle_at(tbg, p, oracle=None):
    oracle = connection_oracle(tbg) if oracle is None else oracle
    p = np.asarray(p, dtype=float)
    return TBConnection(oracle.values(p), tbg.n, "oracle", p)


def torsion(C, c):
    """T^c_{ab} = C^c_{ab} - C^c_{ba} - (structure functions)^c_{ab}."""
    return C - C.transpose(0, 2, 1) - c


def svk_connection(tbg, C):
    """Project by definition: keep the output block matching the type of E_b."""
    n = tbg.n
    out = C.coefficients.copy()
    out[n:, :, :n] = 0.0  # horizontal E_b: drop vertical output
    out[:n, :, n:] = 0.0  # vertical E_b: drop horizontal output
    return TBConnection(out, n, f"svk({C.provenance})", C.point)


def svk_closed_form(tbg, p, denominator="1+delta^2*g00"):
    """Projected connection from its own closed-form table."""
    p = np.asarray(p, dtype=float)
    d = tbg.base_data(p)
    n = tbg.n
    C = np.zeros((2 * n, 2 * n, 2 * n))
    H = d.shuffle()
    C[:n, :n, :n] = d.gamma
    C[:n, n:, :n] = -0.5 * H.transpose(0, 2, 1)
    C[n:, :n, n:] = d.gamma
    C[n:, n:, n:] = vertical_vertical_term(tbg, d, denominator)
    return TBConnection(C, n, f"svk-closed-form[{denominator}]", p)


def mean_connection(tbg, svk, c=None):
    """svk - T/2 with T the torsion of ``svk``; torsion-free by construction."""
    c = structure_functions(tbg.adapted_frame, svk.point) if c is None else c
    T = torsion(svk.coefficients, c)
    return TBConnection(svk.coefficients - 0.5 * T, tbg.n, f"mean({svk.provenance})", svk.point)


MEAN_READINGS = {
    # line HH: what the horizontal-horizontal block equals
    "HH": ("projected", "levi-civita"),
    # line HV: which connection the -1/4 R correction is added to
    "HV": ("levi-civita", "projected"),
}


def mean_closed_form(tbg, p, hh="projected", hv="levi-civita",
                     denominator="1+delta^2*g00"):
    """Mean connection from its closed-form table under the given readings.

    ``hh`` names the connection whose horizontal-horizontal block is used
    as printed ('projected' or 'levi-civita'); ``hv`` names the connection
    that receives the -1/4 R_{.i0j}^{h.} E_h correction in the mixed block.
    """
    p = np.asarray(p, dtype=float)
    lc = connection_closed_form(tbg, p, denominator).coefficients
    sv = svk_closed_form(tbg, p, denominator).coefficients
    d = tbg.base_data(p)
    n = tbg.n
    H = d.shuffle()
    C = np.zeros_like(lc)
    src_hh = sv if hh == "projected" else lc
    C[:, :n, :n] = src_hh[:, :n, :n]
    C[:, n:, :n] = 0.5 * lc[:, n:, :n]
    src_hv = lc if hv == "levi-civita" else sv
    C[:, :n, n:] = src_hv[:, :n, n:]
    C[:n, :n, n:] += -0.25 * H
    C[:, n:, n:] = lc[:, n:, n:]
    return TBConnection(C, n, f"mean-closed-form[hh={hh},hv={hv}]", p)
