"""Second fundamental forms and tension fields of maps, and the maps studied
on the tangent bundle: the projection, sections and identity maps.

Hessian arrays are stored target index first, ``beta[c, i, j]``, matching the
layout of connection coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import (ExprArray, VectorField, _spd_inverse, christoffel,
                    covariant_derivative, mixed_curvature, structure_functions)
from .expr import Var
from .tangent import (DENOMINATORS, _denominator, connection_oracle, mean_connection,
                      oracle_at, svk_connection)

__all__ = [
    "SmoothMap", "MapHessian", "TensionVector",
    "second_fundamental_form", "second_fundamental_form_in_frame", "tension_field",
    "projection_map", "projection_beta_closed_form", "harmonic_pair_residual",
    "identity_map", "section_map", "section_pushforward", "section_pushforward_claim",
    "pullback_metric_via_section", "pullback_metric_jacobian", "nabla_xi", "nabla_nabla_xi",
    "section_beta_closed_form", "section_tension_closed_form", "section_harmonic_conditions",
    "identity_tension_oracle", "identity_tension_candidates", "identity_tension_corrected",
    "identity_beta_closed_form", "identity_beta_oracle", "SIGNS", "N_CHOICES",
]

SIGNS = (-1.0, 1.0)
N_CHOICES = ("2k", "k")


class SmoothMap:
    """f: U -> V given by component expressions in the source coordinates.

    ``source_connection`` and ``target_connection`` are coordinate-frame
    ConnectionFields; ``source_metric`` (point -> matrix) is needed only for
    tension fields.
    """

    def __init__(self, components, source_names, source_connection, target_connection,
                 source_metric=None, name=""):
        self.source_names = tuple(source_names)
        self.f = ExprArray(list(components), self.source_names)
        self.m = len(self.source_names)
        self.target_dim = self.f.shape[0]
        if target_connection.dim != self.target_dim:
            raise ValueError(f"map has {self.target_dim} components but the target "
                             f"connection has dimension {target_connection.dim}")
        self.source_connection = source_connection
        self.target_connection = target_connection
        self.source_metric = source_metric
        self.name = name

    def __call__(self, x):
        return self.f.values(x)

    def jacobian(self, x):
        return self.f.jet(np.asarray(x, dtype=float), 1).d1


@dataclass
class MapHessian:
    components: np.ndarray  # [c, i, j]
    source_frame: str
    target_frame: str
    point: np.ndarray

    def asymmetry(self):
        return np.abs(self.components - self.components.transpose(0, 2, 1)).max()


@dataclass
class TensionVector:
    components: np.ndarray
    frame: str
    point: np.ndarray


def _coordinate_hessian(f, x):
    x = np.asarray(x, dtype=float)
    fj = f.f.jet(x, 2)
    df, d2f = fj.d1, fj.d2
    GM = f.source_connection.values(x)
    GN = f.target_connection.values(fj.val)
    beta = d2f - np.einsum("kij,ck->cij", GM, df) + np.einsum("cab,ai,bj->cij", GN, df, df)
    return beta, fj.val


def second_fundamental_form(f, x, source_frame=None, target_frame=None):
    """beta(f) at x in coordinates, optionally re-expressed in frames.

    ``source_frame`` is a FrameField on the source chart evaluated at x;
    ``target_frame`` one on the target chart evaluated at f(x).
    """
    x = np.asarray(x, dtype=float)
    beta, y = _coordinate_hessian(f, x)
    stag = ttag = "coordinate"
    if source_frame is not None:
        E = source_frame.matrix(x)
        beta = np.einsum("cij,ia,jb->cab", beta, E, E)
        stag = source_frame.name
    if target_frame is not None:
        beta = np.einsum("dc,cab->dab", target_frame.coframe(y), beta)
        ttag = target_frame.name
    return MapHessian(beta, stag, ttag, x)


def second_fundamental_form_in_frame(f, x, source_frame, source_coefficients):
    """beta(f)(E_a, E_b) straight from frame-expressed source coefficients.

    Uses beta(E_a, E_b) = nabla^N_{E_a} (f_* E_b) - f_*(nabla_{E_a} E_b); the
    target stays in coordinates.  Independent of the coordinate Hessian path.
    """
    x = np.asarray(x, dtype=float)
    fj = f.f.jet(x, 2)
    Fj = source_frame.jet(x, 1)
    E = Fj.val
    dfE = fj.d1 @ E  # f_* E_b as [c, b]
    # E_a (f_* E_b)^c = E^i_a d_i (df^c_k E^k_b)
    deriv = (np.einsum("ia,cki,kb->cab", E, fj.d2, E)
             + np.einsum("ia,ck,kbi->cab", E, fj.d1, Fj.d1))
    GN = f.target_connection.values(fj.val)
    beta = (deriv + np.einsum("cpq,pa,qb->cab", GN, dfE, dfE)
            - np.einsum("cd,dab->cab", dfE, source_coefficients))
    return MapHessian(beta, source_frame.name, "coordinate", x)


def tension_field(f, x, hessian=None):
    """g^{ij} beta_{ij} with the source metric, in the Hessian's target frame."""
    x = np.asarray(x, dtype=float)
    if f.source_metric is None:
        raise ValueError("tension_field needs a source metric")
    if hessian is None:
        hessian = second_fundamental_form(f, x)
    if hessian.source_frame != "coordinate":
        raise ValueError("trace a coordinate-source Hessian")
    ginv = _spd_inverse(f.source_metric(x), x)
    return TensionVector(np.einsum("ij,cij->c", ginv, hessian.components),
                         hessian.target_frame, x)


def _ident(names):
    return [Var(v) for v in names]


def identity_map(source, target, name="identity"):
    """Identity between two metrics on one chart (any objects with metric_jet)."""
    return SmoothMap(_ident(source.names), source.names, christoffel(source),
                     christoffel(target), source.metric_at, name)


# ---------------------------------------------------------------------------
# the projection TM -> M

def projection_map(tbg, target=None):
    """pi(x, u) = x into the base, or into ``target`` (same chart, metric h)."""
    target = tbg.base if target is None else target
    if tuple(target.names) != tuple(tbg.base.names):
        raise ValueError("the projection target must use the base chart")
    return SmoothMap(_ident(tbg.base.names), tbg.names, christoffel(tbg),
                     christoffel(target), tbg.metric_at, "projection")


def projection_beta_closed_form(tbg, p, target=None):
    """beta(pi)[h, a, b] with a, b adapted-frame indices.

    Horizontal pairs give ^h Gamma - Gamma (zero for the base metric itself),
    vertical pairs give zero and mixed pairs give 1/2 R_{.j0i}^{h.}.
    """
    d = tbg.base_data(p)
    n = tbg.n
    H = d.shuffle()
    out = np.zeros((n, 2 * n, 2 * n))
    if target is not None:
        out[:, :n, :n] = christoffel(target).values(d.x) - d.gamma
    out[:, n:, :n] = 0.5 * H.transpose(0, 2, 1)  # [h, ibar, j] = 1/2 H[h, j, i]
    out[:, :n, n:] = 0.5 * H
    return out


def harmonic_pair_residual(g_chart, h_chart, x):
    """g^{ij}(^h Gamma^h_{ij} - Gamma^h_{ij}) at x."""
    x = np.asarray(x, dtype=float)
    ginv = _spd_inverse(g_chart.metric_at(x), x)
    diff = christoffel(h_chart).values(x) - christoffel(g_chart).values(x)
    return np.einsum("ij,hij->h", ginv, diff)


# ---------------------------------------------------------------------------
# sections x -> (x, xi(x))

def nabla_xi(tbg, xi):
    """[i, h] = nabla_i xi^h."""
    return covariant_derivative(xi, tbg.base_connection)


def nabla_nabla_xi(tbg, xi):
    """[i, j, h] = nabla_i nabla_j xi^h."""
    return covariant_derivative(covariant_derivative(xi, tbg.base_connection),
                                tbg.base_connection)


def _section_derivatives(tbg, xi, x):
    """(nabla xi [i, h], nabla nabla xi [i, j, h]) at x, memoized on xi."""
    cache = xi.__dict__.setdefault("_nabla_cache", {})
    key = (id(tbg.base), x.tobytes())
    out = cache.get(key)
    if out is None:
        if len(cache) > 20000:
            cache.clear()
        out = cache[key] = (nabla_xi(tbg, xi).values(x), nabla_nabla_xi(tbg, xi).values(x))
    return out


def section_map(tbg, xi):
    if not isinstance(xi, VectorField):
        xi = VectorField(xi, tbg.base.names)
    comps = _ident(tbg.base.names) + list(xi.exprs)
    f = SmoothMap(comps, tbg.base.names, tbg.base_connection, christoffel(tbg),
                  tbg.base.metric_at, "section")
    f.xi = xi
    return f


def section_point(xi, x):
    x = np.asarray(x, dtype=float)
    return np.concatenate([x, xi.values(x)])


def section_pushforward(tbg, f, x):
    """Columns xi_* d_i in the adapted frame at xi(x), from the Jacobian."""
    p = section_point(f.xi, x)
    return tbg.coframe(p) @ f.jacobian(x)


def section_pushforward_claim(tbg, xi, x):
    """Columns ^H d_i + ^V(nabla_i xi)."""
    n = tbg.n
    out = np.zeros((2 * n, n))
    out[:n] = np.eye(n)
    out[n:] = _section_derivatives(tbg, xi, np.asarray(x, dtype=float))[0].T
    return out


def pullback_metric_via_section(tbg, xi, x):
    """g + g(nabla xi, nabla xi) + delta^2 g(nabla xi, phi xi) g(nabla xi, phi xi)."""
    x = np.asarray(x, dtype=float)
    d = tbg.base_data(section_point(xi, x))
    D = _section_derivatives(tbg, xi, x)[0]  # [i, h]
    w = D @ d.g @ (d.phi @ d.u)  # g(nabla_i xi, phi xi)
    return d.g + D @ d.g @ D.T + tbg.delta ** 2 * np.outer(w, w)


def pullback_metric_jacobian(tbg, f, x):
    """The literal pullback J^T g_BS J in coordinates."""
    J = f.jacobian(x)
    return J.T @ tbg.metric_at(section_point(f.xi, x)) @ J


def section_beta_closed_form(tbg, xi, x, sign=-1.0, denominator="1+delta^2"):
    """beta(xi)[c, i, j], c adapted on TM, i, j base coordinates.

    ``sign`` multiplies the 1/2 on the horizontal block (printed as -1/2) and
    ``denominator`` picks D in A^h_{mn} = delta^2/D phi^k_n phi^h_0 g_{mk}.
    """
    x = np.asarray(x, dtype=float)
    p = section_point(xi, x)
    d = tbg.base_data(p)
    n = tbg.n
    D, DD = _section_derivatives(tbg, xi, x)  # [i, k], [i, j, h]
    S0 = np.einsum("habm,m->hab", mixed_curvature(d.R, d.g, d.ginv), d.u)  # R_{.ab m}^h xi^m
    out = np.zeros((2 * n, n, n))
    first = np.einsum("jk,hik->hij", D, S0)
    out[:n] = 0.5 * sign * (first + first.transpose(0, 2, 1))
    A = tbg.delta ** 2 / _denominator(tbg, d, denominator) * np.einsum(
        "kn,h,mk->hmn", d.phi, d.phi0, d.g)
    out[n:] = (-0.5 * np.einsum("ijmh,m->hij", d.R, d.u) + DD.transpose(2, 0, 1)
               + np.einsum("im,jn,hmn->hij", D, D, A))
    return out


def section_tension_closed_form(tbg, xi, x, sign=1.0, denominator="1+delta^2"):
    """The tension of a section from its closed form; horizontal coefficient
    ``sign`` (printed +1) on g^{ij}(nabla_j xi^k) R_{.ikm}^{h.} xi^m."""
    x = np.asarray(x, dtype=float)
    p = section_point(xi, x)
    d = tbg.base_data(p)
    n = tbg.n
    D, DD = _section_derivatives(tbg, xi, x)
    S0 = np.einsum("habm,m->hab", mixed_curvature(d.R, d.g, d.ginv), d.u)
    A = tbg.delta ** 2 / _denominator(tbg, d, denominator) * np.einsum(
        "kn,h,mk->hmn", d.phi, d.phi0, d.g)
    out = np.zeros(2 * n)
    out[:n] = sign * np.einsum("ij,jk,hik->h", d.ginv, D, S0)
    out[n:] = (np.einsum("ij,ijh->h", d.ginv, DD)
               + np.einsum("ij,im,jn,hmn->h", d.ginv, D, D, A))
    return out


def section_harmonic_conditions(tbg, xi, x, denominator="1+delta^2"):
    """The two residual vectors whose joint vanishing decides harmonicity."""
    tau = section_tension_closed_form(tbg, xi, x, 1.0, denominator)
    return tau[:tbg.n], tau[tbg.n:]


# ---------------------------------------------------------------------------
# identity maps between tangent bundle geometries

def identity_tension_oracle(source, target, p):
    """tau of the identity (TM, source) -> (TM, target) in the adapted frame.

    Computed from the two coordinate Christoffel fields and moved to the
    adapted frame with the coframe; never consults a closed form.
    """
    p = np.asarray(p, dtype=float)
    ginv = _spd_inverse(source.metric_at(p), p)
    diff = christoffel(target).values(p) - christoffel(source).values(p)
    return source.coframe(p) @ np.einsum("AB,cAB->c", ginv, diff)


def _n_value(tbg, which):
    if which == "2k":
        return tbg.n
    if which == "k":
        return tbg.n // 2
    raise ValueError(f"unknown reading of n: {which!r}")


def identity_tension_candidates(tbg, p, direction):
    """Closed-form candidates keyed by (denominator, n) for ``direction``
    'BS->S' or 'S->BS'."""
    d = tbg.base_data(p)
    n = tbg.n
    dd = tbg.delta ** 2
    out = {}
    for den in DENOMINATORS:
        D = _denominator(tbg, d, den)
        for which in N_CHOICES:
            nn = _n_value(tbg, which)
            vec = np.zeros(2 * n)
            if direction == "BS->S":
                vec[n:] = (-dd * nn / D * d.phi0
                           + dd ** 2 * d.g00 * d.u / (D * (1.0 + dd * d.g00)))
            elif direction == "S->BS":
                vec[n:] = dd * nn / D * d.phi0
            else:
                raise ValueError(f"unknown direction {direction!r}")
            out[f"D={den},n={which}"] = vec
    return out


def identity_tension_corrected(tbg, p, direction):
    """The values the oracle supports: delta^4 g(phi u, u)/(1+delta^2 g00)^2
    phi_0 on the vertical part for BS->S, and zero for S->BS."""
    d = tbg.base_data(p)
    n = tbg.n
    out = np.zeros(2 * n)
    if direction == "BS->S":
        dd = tbg.delta ** 2
        gphiuu = float(d.u @ d.g @ d.phi0)
        out[n:] = dd ** 2 * gphiuu / (1.0 + dd * d.g00) ** 2 * d.phi0
    elif direction != "S->BS":
        raise ValueError(f"unknown direction {direction!r}")
    return out


def identity_beta_closed_form(tbg, p):
    """beta(I)[c, a, b] for I: (TM, g_BS) -> (TM, mean connection): only the
    mixed blocks survive, each equal to 1/4 R_{.j0i}^{h.} on E_h."""
    d = tbg.base_data(p)
    n = tbg.n
    H = d.shuffle()
    out = np.zeros((2 * n, 2 * n, 2 * n))
    out[:n, n:, :n] = 0.25 * H.transpose(0, 2, 1)
    out[:n, :n, n:] = 0.25 * H
    return out


def identity_beta_oracle(tbg, p, oracle=None):
    """C_mean - C_LC, both built from the coordinate oracle in the adapted frame."""
    p = np.asarray(p, dtype=float)
    lc = oracle_at(tbg, p, oracle if oracle is not None else connection_oracle(tbg))
    mean = mean_connection(tbg, svk_connection(tbg, lc),
                           structure_functions(tbg.adapted_frame, p))
    return mean.coefficients - lc.coefficients
