"""Riemannian geometry on a single coordinate chart.

Index conventions used throughout the package (arrays are indexed in the
order the symbols are written):

    gamma[h, i, j]      Gamma^h_{ij}
    R[i, j, k, h]       R_{ijk}^h, with R(d_i, d_j) d_k = R_{ijk}^h d_h and
                        R_{ijk}^h = d_i Gamma^h_{jk} - d_j Gamma^h_{ik}
                                    + Gamma^h_{is} Gamma^s_{jk} - Gamma^h_{js} Gamma^s_{ik}
    frame[A, a]         component A (coordinate basis) of frame vector E_a
    C[c, a, b]          nabla_{E_a} E_b = C^c_{ab} E_c

Metric inverses are always numeric per point; derivatives of the inverse
come from jet arithmetic, never from a symbolic inverse.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .expr import Const, Var, as_expr, compile_expr, differentiate, mk_add, mk_mul, mk_sub
from .jet import Jet, jeinsum

__all__ = [
    "CONVENTION", "NotPositiveDefiniteError",
    "ExprArray", "ChartManifold", "ConnectionField", "CurvatureField",
    "TensorField", "VectorField", "DerivedField", "FrameField",
    "metric_inverse_at", "christoffel", "christoffel_from_metric_jet",
    "riemann", "riemann_from_gamma_jet", "fiber_contract", "lie_bracket",
    "covariant_derivative", "covariant_derivative_jet",
    "frame_connection_coefficients", "structure_functions",
    "mixed_curvature", "index_shuffle",
]

CONVENTION = "R(d_i,d_j)d_k = R_ijk^h d_h; R_ijk^h = d_i G^h_jk - d_j G^h_ik + G^h_is G^s_jk - G^h_js G^s_ik"


class NotPositiveDefiniteError(ValueError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else np.asarray(point).tolist()


class ExprArray:
    """An array of expressions with cached derivative tables.

    ``jet(point, order)`` returns values and exact partial derivatives up to
    second order with respect to ``names``.
    """

    def __init__(self, exprs, names):
        arr = np.empty(np.shape(exprs), dtype=object)
        flat_in = np.asarray(exprs, dtype=object).reshape(-1)
        flat = arr.reshape(-1)
        for k, e in enumerate(flat_in):
            flat[k] = as_expr(e)
        self.exprs = arr
        self.names = tuple(names)
        self.shape = arr.shape
        self._fns = {}

    def _fn(self, key):
        fns = self._fns.get(key)
        if fns is None:
            fns = []
            for e in self.exprs.reshape(-1):
                for v in key:
                    e = differentiate(e, v)
                fns.append(None if isinstance(e, Const) and e.value == 0.0
                           else compile_expr(e, self.names))
            self._fns[key] = fns
        return fns

    def _eval(self, key, values):
        out = np.zeros(len(self.exprs.reshape(-1)))
        for k, fn in enumerate(self._fn(key)):
            if fn is not None:
                out[k] = fn(values)
        return out.reshape(self.shape)

    def values(self, point):
        return self._eval((), [float(x) for x in point])

    def jet(self, point, order=2):
        values = [float(x) for x in point]
        N = len(self.names)
        val = self._eval((), values)
        d1 = d2 = None
        if order >= 1:
            d1 = np.stack([self._eval((v,), values) for v in self.names], axis=-1)
        if order >= 2:
            d2 = np.zeros(self.shape + (N, N))
            for a in range(N):
                for b in range(a, N):
                    h = self._eval((self.names[a], self.names[b]), values)
                    d2[..., a, b] = h
                    d2[..., b, a] = h
        return Jet(val, d1, d2, N)


def _sym_from_upper(upper, n):
    """Full symmetric object matrix from an upper-triangle spec.

    ``upper`` is either a full n x n nested list or rows of decreasing length
    (row i holds entries j >= i).
    """
    M = np.empty((n, n), dtype=object)
    rows = list(upper)
    if len(rows) != n:
        raise ValueError(f"metric needs {n} rows, got {len(rows)}")
    full = all(len(r) == n for r in rows)
    for i, row in enumerate(rows):
        row = list(row)
        if full:
            entries = row[i:]
        else:
            if len(row) != n - i:
                raise ValueError(f"upper-triangle row {i} needs {n - i} entries")
            entries = row
        for off, e in enumerate(entries):
            j = i + off
            M[i, j] = M[j, i] = as_expr(e)
    return M


class ChartManifold:
    """A single chart with coordinate names and metric component expressions."""

    def __init__(self, names, metric=None, name=""):
        self.names = tuple(names)
        self.dim = len(self.names)
        if self.dim == 0:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(self.names)) != self.dim:
            raise ValueError(f"duplicate coordinate names in {self.names}")
        self.name = name
        self.metric = None if metric is None else _sym_from_upper(metric, self.dim)
        self._metric_arr = None if metric is None else ExprArray(self.metric, self.names)
        self._cache = {}

    @property
    def vars(self):
        return self.names

    def __repr__(self):
        return f"ChartManifold({self.name or '?'}, dim={self.dim})"

    def metric_jet(self, point, order=2):
        if self._metric_arr is None:
            raise ValueError(f"chart {self.name!r} has no metric")
        key = (np.asarray(point, dtype=float).tobytes(), order)
        jet = self._cache.get(key)
        if jet is None:
            if len(self._cache) > 20000:
                self._cache.clear()
            jet = self._metric_arr.jet(point, order)
            self._cache[key] = jet
        return jet

    def metric_at(self, point):
        return self.metric_jet(point, 0).val

    def with_metric(self, metric, name=None):
        return ChartManifold(self.names, metric, self.name if name is None else name)


def metric_inverse_at(M, point):
    """Inverse of the metric at ``point`` via Cholesky factorization."""
    g = M.metric_jet(point, 0).val if hasattr(M, "metric_jet") else np.asarray(M)
    return _spd_inverse(g, point)


def _spd_inverse(g, point=None):
    try:
        c = scipy.linalg.cho_factor(g, lower=True)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            f"metric is not positive definite at {np.asarray(point).tolist()}", point) from None
    ginv = scipy.linalg.cho_solve(c, np.eye(g.shape[0]))
    return 0.5 * (ginv + ginv.T)


# ---------------------------------------------------------------------------
# connections and curvature

class ConnectionField:
    """Connection coefficients evaluated on demand at points.

    ``frame`` is None for coordinate coefficients, otherwise the FrameField
    whose vectors index the coefficients.
    """

    def __init__(self, jet_fn, dim, frame=None, symmetric_lower=False, name=""):
        self._jet_fn = jet_fn
        self.dim = dim
        self.frame = frame
        self.symmetric_lower = symmetric_lower
        self.name = name

    def at(self, point, order=0):
        return self._jet_fn(np.asarray(point, dtype=float), order)

    def values(self, point):
        return self.at(point, 0).val


def christoffel_from_metric_jet(g):
    """Gamma^h_{ij} as a jet one order below the metric jet ``g``."""
    dg = g.diff()  # dg[s, j, i] = d_i g_sj
    low = (dg.transpose(0, 2, 1) + dg - dg.transpose(2, 1, 0)) * 0.5
    # low[s, i, j] = 1/2 (d_i g_sj + d_j g_si - d_s g_ij)
    ginv = g.truncate(dg.order).inv()
    return jeinsum("hs,sij->hij", ginv, low)


def christoffel(M):
    """Levi-Civita connection of a chart (anything with ``metric_jet``)."""
    cache = M.__dict__.setdefault("_christoffel_cache", {})

    def fn(point, order):
        key = (point.tobytes(), order)
        jet = cache.get(key)
        if jet is None:
            if len(cache) > 20000:
                cache.clear()
            jet = cache[key] = christoffel_from_metric_jet(M.metric_jet(point, order + 1))
        return jet
    return ConnectionField(fn, M.dim, None, True, name="levi-civita")


def riemann_from_gamma_jet(gamma):
    dG = gamma.diff()  # dG[h, j, k, i] = d_i Gamma^h_jk
    t1 = dG.transpose(3, 1, 2, 0)  # [i, j, k, h] = d_i Gamma^h_jk
    quad = jeinsum("his,sjk->ijkh", gamma, gamma)
    return t1 - t1.transpose(1, 0, 2, 3) + quad - quad.transpose(1, 0, 2, 3)


class CurvatureField:
    def __init__(self, connection):
        self.connection = connection
        self.dim = connection.dim

    def at(self, point, order=0):
        return riemann_from_gamma_jet(self.connection.at(point, order + 1))

    def values(self, point):
        return self.at(point, 0).val


def riemann(M, gamma=None):
    """Curvature of a coordinate-frame connection (default: Levi-Civita of M)."""
    gamma = christoffel(M) if gamma is None else gamma
    if gamma.frame is not None:
        raise ValueError("riemann() needs coordinate-frame coefficients")
    return CurvatureField(gamma)


# ---------------------------------------------------------------------------
# tensor fields

class TensorField:
    """Component expressions with a variance signature ('u' up, 'd' down)."""

    def __init__(self, components, variance, names):
        self.variance = tuple(variance)
        self.names = tuple(names)
        n = len(self.names)
        self.components = ExprArray(components, self.names)
        expected = (n,) * len(self.variance)
        if self.components.shape != expected:
            raise ValueError(f"components shape {self.components.shape} != {expected}")

    @property
    def exprs(self):
        return self.components.exprs

    def jet(self, point, order=0):
        return self.components.jet(point, order)

    def values(self, point):
        return self.components.values(point)


class VectorField(TensorField):
    def __init__(self, components, names):
        super().__init__(list(components), ("u",), names)

    def __getitem__(self, h):
        return self.exprs[h]


class DerivedField:
    """A tensor field known only through point evaluation of its jets."""

    def __init__(self, jet_fn, variance, names):
        self._jet_fn = jet_fn
        self.variance = tuple(variance)
        self.names = tuple(names)

    def jet(self, point, order=0):
        return self._jet_fn(np.asarray(point, dtype=float), order)

    def values(self, point):
        return self.jet(point, 0).val


def fiber_contract(T, slot, u):
    """Contract lower slot ``slot`` of T with the fiber vector u.

    Works on TensorFields (symbolically; u may hold numbers, names or
    expressions) and on plain arrays (u numeric).
    """
    if isinstance(T, TensorField):
        if not 0 <= slot < len(T.variance):
            raise IndexError(f"slot {slot} out of range")
        if T.variance[slot] != "d":
            raise ValueError(f"slot {slot} is not a lower index")
        n = len(T.names)
        us = [as_expr(x) if not isinstance(x, str) else Var(x) for x in u]
        if len(us) != n:
            raise ValueError("fiber vector has the wrong length")
        src = T.exprs
        out = np.empty(src.shape[:slot] + src.shape[slot + 1:], dtype=object)
        for idx in np.ndindex(out.shape):
            acc = Const(0.0)
            for j in range(n):
                full = idx[:slot] + (j,) + idx[slot:]
                acc = mk_add(acc, mk_mul(src[full], us[j]))
            out[idx] = acc
        variance = T.variance[:slot] + T.variance[slot + 1:]
        if not variance:
            return out[()]
        return TensorField(out, variance, T.names)
    T = np.asarray(T, dtype=float)
    if not 0 <= slot < T.ndim:
        raise IndexError(f"slot {slot} out of range")
    out = np.tensordot(T, np.asarray(u, dtype=float), axes=([slot], [0]))
    return out if T.ndim > 1 else float(out)


def lie_bracket(X, Y):
    """[X, Y]^h = X^s d_s Y^h - Y^s d_s X^h, computed symbolically."""
    if X.names != Y.names:
        raise ValueError("vector fields live on different charts")
    names = X.names
    out = []
    for h in range(len(names)):
        acc = Const(0.0)
        for s, v in enumerate(names):
            acc = mk_add(acc, mk_sub(mk_mul(X[s], differentiate(Y[h], v)),
                                     mk_mul(Y[s], differentiate(X[h], v))))
        out.append(acc)
    return VectorField(out, names)


_SLOT_LETTERS = "abcdefghjklm"


def covariant_derivative_jet(T, variance, gamma):
    """(nabla T) with the differentiation index first: [i, slots...]."""
    k = len(variance)
    letters = _SLOT_LETTERS[:k]
    out = "i" + letters
    res = T.diff().transpose(k, *range(k))
    for s, kind in enumerate(variance):
        sub = letters[:s] + "r" + letters[s + 1:]
        if kind == "u":
            res = res + jeinsum(f"{letters[s]}ir,{sub}->{out}", gamma, T)
        else:
            res = res - jeinsum(f"ri{letters[s]},{sub}->{out}", gamma, T)
    return res


def covariant_derivative(T, gamma):
    """Covariant derivative field; iterate to get second derivatives."""
    if gamma.frame is not None:
        raise ValueError("covariant_derivative() needs coordinate-frame coefficients")

    def fn(point, order):
        return covariant_derivative_jet(T.jet(point, order + 1), T.variance,
                                        gamma.at(point, order))
    return DerivedField(fn, ("d",) + tuple(T.variance), T.names)


# ---------------------------------------------------------------------------
# frames

class FrameField:
    """Frame vectors as columns of a matrix field; the coframe is its inverse."""

    def __init__(self, jet_fn, dim, name=""):
        self._jet_fn = jet_fn
        self.dim = dim
        self.name = name

    @classmethod
    def from_exprs(cls, matrix, names, name=""):
        arr = ExprArray(matrix, names)
        return cls(lambda p, order: arr.jet(p, order), len(names), name)

    @classmethod
    def identity(cls, dim):
        return cls(lambda p, order: Jet.constant(np.eye(dim), dim, order), dim, "identity")

    def jet(self, point, order=0):
        return self._jet_fn(np.asarray(point, dtype=float), order)

    def matrix(self, point):
        return self.jet(point, 0).val

    def coframe(self, point):
        return np.linalg.inv(self.matrix(point))


def frame_connection_coefficients(gamma, F):
    """C^c_{ab} with nabla_{E_a} E_b = C^c_{ab} E_c, frame-derivative terms included."""
    if gamma.frame is not None:
        raise ValueError("expected coordinate-frame coefficients")

    def fn(point, order):
        Fj = F.jet(point, order + 1)
        E = Fj.truncate(order)
        cof = E.inv()
        dF = Fj.diff()  # dF[B, b, A] = d_A E_b^B
        G = gamma.at(point, order)
        inner = dF + jeinsum("BAC,Cb->BbA", G, E)
        return jeinsum("cB,Aa,BbA->cab", cof, E, inner)
    return ConnectionField(fn, gamma.dim, frame=F, symmetric_lower=False,
                           name=f"{gamma.name} in frame {F.name}")


def structure_functions(F, point):
    """c[c, a, b] with [E_a, E_b] = c^c_{ab} E_c at ``point``."""
    Fj = F.jet(point, 1)
    E = Fj.val
    dF = Fj.d1  # [B, b, A]
    br = np.einsum("Aa,BbA->Bab", E, dF)
    br = br - br.transpose(0, 2, 1)
    return np.einsum("cB,Bab->cab", np.linalg.inv(E), br)


# ---------------------------------------------------------------------------
# index gymnastics on curvature

def mixed_curvature(R, g, ginv=None):
    """S[h, a, b, c] = R_{lab}^s g^{lh} g_{sc}: first slot raised, last lowered."""
    ginv = _spd_inverse(g) if ginv is None else ginv
    return np.einsum("lh,labs,sc->habc", ginv, R, g)


def index_shuffle(R, g, u, ginv=None):
    """H[h, j, i] = R_{.j0i}^{h.} = R_{lj0}^s g^{lh} g_{si} with slot 3 contracted with u."""
    return np.einsum("habc,b->hac", mixed_curvature(R, g, ginv), np.asarray(u, dtype=float))
