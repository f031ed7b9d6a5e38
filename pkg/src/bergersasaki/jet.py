"""Second-order jets of array-valued functions at a point.

A :class:`Jet` stores the value of a tensor-valued function together with its
first and (optionally) second partial derivatives with respect to ``nvars``
chart coordinates.  Derivative axes always trail the value axes::

    val  : S
    d1   : S + (N,)
    d2   : S + (N, N)

Products, contractions and matrix inverses propagate derivatives exactly,
which is what lets numerically inverted metrics still feed Christoffel
symbols and curvature without finite differences.
"""

from __future__ import annotations

import string

import numpy as np

__all__ = ["Jet", "jeinsum"]


class Jet:
    __slots__ = ("val", "d1", "d2", "nvars")

    def __init__(self, val, d1=None, d2=None, nvars=None):
        self.val = np.asarray(val, dtype=float)
        if d1 is None and d2 is not None:
            raise ValueError("second derivatives without first derivatives")
        self.d1 = None if d1 is None else np.asarray(d1, dtype=float)
        self.d2 = None if d2 is None else np.asarray(d2, dtype=float)
        if nvars is None:
            if self.d1 is None:
                raise ValueError("nvars is required for an order-0 jet")
            nvars = self.d1.shape[-1]
        self.nvars = int(nvars)

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, val, nvars, order=2):
        val = np.asarray(val, dtype=float)
        d1 = np.zeros(val.shape + (nvars,)) if order >= 1 else None
        d2 = np.zeros(val.shape + (nvars, nvars)) if order >= 2 else None
        return cls(val, d1, d2, nvars)

    @classmethod
    def coordinates(cls, point, order=2):
        """Jet of the coordinate functions x^a themselves."""
        point = np.asarray(point, dtype=float)
        n = point.shape[0]
        d1 = np.eye(n) if order >= 1 else None
        d2 = np.zeros((n, n, n)) if order >= 2 else None
        return cls(point.copy(), d1, d2, n)

    @property
    def order(self):
        if self.d1 is None:
            return 0
        return 1 if self.d2 is None else 2

    @property
    def shape(self):
        return self.val.shape

    def __repr__(self):
        return f"Jet(shape={self.shape}, order={self.order}, nvars={self.nvars})"

    # -- structural ops ---------------------------------------------------
    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.val,
                   self.d1 if order >= 1 else None,
                   self.d2 if order >= 2 else None, self.nvars)

    def diff(self):
        """Jet of the gradient; the new derivative index is the last value axis."""
        if self.d1 is None:
            raise ValueError("order-0 jet has no derivative information")
        return Jet(self.d1, self.d2, None, self.nvars)

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            raise IndexError("Ellipsis indexing is ambiguous on a Jet")
        return Jet(self.val[idx],
                   None if self.d1 is None else self.d1[idx],
                   None if self.d2 is None else self.d2[idx], self.nvars)

    def transpose(self, *axes):
        k = self.val.ndim
        if sorted(axes) != list(range(k)):
            raise ValueError(f"bad permutation {axes} for rank {k}")
        d1 = None if self.d1 is None else self.d1.transpose(*axes, k)
        d2 = None if self.d2 is None else self.d2.transpose(*axes, k, k + 1)
        return Jet(self.val.transpose(*axes), d1, d2, self.nvars)

    def embed(self, nvars, positions):
        """Re-express derivatives in a larger coordinate system.

        ``positions[a]`` is the index in the new system of old coordinate a;
        derivatives with respect to the other new coordinates are zero.
        """
        positions = list(positions)
        s = self.val.shape
        d1 = d2 = None
        if self.d1 is not None:
            d1 = np.zeros(s + (nvars,))
            d1[..., positions] = self.d1
        if self.d2 is not None:
            d2 = np.zeros(s + (nvars, nvars))
            for a, A in enumerate(positions):
                d2[..., A, positions] = self.d2[..., a, :]
        return Jet(self.val, d1, d2, nvars)

    @staticmethod
    def concatenate(jets, axis=0):
        jets = [_as_jet(j, jets) for j in jets]
        order = min(j.order for j in jets)
        jets = [j.truncate(order) for j in jets]
        val = np.concatenate([j.val for j in jets], axis=axis)
        d1 = np.concatenate([j.d1 for j in jets], axis=axis) if order >= 1 else None
        d2 = np.concatenate([j.d2 for j in jets], axis=axis) if order >= 2 else None
        return Jet(val, d1, d2, jets[0].nvars)

    @staticmethod
    def block(rows):
        """Assemble a matrix jet from a nested list of matrix jets/arrays."""
        flat = [j for row in rows for j in row]
        ref = next(j for j in flat if isinstance(j, Jet))
        return Jet.concatenate(
            [Jet.concatenate([_as_jet(j, [ref]) for j in row], axis=1) for row in rows],
            axis=0)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.val + other, self.d1, self.d2, self.nvars)
        order = min(self.order, other.order)
        a, b = self.truncate(order), other.truncate(order)
        return Jet(a.val + b.val,
                   None if order < 1 else a.d1 + b.d1,
                   None if order < 2 else a.d2 + b.d2, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val,
                   None if self.d1 is None else -self.d1,
                   None if self.d2 is None else -self.d2, self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if isinstance(c, Jet):
            raise TypeError("use jeinsum for jet-jet products")
        return Jet(self.val * c,
                   None if self.d1 is None else self.d1 * c,
                   None if self.d2 is None else self.d2 * c, self.nvars)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def reciprocal(self):
        """Elementwise 1/f."""
        v = self.val
        r = 1.0 / v
        d1 = d2 = None
        if self.d1 is not None:
            r2 = (r * r)[..., None]
            d1 = -self.d1 * r2
        if self.d2 is not None:
            r3 = (r * r * r)[..., None, None]
            outer = self.d1[..., :, None] * self.d1[..., None, :]
            d2 = 2.0 * outer * r3 - self.d2 * (r * r)[..., None, None]
        return Jet(r, d1, d2, self.nvars)

    def inv(self):
        """Inverse of a square matrix jet."""
        if self.val.ndim != 2 or self.val.shape[0] != self.val.shape[1]:
            raise ValueError("inv needs a square matrix jet")
        A = np.linalg.inv(self.val)
        d1 = d2 = None
        if self.d1 is not None:
            d1 = -np.einsum("ab,bcp,cd->adp", A, self.d1, A)
        if self.d2 is not None:
            t = np.einsum("abp,bc,cdq->adpq", self.d1, A, self.d1)
            inner = t + t.transpose(0, 1, 3, 2) - self.d2
            d2 = np.einsum("ab,bcpq,cd->adpq", A, inner, A)
        return Jet(A, d1, d2, self.nvars)


def _as_jet(x, others):
    if isinstance(x, Jet):
        return x
    ref = next(j for j in others if isinstance(j, Jet))
    return Jet.constant(x, ref.nvars, ref.order)


def _einsum2(lhs_a, lhs_b, out, a, b):
    """Contract two operands; each may be a Jet or a plain array."""
    p, q = _free_letters(lhs_a + lhs_b + out, 2)
    ja, jb = isinstance(a, Jet), isinstance(b, Jet)
    if not ja and not jb:
        return np.einsum(f"{lhs_a},{lhs_b}->{out}", a, b)
    if not ja:
        return _einsum2(lhs_b, lhs_a, out, b, a)
    spec = f"{lhs_a},{lhs_b}->{out}"
    if not jb:
        B = np.asarray(b, dtype=float)
        val = np.einsum(spec, a.val, B)
        d1 = None if a.d1 is None else np.einsum(
            f"{lhs_a}{p},{lhs_b}->{out}{p}", a.d1, B)
        d2 = None if a.d2 is None else np.einsum(
            f"{lhs_a}{p}{q},{lhs_b}->{out}{p}{q}", a.d2, B)
        return Jet(val, d1, d2, a.nvars)
    order = min(a.order, b.order)
    val = np.einsum(spec, a.val, b.val)
    d1 = d2 = None
    if order >= 1:
        d1 = (np.einsum(f"{lhs_a}{p},{lhs_b}->{out}{p}", a.d1, b.val)
              + np.einsum(f"{lhs_a},{lhs_b}{p}->{out}{p}", a.val, b.d1))
    if order >= 2:
        cross = np.einsum(f"{lhs_a}{p},{lhs_b}{q}->{out}{p}{q}", a.d1, b.d1)
        d2 = (np.einsum(f"{lhs_a}{p}{q},{lhs_b}->{out}{p}{q}", a.d2, b.val)
              + np.einsum(f"{lhs_a},{lhs_b}{p}{q}->{out}{p}{q}", a.val, b.d2)
              + cross + np.swapaxes(cross, -1, -2))
    return Jet(val, d1, d2, a.nvars)


def _free_letters(used, k):
    spare = [c for c in string.ascii_letters if c not in used]
    return spare[:k]


def jeinsum(subscripts, *operands):
    """``np.einsum`` that propagates jet derivatives (product rule).

    Operands may mix Jets and arrays; explicit ``->`` output is required.
    Multi-operand contractions are folded pairwise from the left.
    """
    if "->" not in subscripts or "." in subscripts:
        raise ValueError("jeinsum needs explicit output subscripts and no ellipsis")
    lhs, out = subscripts.replace(" ", "").split("->")
    terms = lhs.split(",")
    if len(terms) != len(operands):
        raise ValueError("subscript/operand count mismatch")
    if len(terms) == 1:
        a = operands[0]
        if isinstance(a, Jet):
            return _einsum2(terms[0], "", out, a, np.float64(1.0))
        return np.einsum(subscripts, a)
    acc, acc_sub = operands[0], terms[0]
    for k in range(1, len(terms)):
        later = "".join(terms[k + 1:]) + out
        seen = []
        for c in acc_sub + terms[k]:
            if c not in seen and (c in later or k == len(terms) - 1 and c in out):
                seen.append(c)
        step_out = out if k == len(terms) - 1 else "".join(seen)
        acc = _einsum2(acc_sub, terms[k], step_out, acc, operands[k])
        acc_sub = step_out
    return acc
