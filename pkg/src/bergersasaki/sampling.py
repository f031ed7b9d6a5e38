"""Seeded sample points for numeric identity checks."""

from __future__ import annotations

import numpy as np

BASE_BOX = 0.8
FIBER_RADIUS = 1.5
MIN_EIGENVALUE = 1e-6


def _metric_ok(chart, x):
    if getattr(chart, "metric", None) is None:
        return True
    g = chart.metric_at(x)
    return np.linalg.eigvalsh(0.5 * (g + g.T))[0] >= MIN_EIGENVALUE


def base_points(chart, npoints, seed, box=BASE_BOX):
    """``npoints`` base points in [-box, box]^n, rejecting near-degenerate metrics."""
    rng = np.random.default_rng([seed, 0])
    out = []
    tries = 0
    while len(out) < npoints:
        tries += 1
        if tries > 100 * npoints + 1000:
            raise RuntimeError("could not find enough admissible sample points")
        x = rng.uniform(-box, box, size=chart.dim)
        if _metric_ok(chart, x):
            out.append(x)
    return np.array(out).reshape(npoints, chart.dim)


def fiber_points(n, npoints, seed, radius=FIBER_RADIUS, include_origin=True):
    """Fiber vectors uniform in the ball |u| <= radius; the first is u = 0."""
    rng = np.random.default_rng([seed, 1])
    d = rng.normal(size=(npoints, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, size=(npoints, 1)) ** (1.0 / n)
    u = d * r
    if include_origin and npoints:
        u[0] = 0.0
    return u


def bundle_points(chart, npoints, seed, include_origin=True):
    """Points (x, u) on the tangent bundle chart, shape (npoints, 2n)."""
    x = base_points(chart, npoints, seed)
    u = fiber_points(chart.dim, npoints, seed, include_origin=include_origin)
    return np.hstack([x, u])
