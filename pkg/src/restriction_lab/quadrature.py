"""Gauss-Legendre quadrature helpers used throughout the lab.

All integrands in the identity checks are smooth or piecewise polynomial,
so fixed-order Gauss-Legendre panels with order/panel refinement converge
quickly.  Nothing here is adaptive in the scipy.quad sense; refinement is
a comparison between two successive rules.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    """Raised when successive refinements fail to agree."""


@lru_cache(maxsize=64)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def gl_nodes(a, b, order: int):
    """Nodes and weights of the Gauss-Legendre rule on [a, b].

    ``a`` and ``b`` may be arrays (broadcast against each other); the
    returned nodes/weights then carry one extra trailing axis of length
    ``order``.
    """
    x, w = _leggauss(order)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[..., None] + half[..., None] * x
    weights = half[..., None] * w
    return nodes, weights


def gl_integrate(f, a: float, b: float, order: int = 24) -> float:
    """Single fixed-order Gauss-Legendre integral of a vectorized f."""
    x, w = gl_nodes(a, b, order)
    return float(np.sum(w * f(x)))


def integrate_refine(f, a: float, b: float, rel_tol: float = 1e-9,
                     order: int = 16, max_panels: int = 512) -> float:
    """Integrate f on [a, b] with panel bisection until two successive
    refinements agree to ``rel_tol`` (relative to the running scale)."""
    if b <= a:
        return 0.0
    panels = 1
    prev = None
    while panels <= max_panels:
        edges = np.linspace(a, b, panels + 1)
        x, w = gl_nodes(edges[:-1], edges[1:], order)
        total = float(np.sum(w * f(x)))
        if prev is not None:
            scale = max(abs(total), abs(prev), 1e-300)
            if abs(total - prev) <= rel_tol * scale + 1e-15:
                return total
        prev = total
        panels *= 2
    raise QuadratureError(
        f"integral on [{a}, {b}] did not converge to rel tol {rel_tol} "
        f"within {max_panels} panels")


def box_rule(lo, hi, order: int):
    """Tensor Gauss-Legendre rule on the box prod_i [lo_i, hi_i].

    Returns (points, weights) with points of shape (order**k, k).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    k = lo.shape[-1]
    axes = []
    waxes = []
    for i in range(k):
        n, w = gl_nodes(lo[..., i], hi[..., i], order)
        axes.append(n)
        waxes.append(w)
    grids = np.meshgrid(*axes, indexing="ij")
    wgrids = np.meshgrid(*waxes, indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=-1)
    wts = np.prod(np.stack([g.reshape(-1) for g in wgrids], axis=-1), axis=-1)
    return pts, wts


def box_integrate(f, lo, hi, rel_tol: float = 1e-7, order: int = 8,
                  max_order: int = 48) -> float:
    """Integrate a vectorized f(points) over an axis-aligned box, doubling
    the per-axis order until two successive rules agree to ``rel_tol``."""
    prev = None
    cur_order = order
    while cur_order <= max_order:
        pts, wts = box_rule(lo, hi, cur_order)
        total = float(np.sum(wts * f(pts)))
        if prev is not None:
            scale = max(abs(total), abs(prev), 1e-300)
            if abs(total - prev) <= rel_tol * scale + 1e-15:
                return total
        prev = total
        cur_order = 2 * cur_order
    raise QuadratureError(
        f"box integral did not converge to rel tol {rel_tol} "
        f"at order {max_order}")
