"""Vandermonde determinants, gap vectors and the recursive Psi kernel.

The kernel Psi_d represents the offspring Jacobian as an integral
against phi^(d); see :mod:`restriction_lab.jacobian`.  Everything here
is piecewise polynomial, so Gauss-Legendre rules split at the kink
planes are exact up to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .quadrature import box_rule, gl_nodes
from .report import CapabilityError, CheckReport, ConfigError

MAX_PSI_D = 5


def vandermonde(x) -> float:
    """prod_{i<j} (x_j - x_i); zero iff two entries coincide."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    out = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            out *= x[j] - x[i]
    return float(out)


def vandermonde_arr(x: np.ndarray) -> np.ndarray:
    """Vectorized Vandermonde product over the last axis."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    out = np.ones(x.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            out = out * (x[..., j] - x[..., i])
    return out


@dataclass(frozen=True)
class GapVector:
    """Nonnegative gaps h = (h_1, ..., h_{d-1}) between offspring offsets."""

    h: tuple[float, ...]

    def __post_init__(self):
        if any(x < 0 for x in self.h):
            raise ConfigError("gap entries must be nonnegative")

    @classmethod
    def of(cls, h) -> "GapVector":
        if isinstance(h, GapVector):
            return h
        return cls(tuple(float(x) for x in np.atleast_1d(h)))

    @property
    def d(self) -> int:
        return len(self.h) + 1

    @property
    def kappa(self) -> np.ndarray:
        """Prefix-sum offsets kappa_1 = 0, kappa_j = h_1 + ... + h_{j-1}."""
        return np.concatenate(([0.0], np.cumsum(self.h)))

    @property
    def v(self) -> float:
        return vandermonde(self.kappa)


def kappa_v(h) -> tuple[np.ndarray, float]:
    g = GapVector.of(h)
    return g.kappa, g.v


# ---------------------------------------------------------------------------
# the Psi kernel


def _psi3(t, h1: float, h2: float):
    """Closed form: integrating the d=2 indicator over its box region
    leaves min(h1, t) * (h1 + h2 - max(h1, t)) on [0, h1+h2]."""
    t = np.asarray(t, dtype=float)
    out = np.minimum(h1, t) * (h1 + h2 - np.maximum(h1, t))
    out = np.where((t >= 0) & (t <= h1 + h2), out, 0.0)
    return out


def _psi_region_box(t: float, h: Sequence[float]):
    """The box R_{d-1}(t, h) over which the recursion integrates."""
    kappa = np.concatenate(([0.0], np.cumsum(h)))
    dm1 = len(h)
    lo = np.empty(dm1)
    hi = np.empty(dm1)
    lo[0], hi[0] = 0.0, min(h[0], t)
    for j in range(1, dm1 - 1):
        lo[j], hi[j] = kappa[j], kappa[j + 1]
    lo[dm1 - 1] = max(kappa[dm1 - 1], t)
    hi[dm1 - 1] = kappa[dm1]
    return lo, hi


@lru_cache(maxsize=4096)
def _psi_scalar(d: int, t: float, h: tuple[float, ...]) -> float:
    total = sum(h)
    if t < 0.0 or t >= total:
        return 0.0
    if d == 2:
        return 1.0
    if d == 3:
        return float(_psi3(t, h[0], h[1]))
    lo, hi = _psi_region_box(t, h)
    if np.any(hi < lo):
        return 0.0
    # the only kink planes inside the box are sigma_j = t: split there
    segments = []
    for j in range(len(lo)):
        if lo[j] < t < hi[j]:
            segments.append([(lo[j], t), (t, hi[j])])
        else:
            segments.append([(lo[j], hi[j])])
    total_val = 0.0
    order = 8  # exact for the piecewise polynomial pieces of Psi_{d-1}
    from itertools import product as iproduct
    for combo in iproduct(*segments):
        lo_c = [c[0] for c in combo]
        hi_c = [c[1] for c in combo]
        pts, wts = box_rule(lo_c, hi_c, order)
        gaps = np.diff(pts, axis=-1)
        u = t - pts[:, 0]
        if d - 1 == 3:
            vals = _psi3(u, gaps[:, 0], gaps[:, 1])
        else:
            vals = np.array([
                _psi_scalar(d - 1, float(ui), tuple(float(g) for g in gi))
                for ui, gi in zip(u, gaps)])
        total_val += float(np.sum(wts * vals))
    return total_val


def psi(d: int, t, h) -> float | np.ndarray:
    """The recursive kernel Psi_d(t; h), nonnegative, supported in
    [0, h_1 + ... + h_{d-1}]."""
    if not (2 <= d <= MAX_PSI_D):
        raise CapabilityError(f"psi supports d in 2..{MAX_PSI_D}, got {d}")
    g = GapVector.of(h)
    if g.d != d:
        raise ConfigError(f"gap vector has {g.d - 1} entries, need {d - 1}")
    t_arr = np.asarray(t, dtype=float)
    if d == 2:
        out = np.where((t_arr >= 0) & (t_arr <= g.h[0]), 1.0, 0.0)
    elif d == 3:
        out = _psi3(t_arr, g.h[0], g.h[1])
    else:
        out = np.array([_psi_scalar(d, float(ti), g.h)
                        for ti in np.atleast_1d(t_arr).ravel()])
        out = out.reshape(np.atleast_1d(t_arr).shape)
    if np.ndim(t) == 0:
        return float(np.asarray(out).reshape(()))
    return out


def psi_mean_tail_ratio(d: int, t: float, h) -> float:
    """The ratio int_{g_d}^{t+kappa_d} Psi_d(u - t; h) du / v(h), with
    g_d = t + mean(kappa).

    Evaluated in closed form: the tail integral equals the offspring
    determinant for phi(u) = (u - c)_+^d / d! with c at the node mean,
    so it reduces to a d x d determinant.
    """
    g = GapVector.of(h)
    kappa = g.kappa
    v = g.v
    if v == 0.0:
        raise ZeroDivisionError("degenerate gap vector (v(h) = 0)")
    # the determinant is invariant under a common node translation, so
    # center at the node mean; for d = 2 this makes the value exactly 1/2
    s = kappa - float(np.mean(kappa))
    cols = []
    for sj in s:
        col = [sj ** i / math.factorial(i) for i in range(d - 1)]
        col.append(max(sj, 0.0) ** (d - 1) / math.factorial(d - 1))
        cols.append(col)
    mat = np.array(cols).T
    if d == 2:
        # cofactor formula; LAPACK's LU loses the exact 1/2 by an ulp
        det = float(mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0])
    else:
        det = float(np.linalg.det(mat))
    return det / v


def psi_mean_tail_ratio_quad(d: int, t: float, h, order: int = 12) -> float:
    """Independent route to :func:`psi_mean_tail_ratio`: pointwise Psi_d
    quadrature, with panels split at the kink offsets kappa_j."""
    g = GapVector.of(h)
    kappa = g.kappa
    lo = t + float(np.mean(kappa))
    hi = t + float(kappa[-1])
    breaks = sorted({lo, hi} | {t + float(k) for k in kappa
                                if lo < t + float(k) < hi})
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        x, w = gl_nodes(a, b, order)
        total += float(np.sum(w * psi(d, x - t, g)))
    return total / g.v


def check_psi_lower_bound(d: int, samples, tolerance: float = 0.0) -> CheckReport:
    """Empirical infimum of the Psi tail-mass ratio over (t, h) samples.

    For d = 2 the ratio is identically 1/2; for d >= 3 the check passes
    iff the sampled infimum is strictly positive.
    """
    samples = list(samples)
    best = math.inf
    best_sample = None
    skipped = 0
    for t, h in samples:
        g = GapVector.of(h)
        if g.v <= 0.0:
            skipped += 1
            continue
        r = psi_mean_tail_ratio(d, float(t), g)
        if r < best:
            best = r
            best_sample = {"t": float(t), "h": list(g.h), "ratio": r}
    passed = best_sample is not None and best > tolerance
    rep = CheckReport(
        check_id="check_psi_lower_bound",
        parameters={"d": d, "n_samples": len(samples)},
        estimate=best if best_sample is not None else None,
        bound=0.0,
        tolerance=tolerance,
        passed=passed,
        witnesses=[best_sample] if best_sample else [],
    )
    if skipped:
        rep.notes.append(f"skipped {skipped} degenerate samples with v(h)=0")
    if best_sample is None:
        rep.notes.append("all samples degenerate; inconclusive")
    return rep


# ---------------------------------------------------------------------------
# integral identities and inequalities for Vandermonde determinants


def _box_from_sorted(s: np.ndarray):
    return s[:-1], s[1:]


def check_vandermonde_integration(n: int, s, rel_tol: float = 1e-8) -> CheckReport:
    """V_n(s) = (n-1)! * iterated integral of V_{n-1} over prod [s_i, s_{i+1}]."""
    s = np.asarray(s, dtype=float)
    if s.shape != (n,) or np.any(np.diff(s) <= 0):
        raise ConfigError("s must be strictly increasing of length n")
    lhs = vandermonde(s)
    lo, hi = _box_from_sorted(s)
    pts, wts = box_rule(lo, hi, max(4, n))  # integrand is a polynomial
    rhs = math.factorial(n - 1) * float(np.sum(wts * vandermonde_arr(pts)))
    rel_err = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return CheckReport(
        check_id="check_vandermonde_integration",
        parameters={"n": n, "s": list(map(float, s))},
        estimate=rel_err,
        bound=rel_tol,
        tolerance=rel_tol,
        passed=rel_err <= rel_tol,
        witnesses=[{"lhs": lhs, "rhs": rhs}],
    )


def _nested_integral(integrand, bounds, order: int = 10, panels: int = 6):
    """Iterated integral with bounds that may depend on the outer variables.

    ``bounds[k](prefix) -> (lo, hi)`` where prefix is the tuple of outer
    values.  The innermost axis is vectorized.
    """
    depth = len(bounds)

    def recurse(prefix):
        k = len(prefix)
        lo, hi = bounds[k](prefix)
        if hi <= lo:
            return 0.0
        edges = np.linspace(lo, hi, panels + 1)
        nodes, weights = gl_nodes(edges[:-1], edges[1:], order)
        nodes = nodes.ravel()
        weights = weights.ravel()
        if k == depth - 1:
            pts = np.empty((nodes.size, depth))
            pts[:, :k] = prefix
            pts[:, k] = nodes
            return float(np.sum(weights * integrand(pts)))
        return float(sum(w * recurse(prefix + (x,))
                         for x, w in zip(nodes, weights)))

    return recurse(())


def check_tail_inequalities(n: int, t, delta: float,
                            floor: float = 1e-6) -> CheckReport:
    """Two lower bounds for iterated Vandermonde integrals.

    (a) spread-weighted: int_box V_{n-1}(u) (u_{n-1}-u_1)^delta du versus
        V_n(t) (t_n - t_1)^delta;
    (b) mean-restricted: the same integral restricted to
        mean(u) >= mean(t), versus V_n(t).

    Both ratios must exceed ``floor``.
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (n,) or np.any(np.diff(t) <= 0):
        raise ConfigError("t must be strictly increasing of length n")
    if n < 3:
        raise ConfigError("tail inequalities need n >= 3 "
                          "(the n=2 spread factor degenerates)")
    lo, hi = _box_from_sorted(t)

    pts, wts = box_rule(lo, hi, 24)
    spread = pts[:, -1] - pts[:, 0]
    lhs_a = float(np.sum(wts * vandermonde_arr(pts) * spread ** delta))
    rhs_a = vandermonde(t) * (t[-1] - t[0]) ** delta
    ratio_a = lhs_a / rhs_a

    mean_t = float(np.mean(t))
    target = (n - 1) * mean_t  # sum of the n-1 inner variables

    def bound_k(k):
        if k < n - 2:
            return lambda prefix: (lo[k], hi[k])
        return lambda prefix: (max(lo[k], target - sum(prefix)), hi[k])

    lhs_b = _nested_integral(vandermonde_arr,
                             [bound_k(k) for k in range(n - 1)])
    ratio_b = lhs_b / vandermonde(t)

    est = min(ratio_a, ratio_b)
    return CheckReport(
        check_id="check_tail_inequalities",
        parameters={"n": n, "t": list(map(float, t)), "delta": delta},
        estimate=est,
        bound=floor,
        tolerance=0.0,
        passed=ratio_a >= floor and ratio_b >= floor,
        witnesses=[{"spread_ratio": ratio_a, "mean_restricted_ratio": ratio_b}],
    )


def check_lin_lemma(instance: dict, floor: float = 0.0) -> CheckReport:
    """Restricted-box versus full-box integrals of products of linear factors.

    ``instance`` = {"intervals": [[a_j, b_j], ...], "lambdas": [...],
    "factors": [{"type": "diff", "j": j, "k": k} |
                {"type": "upper", "j": j, "d": d_j} |
                {"type": "lower", "j": j, "c": c_j}, ...]}
    (j, k are 0-based axis indices).  The ratio restricted/full must be
    positive: the restriction keeps only the top lambda_j fraction of
    each axis.
    """
    intervals = [tuple(map(float, iv)) for iv in instance["intervals"]]
    lambdas = [float(x) for x in instance.get("lambdas", [])]
    factors = instance.get("factors", [])
    N = len(intervals)
    if len(lambdas) != N:
        raise ConfigError("need one lambda per interval")
    for j in range(N - 1):
        if intervals[j][1] > intervals[j + 1][0]:
            raise ConfigError("intervals must be nondecreasing and disjoint")
    for (a, b) in intervals:
        if not a < b:
            raise ConfigError("each interval must satisfy a < b")
    for lam in lambdas:
        if not 0.0 < lam < 1.0:
            raise ConfigError("lambdas must lie in (0, 1)")
    for f in factors:
        kind = f.get("type")
        if kind == "diff":
            if not 0 <= f["j"] < f["k"] < N:
                raise ConfigError("diff factor needs 0 <= j < k < N")
        elif kind == "upper":
            if f["d"] < intervals[f["j"]][1]:
                raise ConfigError("upper factor needs d >= b_j")
        elif kind == "lower":
            if f["c"] > intervals[f["j"]][0]:
                raise ConfigError("lower factor needs c <= a_j")
        else:
            raise ConfigError(f"unknown factor type {kind!r}")

    def integrand(pts):
        out = np.ones(pts.shape[0])
        for f in factors:
            if f["type"] == "diff":
                out = out * (pts[:, f["k"]] - pts[:, f["j"]])
            elif f["type"] == "upper":
                out = out * (f["d"] - pts[:, f["j"]])
            else:
                out = out * (pts[:, f["j"]] - f["c"])
        return out

    order = max(4, len(factors) + 2)  # polynomial integrand
    lo_full = np.array([iv[0] for iv in intervals])
    hi_full = np.array([iv[1] for iv in intervals])
    pts, wts = box_rule(lo_full, hi_full, order)
    full = float(np.sum(wts * integrand(pts)))
    lo_res = np.array([(1 - lam) * a + lam * b
                       for (a, b), lam in zip(intervals, lambdas)])
    pts, wts = box_rule(lo_res, hi_full, order)
    restricted = float(np.sum(wts * integrand(pts)))
    ratio = restricted / full if full != 0 else math.inf
    return CheckReport(
        check_id="check_lin_lemma",
        parameters={"N": N, "M": len(factors)},
        estimate=ratio,
        bound=floor,
        tolerance=0.0,
        passed=full > 0 and ratio > floor,
        witnesses=[{"restricted": restricted, "full": full}],
    )
