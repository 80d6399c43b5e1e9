import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restriction_lab.curves import HomogeneousCurve, SimpleCurve, poly_oracle
from restriction_lab.geometry import Parallelepiped, cube
from restriction_lab.probe import (SampledFunction, TestFunction,
                                   check_dilation_invariance,
                                   converse_scaling_check, empirical_ratio,
                                   extension, homogeneous_rescale_check,
                                   lorentz_norm, restrict)
from restriction_lab.quadrature import QuadratureError
from restriction_lab.report import ConfigError


@pytest.fixture
def parabola():
    return SimpleCurve(d=2, phi=poly_oracle([0, 0, 0.5], domain=(0.0, 2.0)),
                       label="parabola")


def _lattice_fourier(g, xi, half, n=800):
    """Brute-force transform on a midpoint lattice, one xi at a time.

    Midpoint sampling keeps box-bump edges between samples so the
    indicator boundary error cancels.
    """
    h = 2.0 * half / n
    axes = [-half + h * (np.arange(n) + 0.5)] * g.dim
    step = h ** g.dim
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, g.dim)
    return np.sum(g(X) * np.exp(-1j * (X @ np.asarray(xi)))) * step


def test_gaussian_fourier_matches_lattice():
    g = TestFunction.gaussian([0.3, -0.1], [0.7, 0.5], amp=1.3)
    for xi in ([0.0, 0.0], [1.5, -0.8]):
        num = _lattice_fourier(g, xi, half=6.0)
        assert g.fourier(np.asarray(xi)) == pytest.approx(num, rel=1e-6)


def test_box_bump_fourier_matches_lattice():
    # frozen against the lattice route; sinc zeros are the sharp part
    g = TestFunction.box_bump([0.2, 0.0], [1.0, 2.0])
    for xi in ([0.0, 0.0], [2.0, 1.0], [2 * np.pi, 0.5]):
        num = _lattice_fourier(g, xi, half=2.0, n=2000)
        assert abs(g.fourier(np.asarray(xi)) - num) <= 1e-4


def test_modulated_fourier_is_shifted_gaussian():
    base = TestFunction.gaussian([0.4], [0.9])
    mod = TestFunction.modulated([0.4], [0.9], [2.5])
    xi = np.linspace(-4, 4, 17)[:, None]
    assert np.allclose(mod.fourier(xi), base.fourier(xi - 2.5))


def test_lp_norm_closed_forms():
    g = TestFunction.gaussian([0.0, 0.0], [1.0, 2.0], amp=3.0)
    # L^2 of amp*exp(-|x|^2/2 sigma^2) is amp (pi sigma^2)^{1/4} per axis
    assert g.lp_norm(2.0) == pytest.approx(
        3.0 * (np.pi * 1.0) ** 0.25 * (np.pi * 4.0) ** 0.25)
    b = TestFunction.box_bump([0.0], [2.0], amp=0.5)
    assert b.lp_norm(4.0) == pytest.approx(0.5 * 2.0 ** 0.25)
    with pytest.raises(ConfigError):
        g.lp_norm(0.0)


def test_from_spec_round_trip_and_validation():
    g = TestFunction.from_spec({"kind": "Gaussian", "center": [0, 0],
                                "sigma": 1.0, "amp": 2.0})
    assert g(np.zeros(2)) == pytest.approx(2.0)
    with pytest.raises(ConfigError):
        TestFunction.from_spec({"kind": "Triangle", "center": [0]})


def test_sampled_function_validation():
    with pytest.raises(ConfigError):
        SampledFunction(grid=np.array([0.0, 1.0]),
                        weights=np.array([0.5, 0.0]),
                        values=np.array([1.0, 1.0]))
    with pytest.raises(ConfigError):
        SampledFunction(grid=np.array([1.0, 0.0]),
                        weights=np.array([0.5, 0.5]),
                        values=np.array([1.0, 1.0]))


def test_restrict_evaluates_fourier_on_curve():
    cubic = SimpleCurve(d=2, phi=poly_oracle([0, 0, 0, 1.0],
                                             domain=(0.1, 1.0)),
                        label="cubic")
    g = TestFunction.gaussian([0.0, 0.0], [1.0, 1.0])
    ts = np.linspace(0.1, 1.0, 33)
    rs = restrict(g, cubic, ts)
    pts = np.stack([ts, ts ** 3], axis=-1)
    assert np.allclose(rs.values, g.fourier(pts))
    # weighted measure carries w(t) = (6t)^{1/3}
    rw = restrict(g, cubic, ts, weighted=True)
    mid = len(rs.grid) // 2
    t_mid = rs.grid[mid]
    assert rw.weights[mid] == pytest.approx(
        rs.weights[mid] * (6 * t_mid) ** (1 / 3))


def test_extension_constant_zero_frequency(parabola):
    val = extension(lambda t: np.ones_like(t), parabola, "off",
                    np.zeros(2), lam=1.0)
    assert val == pytest.approx(2.0)  # the domain length


def test_extension_linearity_and_bound(parabola):
    x = np.array([1.5, -2.0])
    f1 = lambda t: np.exp(-t)
    f2 = lambda t: t ** 2
    v1 = extension(f1, parabola, "on", x, lam=3.0)
    v2 = extension(f2, parabola, "on", x, lam=3.0)
    v12 = extension(lambda t: f1(t) + 2 * f2(t), parabola, "on", x, lam=3.0)
    assert v12 == pytest.approx(v1 + 2 * v2, rel=1e-12)
    # |T f| <= int |f| w dt, and w = 1 for the parabola
    bound = extension(f1, parabola, "on", np.zeros(2), lam=1.0).real
    assert abs(v1) <= bound + 1e-12


def test_extension_conjugate_symmetry(parabola):
    x = np.array([0.7, 1.1])
    plus = extension(lambda t: np.cos(t), parabola, "off", x, lam=2.0)
    minus = extension(lambda t: np.cos(t), parabola, "off", -x, lam=2.0)
    assert minus == pytest.approx(np.conj(plus), rel=1e-12)


def test_extension_matches_fine_trapezoid(parabola):
    x = np.array([3.0, 2.0])
    f = lambda t: np.exp(-t ** 2)
    val = extension(f, parabola, "off", x, lam=5.0)
    ts = np.linspace(0.0, 2.0, 200_001)
    phase = 5.0 * (x[0] * ts + x[1] * ts ** 2 / 2)
    ref = np.trapezoid(f(ts) * np.exp(-1j * phase), ts)
    assert val == pytest.approx(ref, rel=1e-5)


def test_extension_budget_and_validation(parabola):
    with pytest.raises(QuadratureError):
        extension(lambda t: np.ones_like(t), parabola, "off",
                  np.array([1e6, 1e6]), lam=100.0, max_panels=50)
    with pytest.raises(ConfigError):
        extension(lambda t: t, parabola, "maybe", np.zeros(2))
    with pytest.raises(ConfigError):
        extension(lambda t: t, parabola, "off", np.zeros(2), lam=0.5)


@settings(max_examples=30, deadline=None)
@given(q=st.floats(0.5, 6.0), seed=st.integers(0, 10 ** 6))
def test_lorentz_qq_equals_lq(q, seed):
    rng = np.random.default_rng(seed)
    n = 17
    fn = SampledFunction(grid=np.linspace(0, 1, n),
                         weights=rng.uniform(0.1, 1.0, size=n),
                         values=rng.normal(size=n)
                         + 1j * rng.normal(size=n))
    assert lorentz_norm(fn, q, q) == pytest.approx(fn.lp(q), rel=1e-12)


def test_lorentz_weak_norm_of_indicator():
    fn = SampledFunction(grid=np.linspace(0, 1, 8),
                         weights=np.full(8, 0.25),
                         values=np.ones(8))
    # f* = 1 and T_k is the running measure: sup is (total measure)^{1/q}
    assert lorentz_norm(fn, 3.0, math.inf) == pytest.approx(2.0 ** (1 / 3))
    with pytest.raises(ConfigError):
        lorentz_norm(fn, -1.0, 2.0)


def test_lorentz_refinement_trend_for_power_weight():
    # f(t) = t^{-1/2} on (0, 1] sits exactly on the weak-L^2 boundary:
    # the weak functional stabilizes while the L^2 norm grows with the
    # grid refinement toward the origin
    weak, strong = [], []
    for n in (200, 800, 3200):
        grid = np.linspace(1.0 / n, 1.0, n)
        w = np.full(n, 1.0 / n)
        fn = SampledFunction(grid=grid, weights=w,
                             values=grid ** -0.5)
        weak.append(lorentz_norm(fn, 2.0, math.inf))
        strong.append(fn.lp(2.0))
    assert weak[-1] == pytest.approx(weak[0], rel=0.02)
    assert strong[-1] > strong[0] + 0.5


def test_empirical_ratio_is_finite_and_annotated(moment_curve_3,
                                                 quartic_curve):
    fam = [TestFunction.gaussian([0, 0, 0], s) for s in (0.5, 1.0, 2.0)]
    rep = empirical_ratio([moment_curve_3, quartic_curve], 9 / 8, 1.5,
                          True, fam, np.linspace(0.05, 0.95, 201))
    assert rep.passed
    assert math.isfinite(rep.estimate) and rep.estimate > 0
    assert rep.witnesses[0]["spread"] >= 1.0
    assert any("exploratory" in n for n in rep.notes)
    with pytest.raises(ConfigError):
        empirical_ratio([], 9 / 8, 1.5, True, fam, np.linspace(0, 1, 5))


def test_dilation_invariance_at_pairing_exponents():
    # d = 2 pairing: 1/Q = 3 (1 - 1/P); P = 6/5 gives Q = 2
    g = TestFunction.gaussian([0.0, 0.0], [1.0, 1.5])
    rep = check_dilation_invariance(2, 6 / 5, 2.0, g, octaves=3)
    assert rep.passed, rep.estimate
    # off the scaling line the ratio drifts by design
    off = check_dilation_invariance(2, 6 / 5, 3.0, g, octaves=3)
    assert off.estimate > rep.estimate


def test_homogeneous_rescale_identity():
    curve = HomogeneousCurve(exponents=(1.0, 2.0, 3.0))
    g = TestFunction.gaussian([0.0, 0.0, 0.0], [1.0, 0.8, 1.2])
    for k in (0, 1, 3):
        rep = homogeneous_rescale_check(curve, k, g, 7 / 6)
        assert rep.passed, rep.estimate
    with pytest.raises(ConfigError):
        homogeneous_rescale_check(curve, -1, g, 7 / 6)


def test_converse_scaling_unit_cube():
    E = cube([0.5, 0.5], 1.0)
    f = TestFunction.gaussian([0.0, 0.0], [1.0, 1.0])
    rep = converse_scaling_check(E, f, 6 / 5, 2.0, 1 / 3)
    assert rep.passed, rep.estimate
    assert rep.witnesses[0]["m_d"] == pytest.approx(1.0)


def test_converse_scaling_skewed_box():
    E = Parallelepiped.of([0.2, -0.1], [[1.5, 0.3], [0.0, 0.7]])
    f = TestFunction.gaussian([0.0, 0.0], [0.8, 1.1])
    rep = converse_scaling_check(E, f, 6 / 5, 2.0, 1 / 3)
    assert rep.passed, rep.estimate


def test_converse_scaling_preconditions():
    E = cube([0.0, 0.0], 1.0)
    g = TestFunction.gaussian([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ConfigError):
        converse_scaling_check(E, g, 6 / 5, 2.0, 0.25)  # 1/P' != alpha/Q
    with pytest.raises(ConfigError):
        converse_scaling_check(E, TestFunction.box_bump([0, 0], [1, 1]),
                               6 / 5, 2.0, 1 / 3)
    with pytest.raises(ConfigError):
        converse_scaling_check(E, TestFunction.gaussian([0.0], [1.0]),
                               6 / 5, 2.0, 1 / 3)


def test_converse_scaling_monotonicity_step(parabola):
    E = cube([0.5, 0.5], 1.0)
    # amp 2 keeps g_hat >= 1 across the whole unit cell
    f = TestFunction.gaussian([0.5, 0.5], [2.0, 2.0], amp=2.0)
    rep = converse_scaling_check(E, f, 6 / 5, 2.0, 1 / 3, curve=parabola)
    assert rep.passed
    assert len(rep.witnesses) == 2
    assert (rep.witnesses[1]["lambda^{1/Q}"]
            <= rep.witnesses[1]["normQ"] * (1 + 1e-9))
