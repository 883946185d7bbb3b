import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from coneflow.flow import flow_line, sup_log_ratio
from coneflow.green import b_inverse, build_green, hessian_eigen_b2
from coneflow.monotone import (area_and_A, fit_decay, gradient_radius, hess_weighted_integral,
                               log_hess_weighted_integral, loj_decay_table, main_theorem_table,
                               prop26_check)
from coneflow.warp import make_profile


def test_fit_decay_exact_power_laws():
    assert fit_decay([1, 2, 4], [1, 0.25, 0.0625]).exponent == -2.0
    fit = fit_decay([1, 2, 4, 8], [3 * t ** -0.5 for t in (1, 2, 4, 8)])
    assert fit.exponent == -0.5 and fit.residual < 1e-14


@pytest.mark.parametrize("seed", range(5))
def test_fit_decay_under_one_percent_noise(seed):
    rng = np.random.default_rng(seed)
    t = np.geomspace(1, 100, 12)
    y = t ** -1.0 * (1 + 0.01 * rng.standard_normal(t.size))
    assert abs(fit_decay(t, y).exponent + 1.0) <= 0.05


@settings(max_examples=30, deadline=None)
@given(p=st.floats(-5, 5), c=st.floats(0.01, 100))
def test_fit_decay_recovers_any_power(p, c):
    t = np.array([1.0, 2.0, 5.0, 11.0])
    fit = fit_decay(t, c * t ** p)
    assert fit.exponent == pytest.approx(p, abs=1e-9)


def test_fit_decay_degenerate_cases():
    assert fit_decay([1, 2, 4], [0, 0, 0]).degenerate
    assert fit_decay([1, 2], [1, 0.5]).degenerate
    assert fit_decay([1, 2, 4], log_y=[-math.inf, -1.0, -2.0]).degenerate
    assert not fit_decay([1, 2, 4], log_y=[-1000.0, -2000.0, -3000.0]).degenerate


def test_area_and_A_examples(euclid3, cone3):
    area, A = area_and_A(euclid3, 2.0)
    assert area == pytest.approx(16 * math.pi, rel=1e-12)
    assert A == pytest.approx(4 * math.pi, rel=1e-12)
    for r in (0.5, 2.0, 40.0):
        assert area_and_A(cone3, r)[1] == pytest.approx(math.pi / 4, rel=1e-12)


def test_A_monotone_on_smoothed_cone(smooth4):
    levels = [smooth4.b(r) for r in np.geomspace(1, 1e3, 20)]
    A = np.array([area_and_A(smooth4, r)[1] for r in levels])
    assert np.all(np.diff(A) <= 1e-9)
    # finite at the pole, positive at infinity
    A0 = area_and_A(smooth4, smooth4.b(1e-4))[1]
    A_inf = area_and_A(smooth4, smooth4.b(1e5))[1]
    assert A0 == pytest.approx(smooth4.manifold.sphere_area, rel=1e-6)
    assert 0 < A_inf < A[-1] + 1e-9


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
def test_A_monotone_family(alpha):
    m = build_green(make_profile("smoothed_cone", 5, alpha=alpha, a=2.0))
    A = np.array([area_and_A(m, m.b(r))[1] for r in np.geomspace(0.01, 1e3, 30)])
    assert np.all(np.diff(A) <= 1e-9)


def test_area_band(smooth4):
    # area / (omega_{n-1} r^(n-1)) = 1 / b'(b^-1 r), trapped in [1, 1/b_inf]
    levels = [smooth4.b(r) for r in np.geomspace(1, 1e3, 20)]
    q = [area_and_A(smooth4, r)[0] / (smooth4.manifold.sphere_area * r ** 3) for r in levels]
    assert min(q) >= 1.0 - 1e-12 and max(q) <= 1 / smooth4.b_inf + 1e-12


def test_H_vanishes_on_exact_models(euclid4, cone3):
    for r in (0.5, 3.0):
        assert hess_weighted_integral(euclid4, r) == 0.0
        assert hess_weighted_integral(cone3, r) <= 1e-12


def test_H_against_direct_quadrature(smooth4):
    # where the trace-free Hessian is still resolvable by direct subtraction
    n = smooth4.n

    def integrand(s):
        h = hessian_eigen_b2(smooth4, s)
        direct = (n - 1) / n * (h.lam_rad - h.lam_sph) ** 2
        return smooth4.b(s) ** -n * direct * smooth4.profile.phi(s) ** (n - 1)

    for level in (0.3, 1.0):
        rb = b_inverse(smooth4, level)
        oracle = smooth4.manifold.sphere_area * integrate.quad(
            integrand, rb, 25.0, epsabs=0, epsrel=1e-10, limit=400)[0]
        assert hess_weighted_integral(smooth4, level) == pytest.approx(oracle, rel=1e-6)


def test_H_decreasing_on_smoothed_cone(smooth4):
    levels = [smooth4.b(r) for r in np.geomspace(1, 1e3, 20)]
    logs = np.array([log_hess_weighted_integral(smooth4, r) for r in levels])
    assert np.all(np.isfinite(logs)) and np.all(np.diff(logs) < 0)
    assert logs[-1] < -1000  # far below double range, still resolved
    H1, H100 = (hess_weighted_integral(smooth4, smooth4.b(r)) for r in (1.0, 100.0))
    assert H1 > 0 and H100 < H1 / 10


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 3.0, 10.0, 100.0])
def test_flatter_profile_has_smaller_H(smooth4, smooth4_flat, r):
    # matched geodesic radius: each model's level b(r)
    flat = log_hess_weighted_integral(smooth4_flat, smooth4_flat.b(r))
    assert flat < log_hess_weighted_integral(smooth4, smooth4.b(r))


def test_prop26_examples(euclid4, cone3, smooth4):
    res = prop26_check(euclid4, 2.0, 1.0, 2.0)
    assert res.lhs == 0.0 and res.rhs == 0.0 and res.satisfied
    res = prop26_check(cone3, 2.0, 1.0, 3.0)
    assert res.lhs <= 1e-9 and res.rhs <= 1e-9 and res.satisfied
    res = prop26_check(smooth4, smooth4.b(5.0), 1.0, 4.0)
    assert res.satisfied and res.log_lhs < res.log_rhs


def test_prop26_argument_order(smooth4):
    with pytest.raises(ValueError):
        prop26_check(smooth4, 2.0, 3.0, 1.0)


def test_main_table_exact_models(euclid4, cone3):
    rep = main_theorem_table(euclid4, 10.0, [1, 2, 4, 8, 16], 64.0)
    assert rep.degenerate and np.all(rep.values == 0.0)
    rep = main_theorem_table(cone3, 10.0, [1, 2, 4], 8.0)
    assert rep.degenerate and np.all(rep.values <= 1e-12)


def test_main_table_smoothed(smooth4):
    rep = main_theorem_table(smooth4, smooth4.b(10.0), [1, 2, 4, 8, 16], 64.0)
    assert rep.strictly_decreasing and rep.violations == 0
    assert rep.fitted_exponent < 0 and np.isfinite(rep.fit.residual)
    assert rep.extra["base_radius"] == pytest.approx(10.0, rel=1e-11)


def test_main_table_is_T_independent_up_to_the_tail(smooth4):
    r0 = 2.0
    line = flow_line(smooth4, r0, 6.0)
    for t in (0.5, 1.0, 2.0):
        T1, T2 = 4.0, 6.0
        assert sup_log_ratio(smooth4, r0, t, T2, line) <= \
            sup_log_ratio(smooth4, r0, t, T1, line) + sup_log_ratio(smooth4, r0, T1, T2, line) + 1e-15


def test_main_table_validation(smooth4):
    with pytest.raises(ValueError):
        main_theorem_table(smooth4, 3.0, [1, 4, 2], 8.0)
    with pytest.raises(ValueError):
        main_theorem_table(smooth4, 3.0, [1, 2, 8], 8.0)


def test_loj_table(euclid4, cone3, smooth4):
    grid = [10, 30, 100, 300, 1000]
    for m in (euclid4, cone3):
        assert loj_decay_table(m, [m.b(r) for r in grid], m.b(1.0)).degenerate
    rep = loj_decay_table(smooth4, [smooth4.b(r) for r in grid], smooth4.b(1.0))
    assert rep.violations == 0 and rep.strictly_decreasing
    assert rep.fitted_exponent <= -1 + rep.fit.residual
    with pytest.raises(ValueError):
        loj_decay_table(smooth4, [1.0, 2.0], 1.5)


def test_gradient_radius(euclid4, smooth4):
    grid = np.geomspace(1, 1e3, 20)
    assert gradient_radius(euclid4, grid) == 1.0
    r0 = gradient_radius(smooth4, grid)
    assert 1.0 < r0 < 10.0
    assert all(abs(smooth4.bp(r) - smooth4.b_inf) < 0.01 * smooth4.b_inf for r in grid if r >= r0)
