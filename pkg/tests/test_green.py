import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from coneflow import green
from coneflow.green import (GreenConstructionError, ModelInconsistencyError, b_infinity,
                            b_inverse, build_green, hessian_eigen_b2, identity_residuals)
from coneflow.warp import Cone, DomainError, ModelManifold, make_profile

from conftest import simpson_to_infinity


def test_euclid_normalization(euclid4):
    assert euclid4.G(2.0) == pytest.approx(0.25, rel=1e-15)
    assert euclid4.b(2.0) == pytest.approx(2.0, rel=1e-15)
    assert euclid4.b_inf == 1.0


def test_cone_closed_form(cone3):
    assert cone3.G(2.0) == pytest.approx(2.0, rel=1e-14)
    assert cone3.b_inf == pytest.approx(0.25, rel=1e-15)
    # b = alpha^((n-1)/(n-2)) r exactly on cones
    for r in (0.01, 1.0, 300.0):
        assert cone3.b(r) == pytest.approx(0.25 * r, rel=1e-14)


@pytest.mark.parametrize("r", [0.05, 1.0, 4.0, 30.0])
def test_smoothed_green_against_simpson(smooth4, r):
    p = smooth4.profile
    oracle = 2 * simpson_to_infinity(lambda s: p.phi(s) ** -3, r)
    assert abs(smooth4.G(r) - oracle) <= 1e-9


def test_b_infinity_routes(smooth4):
    assert smooth4.b_inf == pytest.approx(0.5 ** 1.5, rel=1e-15)
    assert abs(smooth4.bp(1e4) - smooth4.b_inf) < 1e-6


def test_b_infinity_disagreement_is_reported(smooth4, monkeypatch):
    monkeypatch.setattr(green, "asymptotic_volume_ratio", lambda m: 0.2)
    with pytest.raises(ModelInconsistencyError):
        b_infinity(smooth4)


class _Bulging(Cone):
    name = "bulging"

    def asymptote(self):
        return None


def test_non_conical_profile_is_rejected():
    with pytest.raises(GreenConstructionError):
        build_green(ModelManifold(3, _Bulging(alpha=0.5)))


def test_pole_cutoff(smooth4):
    with pytest.raises(DomainError):
        smooth4.G(1e-9)
    smooth4.G(2e-8)  # just above the cutoff is fine


def test_identity_residual_examples(euclid4, cone3, smooth4):
    grid = np.geomspace(0.1, 1e3, 25)
    rep = identity_residuals(euclid4, grid)
    assert rep.max_laplace <= 1e-12 and rep.max_flux <= 1e-14
    assert rep.msy_bounds == pytest.approx((1.0, 1.0), rel=1e-14)
    rep = identity_residuals(cone3, grid)
    assert rep.max_laplace <= 1e-10 and rep.max_flux <= 1e-10
    np.testing.assert_allclose(rep.msy_ratio, 4.0, rtol=1e-13)
    rep = identity_residuals(smooth4, grid)
    assert rep.max_laplace <= 1e-8 and rep.max_flux <= 1e-10
    # G r^(n-2) rises monotonically towards alpha^(1-n) = 8
    assert np.all(np.diff(rep.msy_ratio) > 0)
    assert 1.0 <= rep.msy_bounds[0] and rep.msy_bounds[1] < 8.0


def test_identities_over_the_wide_grid(any_model):
    rep = identity_residuals(any_model, np.geomspace(1e-2, 1e4, 80))
    assert rep.max_laplace <= 1e-8
    assert rep.max_flux <= 1e-10


def test_radial_invariants(any_model):
    grid = np.geomspace(1e-2, 1e4, 120)
    vals = [any_model.radial(r) for r in grid]
    G = np.array([v.G for v in vals])
    b = np.array([v.b for v in vals])
    bp = np.array([v.bp for v in vals])
    assert np.all(G > 0) and all(v.Gp < 0 for v in vals)
    assert np.all(b > 0) and np.all(np.diff(b) > 0)
    assert np.all(bp > 0) and np.all(bp <= 1.0 + 1e-10)
    # concave profiles: b' decreases to b_inf
    assert np.all(np.diff(bp) <= 1e-15)
    assert abs(bp[-1] - any_model.b_inf) < 1e-6


def test_bp_matches_finite_difference(smooth4):
    for r in (0.3, 1.0, 5.0):
        h = 1e-5 * r
        fd = (smooth4.b(r + h) - smooth4.b(r - h)) / (2 * h)
        assert smooth4.bp(r) == pytest.approx(fd, rel=1e-8)
        fd2 = (smooth4.bp(r + h) - smooth4.bp(r - h)) / (2 * h)
        assert smooth4.bpp(r) == pytest.approx(fd2, rel=1e-6, abs=1e-12)


def _coordinate_hessian(profile, n, f, r, h=1e-4):
    """Hessian of a radial ``f`` in spherical coordinates, index raised.

    Christoffel symbols come from sympy; ``f'`` and ``f''`` from finite
    differences of ``f`` alone.
    """
    rr = sp.Symbol("r", positive=True)
    th = sp.symbols(f"th1:{n}")
    x = (rr,) + th
    phi = sp.Function("phi")(rr)
    diag = [sp.Integer(1)]
    w = phi ** 2
    for k in range(n - 1):
        diag.append(w)
        w = w * sp.sin(th[k]) ** 2
    g = sp.diag(*diag)
    ginv = g.inv()
    # Gamma^r_ij, the only component that meets df = f' dr
    gamma_r = sp.Matrix(n, n, lambda i, j: sum(
        ginv[0, d] * (sp.diff(g[d, i], x[j]) + sp.diff(g[d, j], x[i]) - sp.diff(g[i, j], x[d]))
        for d in range(n)) / 2)
    point = {rr: r, **{t: 1.1 for t in th}}
    deriv = {sp.Derivative(phi, rr): profile.dphi(r)}
    gamma_num = np.array(gamma_r.subs(deriv).subs(phi, profile.phi(r)).subs(point),
                         dtype=float)
    g_num = np.array(g.subs(phi, profile.phi(r)).subs(point), dtype=float)
    f1 = (f(r + h) - f(r - h)) / (2 * h)
    f2 = (f(r + h) - 2 * f(r) + f(r - h)) / (h * h)
    hess = -gamma_num * f1
    hess[0, 0] += f2
    return np.linalg.solve(g_num, hess)


@pytest.mark.parametrize("r", [1.0, 0.5, 3.0])
def test_hessian_against_coordinate_finite_differences(smooth4, r):
    mixed = _coordinate_hessian(smooth4.profile, 4, lambda s: smooth4.b(s) ** 2, r)
    eig = np.sort(np.linalg.eigvals(mixed).real)
    ours = hessian_eigen_b2(smooth4, r)
    assert ours.lam_rad == pytest.approx(eig[0], abs=1e-6)
    np.testing.assert_allclose(eig[1:], ours.lam_sph, atol=1e-6)
    trace = np.trace(mixed)
    tf = mixed - trace / 4 * np.eye(4)
    assert ours.tracefree_norm_sq == pytest.approx(np.trace(tf @ tf), abs=1e-6)
    assert ours.laplacian == pytest.approx(trace, abs=1e-6)


def test_hessian_examples(euclid4, cone3):
    h = hessian_eigen_b2(euclid4, 3.0)
    assert h.lam_rad == pytest.approx(2.0, rel=1e-14)
    assert h.lam_sph == pytest.approx(2.0, rel=1e-14)
    assert h.tracefree_norm_sq == 0.0
    for r in (0.1, 1.0, 50.0):
        assert hessian_eigen_b2(cone3, r).tracefree_norm_sq == 0.0


@pytest.mark.parametrize("r", [0.2, 1.0, 3.0, 6.0])
def test_cancellation_free_gap_agrees_with_direct_difference(smooth4, r):
    h = hessian_eigen_b2(smooth4, r)
    assert smooth4.hessian_gap(r) == pytest.approx(h.lam_sph - h.lam_rad, rel=1e-6)


def test_tracefree_resolved_past_underflow(smooth4):
    # the direct difference is pure rounding here, the log form is not
    logs = [smooth4.log_tracefree_norm_sq(r) for r in (50.0, 100.0, 400.0)]
    assert all(np.isfinite(logs)) and logs[0] > logs[1] > logs[2]
    assert logs[2] < math.log(np.finfo(float).tiny)


@settings(max_examples=30, deadline=None)
@given(level=st.floats(min_value=1e-3, max_value=1e3))
def test_b_inverse_roundtrip(smooth4, level):
    r = b_inverse(smooth4, level)
    assert smooth4.b(r) == pytest.approx(level, rel=1e-11)


def test_b_inverse_domain(smooth4):
    with pytest.raises(DomainError):
        b_inverse(smooth4, 0.0)


def test_gradient_estimate_radius(smooth4):
    # |b' - b_inf| < eps for r >= r(eps), with r(eps) shrinking as eps grows
    grid = np.geomspace(0.1, 1e4, 200)
    last = math.inf
    for eps in (1e-6, 1e-4, 1e-2):
        bad = [r for r in grid if abs(smooth4.bp(r) - smooth4.b_inf) >= eps]
        r_eps = max(bad) if bad else 0.0
        assert r_eps <= last
        last = r_eps
