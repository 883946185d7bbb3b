"""Green function and the function ``b = G^(1/(2-n))`` on a model manifold.

With pole at the tip, the minimal positive Green function normalized so that
``G = r^(2-n)`` on flat space is

    G(r) = (n - 2) * integral_r^inf phi(s)^(1-n) ds,

whose flux through every geodesic sphere is ``-n (n-2) omega_n``.  Its first
two derivatives are closed form, and so are those of ``b`` by the chain rule.
``b`` then satisfies ``b' phi^(n-1) = b^(n-1)`` identically.

Hessian of a radial function
----------------------------
For ``f(r)`` on ``dr^2 + phi^2 g_S`` the Hessian is diagonal in the
radial/spherical frame with eigenvalues ``f''`` (once) and ``f' phi'/phi``
(``n-1`` times), since ``Gamma^r_{ij} = -phi phi' (g_S)_{ij}`` on the sphere
factor.  For ``f = b^2`` the gap between them can be rewritten without
cancellation as

    lam_sph - lam_rad = 2n b b' K / (G phi),
    K(r) = (n - 2) * integral_r^inf phi(s)^(1-n) (phi'(r) - phi'(s)) ds,

using ``phi(r)^(2-n) = (n-2) int_r^inf phi^(1-n) phi'``.  ``K >= 0`` on concave
profiles and vanishes identically on cones.  Working with ``log K`` keeps the
trace-free Hessian resolvable far past the point where it drops below the
smallest double.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize

from .numerics import (DEFAULT_QUAD, PowerTail, QuadSpec, integrate_to_infinity)
from .warp import DomainError, ModelManifold, asymptotic_volume_ratio

POLE_CUTOFF = 1e-8  # in units of the profile scale a
B_INF_TOLERANCE = 1e-6


class GreenConstructionError(ValueError):
    """The profile does not admit a Green function with a conical tail."""


class ModelInconsistencyError(RuntimeError):
    """Independent routes to the same quantity disagree."""


class RadialValues(NamedTuple):
    G: float
    Gp: float
    Gpp: float
    b: float
    bp: float
    bpp: float


class HessianEigen(NamedTuple):
    lam_rad: float
    lam_sph: float
    laplacian: float
    tracefree_norm_sq: float


@dataclass(frozen=True)
class GreenModel:
    manifold: ModelManifold
    quad: QuadSpec = DEFAULT_QUAD
    b_inf: float = math.nan

    @property
    def n(self) -> int:
        return self.manifold.n

    @property
    def profile(self):
        return self.manifold.profile

    @property
    def pole_cutoff(self) -> float:
        return POLE_CUTOFF * self.profile.a

    @property
    def tail(self) -> PowerTail:
        alpha, c = self.profile.asymptote()
        n = self.n
        return PowerTail(alpha ** (1 - n), n - 1.0, c / alpha)

    @property
    def exactly_conical(self) -> bool:
        return self.profile.tail_onset == 0.0

    def _check(self, r: float) -> None:
        if not r >= self.pole_cutoff:
            raise DomainError(f"radius {r!r} is below the pole cutoff {self.pole_cutoff:g}")

    def radial(self, r: float) -> RadialValues:
        self._check(r)
        return _radial_values(self, float(r))

    def G(self, r):
        return self.radial(r).G

    def Gp(self, r):
        return self.radial(r).Gp

    def Gpp(self, r):
        return self.radial(r).Gpp

    def b(self, r):
        return self.radial(r).b

    def bp(self, r):
        return self.radial(r).bp

    def bpp(self, r):
        return self.radial(r).bpp

    def log_slope_defect(self, r: float) -> float:
        """``log K(r)``; ``-inf`` on exact cones."""
        self._check(r)
        return _log_slope_defect(self, float(r))

    def log_hessian_gap(self, r: float) -> float:
        """``log(lam_sph - lam_rad)`` for the Hessian of ``b^2`` at ``r``."""
        log_k = self.log_slope_defect(r)
        if log_k == -math.inf:
            return -math.inf
        v = self.radial(r)
        phi = self.profile.phi(r)
        return (math.log(2 * self.n) + math.log(v.b) + math.log(v.bp) + log_k
                - math.log(v.G) - math.log(phi))

    def hessian_gap(self, r: float) -> float:
        return math.exp(self.log_hessian_gap(r))

    def log_tracefree_norm_sq(self, r: float) -> float:
        gap = self.log_hessian_gap(r)
        if gap == -math.inf:
            return -math.inf
        return math.log((self.n - 1) / self.n) + 2.0 * gap


def _head_quad(model: GreenModel, tail_radius: float) -> QuadSpec:
    return replace(model.quad, tail_radius=tail_radius)


@functools.lru_cache(maxsize=65536)
def _radial_values(model: GreenModel, r: float) -> RadialValues:
    p, n = model.profile, model.n
    phi = p.phi(r)
    if model.exactly_conical:
        integral = model.tail.integral_from(r)
    else:
        split = max(model.quad.tail_radius, p.tail_onset)
        # log variable: phi^(1-n) ~ s^(1-n) spans many decades near the pole
        integral = integrate_to_infinity(lambda s: p.phi(s) ** (1 - n), r, model.tail,
                                         _head_quad(model, split), log_variable=True)
    G = (n - 2) * integral
    Gp = -(n - 2) * phi ** (1 - n)
    Gpp = (n - 2) * (n - 1) * phi ** (-n) * p.dphi(r)
    k = 1.0 / (2 - n)
    b = G ** k
    bp = k * G ** (k - 1) * Gp
    bpp = k * (k - 1) * G ** (k - 2) * Gp * Gp + k * G ** (k - 1) * Gpp
    return RadialValues(G, Gp, Gpp, b, bp, bpp)


@functools.lru_cache(maxsize=65536)
def _log_slope_defect(model: GreenModel, r: float) -> float:
    p, n = model.profile, model.n
    le_r = p.log_slope_excess(r)
    if le_r == -math.inf:
        return -math.inf

    def integrand(d):
        return p.phi(r + d) ** (1 - n) * p.slope_drop(r, d)

    # past r + tail_onset the excess ratio is < 1e-17 and phi is affine
    spec = _head_quad(model, max(r + p.tail_onset, p.tail_onset))
    spec = replace(spec, abs_tol=0.0, rel_tol=spec.rel_tol or 1e-10)
    integral = integrate_to_infinity(integrand, r, model.tail, spec, log_variable=True,
                                     offset=True)
    return le_r + math.log((n - 2) * integral)


def build_green(manifold: ModelManifold, quad: QuadSpec = DEFAULT_QUAD) -> GreenModel:
    """Green function, ``b`` and ``b_inf`` for ``manifold`` with pole at the tip."""
    asym = manifold.profile.asymptote()
    if asym is None or not asym[0] > 0:
        raise GreenConstructionError(
            f"{manifold.label} is not asymptotically conical; "
            "the Green integral of phi^(1-n) diverges")
    model = GreenModel(manifold, quad)
    return replace(model, b_inf=b_infinity(model))


def b_infinity(model: GreenModel) -> float:
    """Asymptotic gradient ``|grad b| -> b_inf``, computed two ways.

    Route A is ``V_M^(1/(n-2))`` with ``V_M`` the asymptotic volume ratio;
    route B is ``b'`` evaluated at ``1e4 * a``.  Returns route A and raises
    :class:`ModelInconsistencyError` if the routes differ by more than 1e-6.
    """
    route_a = asymptotic_volume_ratio(model.manifold) ** (1.0 / (model.n - 2))
    route_b = model.bp(1e4 * model.profile.a)
    if abs(route_a - route_b) > B_INF_TOLERANCE:
        raise ModelInconsistencyError(
            f"b_inf routes disagree: volume {route_a:.12g} vs gradient {route_b:.12g}")
    return route_a


def b_inverse(model: GreenModel, level: float, rtol: float = 1e-12) -> float:
    """Geodesic radius ``r`` with ``b(r) = level`` (bracketed root find)."""
    if not level > 0:
        raise DomainError(f"level {level!r} is not in the range of b")
    lo, hi = level, level / model.b_inf if model.b_inf > 0 else 2 * level
    lo = max(lo * 0.5, model.pole_cutoff)
    for _ in range(200):
        if model.b(lo) <= level:
            break
        if lo <= model.pole_cutoff:
            raise DomainError(f"level {level!r} lies inside the pole cutoff")
        lo = max(lo * 0.5, model.pole_cutoff)
    while model.b(hi) < level:
        hi *= 2.0
    if model.b(lo) == level:
        return lo
    return optimize.brentq(lambda x: model.b(x) - level, lo, hi,
                           xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps),
                           maxiter=500)


def hessian_eigen_b2(model: GreenModel, r: float) -> HessianEigen:
    """Eigen-decomposition of ``Hess b^2`` at radius ``r``.

    The trace-free norm is ``((n-1)/n) (lam_rad - lam_sph)^2``, with the gap
    taken from the cancellation-free slope-defect formula.
    """
    v = model.radial(r)
    p, n = model.profile, model.n
    lam_rad = 2.0 * v.bp * v.bp + 2.0 * v.b * v.bpp
    lam_sph = 2.0 * v.b * v.bp * p.dphi(r) / p.phi(r)
    laplacian = lam_rad + (n - 1) * lam_sph
    log_tf = model.log_tracefree_norm_sq(r)
    tracefree = 0.0 if log_tf == -math.inf else math.exp(log_tf)
    return HessianEigen(lam_rad, lam_sph, laplacian, tracefree)


@dataclass(frozen=True)
class IdentityReport:
    r: np.ndarray
    laplace_residual: np.ndarray
    flux_residual: np.ndarray
    msy_ratio: np.ndarray

    @property
    def max_laplace(self) -> float:
        return float(np.max(self.laplace_residual))

    @property
    def max_flux(self) -> float:
        return float(np.max(self.flux_residual))

    @property
    def msy_bounds(self):
        """Empirical ``(C1, C2)`` with ``C1 r^(2-n) <= G <= C2 r^(2-n)`` on the grid."""
        return float(np.min(self.msy_ratio)), float(np.max(self.msy_ratio))


def identity_residuals(model: GreenModel, r_grid: Sequence[float]) -> IdentityReport:
    """Pointwise residuals of ``Lap b^2 = 2n |grad b|^2`` and the flux identity.

    ``flux_residual`` is relative, ``|b' phi^(n-1) / b^(n-1) - 1|``: both
    sides grow like ``r^(n-1)``.  ``msy_ratio`` is ``G r^(n-2)``.
    """
    n, p = model.n, model.profile
    rows = []
    for r in r_grid:
        v = model.radial(r)
        phi, dphi = p.phi(r), p.dphi(r)
        d1 = 2.0 * v.b * v.bp
        d2 = 2.0 * v.bp * v.bp + 2.0 * v.b * v.bpp
        laplace = abs(d2 + (n - 1) * dphi / phi * d1 - 2 * n * v.bp * v.bp)
        flux = abs(v.bp * phi ** (n - 1) / v.b ** (n - 1) - 1.0)
        rows.append((r, laplace, flux, v.G * r ** (n - 2)))
    arr = np.array(rows, dtype=float).reshape(-1, 4)
    return IdentityReport(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])
