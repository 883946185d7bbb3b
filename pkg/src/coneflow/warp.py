"""Rotationally symmetric model manifolds ``dr^2 + phi(r)^2 g_{S^{n-1}}``.

Three warp profiles are cataloged:

``euclid``         ``phi = r``
``cone``           ``phi = alpha r`` (vertex at the pole)
``smoothed_cone``  ``phi = alpha r + (1 - alpha) a tanh(r / a)``

All are concave with ``alpha <= phi' <= 1``, which makes both Ricci
eigenvalues nonnegative, and all are asymptotic to the affine function
``alpha r + c``.  Past ``tail_onset`` that asymptote is exact to double
precision, which is what lets the Green integrals use a closed-form tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .numerics import DEFAULT_QUAD, QuadSpec, integrate_interval


class DomainError(ValueError):
    """Radius outside the domain of an operation."""


@dataclass(frozen=True)
class WarpProfile:
    """Base class; subclasses provide ``phi`` and its first two derivatives."""

    alpha: float = 1.0
    a: float = 1.0

    name = "abstract"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(
                f"alpha={self.alpha!r} outside (0, 1]: alpha > 1 makes the "
                "tangential Ricci curvature negative (nonnegative Ricci required)")
        if not self.a > 0.0:
            raise ValueError(f"smoothing scale a={self.a!r} must be positive")

    def phi(self, r: float) -> float:
        raise NotImplementedError

    def dphi(self, r: float) -> float:
        raise NotImplementedError

    def ddphi(self, r: float) -> float:
        raise NotImplementedError

    def log_slope_excess(self, r: float) -> float:
        """``log(phi'(r) - alpha)``; ``-inf`` when the slope is already conical."""
        return -math.inf

    def slope_drop(self, r: float, d: float) -> float:
        """``1 - (phi'(r + d) - alpha) / (phi'(r) - alpha)`` for ``d >= 0``.

        Taking the offset ``d`` rather than ``s = r + d`` keeps the value
        accurate when ``d`` is far below ``r``.
        """
        return -math.expm1(self.log_slope_excess(r + d) - self.log_slope_excess(r))

    def asymptote(self) -> Optional[Tuple[float, float]]:
        """``(alpha, c)`` with ``phi(r) = alpha r + c`` for ``r >= tail_onset``."""
        return (self.alpha, 0.0)

    @property
    def tail_onset(self) -> float:
        """Radius past which ``phi`` equals its asymptote to double precision."""
        return 0.0


@dataclass(frozen=True)
class Euclid(WarpProfile):
    name = "euclid"

    def __post_init__(self):
        super().__post_init__()
        if self.alpha != 1.0:
            raise ValueError("euclid profile has alpha = 1")

    def phi(self, r):
        return r

    def dphi(self, r):
        return 1.0

    def ddphi(self, r):
        return 0.0


@dataclass(frozen=True)
class Cone(WarpProfile):
    name = "cone"

    def phi(self, r):
        return self.alpha * r

    def dphi(self, r):
        return self.alpha

    def ddphi(self, r):
        return 0.0


def _log_cosh(x: float) -> float:
    x = abs(x)
    if x < 1.0:
        # cosh x - 1 = 2 sinh(x/2)^2 keeps full relative accuracy near 0
        return math.log1p(2.0 * math.sinh(0.5 * x) ** 2)
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


@dataclass(frozen=True)
class SmoothedCone(WarpProfile):
    name = "smoothed_cone"

    def phi(self, r):
        return self.alpha * r + (1.0 - self.alpha) * self.a * math.tanh(r / self.a)

    def dphi(self, r):
        sech = 1.0 / math.cosh(r / self.a) if r / self.a < 700 else 0.0
        return self.alpha + (1.0 - self.alpha) * sech * sech

    def ddphi(self, r):
        x = r / self.a
        sech = 1.0 / math.cosh(x) if x < 700 else 0.0
        return -2.0 * (1.0 - self.alpha) / self.a * sech * sech * math.tanh(x)

    def log_slope_excess(self, r):
        if self.alpha == 1.0:
            return -math.inf
        return math.log(1.0 - self.alpha) - 2.0 * _log_cosh(r / self.a)

    def slope_drop(self, r, d):
        x, delta = r / self.a, d / self.a
        y = x + delta
        if y < 20.0:
            # 1 - cosh(x)^2 / cosh(y)^2, free of cancellation for y near x
            return math.sinh(delta) * math.sinh(2.0 * x + delta) / math.cosh(y) ** 2
        if x >= 20.0:
            # log cosh(y) - log cosh(x) = delta to double precision
            return -math.expm1(-2.0 * delta)
        return -math.expm1(-2.0 * (_log_cosh(y) - _log_cosh(x)))

    def asymptote(self):
        return (self.alpha, (1.0 - self.alpha) * self.a)

    @property
    def tail_onset(self):
        # 1 - tanh(x) < 1e-17 for x > 20
        return 20.0 * self.a


PROFILES = {cls.name: cls for cls in (Euclid, Cone, SmoothedCone)}


@dataclass(frozen=True)
class ModelManifold:
    n: int
    profile: WarpProfile

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"dimension n={self.n!r} must be an integer >= 3")

    @property
    def omega_n(self) -> float:
        """Volume of the unit n-ball."""
        return math.pi ** (self.n / 2) / math.gamma(self.n / 2 + 1)

    @property
    def sphere_area(self) -> float:
        """Area of the unit (n-1)-sphere, ``n * omega_n``."""
        return self.n * self.omega_n

    @property
    def label(self) -> str:
        p = self.profile
        return f"{p.name}(n={self.n}, alpha={p.alpha:g}, a={p.a:g})"


def make_profile(name: str, n: int, alpha: Optional[float] = None,
                 a: float = 1.0) -> ModelManifold:
    """Build a cataloged model manifold by name.

    >>> make_profile("cone", 3, alpha=0.5).profile.phi(2.0)
    1.0
    """
    try:
        cls = PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None
    if alpha is None:
        alpha = 1.0 if name == "euclid" else 0.5
    return ModelManifold(int(n), cls(alpha=float(alpha), a=float(a)))


def ricci_eigenvalues(manifold: ModelManifold, r: float) -> Tuple[float, float]:
    """Ricci eigenvalues ``(radial, spherical)`` at radius ``r``.

    For ``dr^2 + phi^2 g_S`` the radial direction has ``-(n-1) phi''/phi`` and
    each of the ``n-1`` spherical directions has
    ``-phi''/phi + (n-2)(1 - phi'^2)/phi^2``.
    """
    if not r > 0:
        raise DomainError(f"ricci_eigenvalues needs r > 0, got {r!r}")
    p, n = manifold.profile, manifold.n
    f, df, ddf = p.phi(r), p.dphi(r), p.ddphi(r)
    ric_rad = -(n - 1) * ddf / f
    ric_sph = -ddf / f + (n - 2) * (1.0 - df * df) / (f * f)
    return ric_rad, ric_sph


def ball_volume(manifold: ModelManifold, r: float, spec: QuadSpec = DEFAULT_QUAD) -> float:
    p, n = manifold.profile, manifold.n
    if isinstance(p, (Euclid, Cone)):
        return manifold.sphere_area * p.alpha ** (n - 1) * r ** n / n
    return manifold.sphere_area * integrate_interval(lambda s: p.phi(s) ** (n - 1), 0.0, r, spec)


def volume_ratio(manifold: ModelManifold, r: float, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """``vol(B_r(p)) / (omega_n r^n)``; non-increasing, tends to ``alpha^(n-1)``."""
    if not r > 0:
        raise DomainError(f"volume_ratio needs r > 0, got {r!r}")
    tight = QuadSpec(abs_tol=0.0, rel_tol=min(spec.rel_tol, 1e-12),
                     tail_radius=spec.tail_radius, max_subdivisions=spec.max_subdivisions)
    return ball_volume(manifold, r, tight) / (manifold.omega_n * r ** manifold.n)


def asymptotic_volume_ratio(manifold: ModelManifold) -> float:
    """``V_M = lim vol(B_r) / (omega_n r^n) = alpha^(n-1)``."""
    return manifold.profile.alpha ** (manifold.n - 1)
