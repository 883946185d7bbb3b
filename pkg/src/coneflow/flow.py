"""Gradient flow of ``b^2`` and the rescaled metrics ``g(t)``.

By rotational symmetry the flow of ``grad b^2`` moves along radial geodesics,
so a flow line is the scalar ODE ``R' = (b^2)'(R)``.  Its derivative with
respect to the starting radius obeys the variational equation
``J' = (b^2)''(R) J``.

Pull-back of ``g(t) = (b o Phi_t)^-2 Phi_t^* g`` to the base point ``r0``:
``d Phi_t`` maps a unit radial vector to ``J d/dr`` and a unit spherical
vector to a spherical vector of length ``phi(R)/phi(r0)``.  Hence ``g(t)`` is
diagonal in that frame with

    e_rad = J^2 / b(R)^2,    e_sph = phi(R)^2 / (phi(r0)^2 b(R)^2).

Because ``g(t)`` and ``g(T)`` share this eigenframe, the Rayleigh quotient
``g(T)(v,v) / g(t)(v,v)`` is a weighted mean of the two eigenvalue ratios and
its extremes sit on the frame vectors.

Along the flow ``d/dt log e_rad = 2(n-1)/n * D`` and
``d/dt log e_sph = -2/n * D`` with ``D = lam_rad - lam_sph`` the Hessian
gap of ``b^2``.  Substituting ``du = dR / (2 b b')`` and the slope-defect form
of ``D`` gives

    sup_v |log g(T)(v,v)/g(t)(v,v)| = 2 (n-1) int_{R(t)}^{R(T)} K / (G phi) dR,

which :func:`log_sup_log_ratio` evaluates in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .green import GreenModel, hessian_eigen_b2
from .numerics import (OdeSpec, QuadSpec, Trajectory, integrate_interval, log_integrate,
                       solve_ode)
from .warp import DomainError

FLOW_ODE = OdeSpec(rel_tol=1e-12, abs_tol=1e-14)
TRANSPORT_QUAD = QuadSpec(abs_tol=0.0, rel_tol=1e-12)


@dataclass(frozen=True)
class FlowLine:
    r0: float
    t_max: float
    trajectory: Trajectory

    def state(self, t):
        return self.trajectory(t)

    def R(self, t):
        return self.trajectory(t)[..., 0]

    def J(self, t):
        return self.trajectory(t)[..., 1]


class MetricEigen(NamedTuple):
    t: float
    e_rad: float
    e_sph: float


def flow_line(model: GreenModel, r0: float, t_max: float,
              spec: OdeSpec = FLOW_ODE) -> FlowLine:
    """Integrate the flow of ``grad b^2`` and its radial Jacobian from ``r0``.

    Negative ``t_max`` flows towards the pole; the integration fails with
    :class:`~coneflow.numerics.IntegrationFailure` if it reaches the cutoff.
    """
    if not r0 > model.pole_cutoff:
        raise DomainError(f"flow start r0={r0!r} is at or below the pole cutoff")

    def field(t, y):
        R, J = y
        if not R >= model.pole_cutoff:
            return np.array([math.nan, math.nan])
        v = model.radial(R)
        db2 = 2.0 * v.b * v.bp
        ddb2 = 2.0 * v.bp * v.bp + 2.0 * v.b * v.bpp
        return np.array([db2, ddb2 * J])

    traj = solve_ode(field, [r0, 1.0], (0.0, t_max), spec)
    return FlowLine(float(r0), float(t_max), traj)


def _check_time(line: FlowLine, t: float) -> None:
    lo, hi = sorted((0.0, line.t_max))
    if not lo <= t <= hi:
        raise ValueError(f"t={t!r} outside the flow line span [{lo}, {hi}]")


def metric_eigen(model: GreenModel, line: FlowLine, t: float) -> MetricEigen:
    """Eigenvalues of ``g(t)`` on g-unit radial/spherical vectors at ``r0``."""
    _check_time(line, t)
    R, J = (float(v) for v in line.state(t))
    b = model.b(R)
    p = model.profile
    e_rad = J * J / (b * b)
    ratio = p.phi(R) / p.phi(line.r0)
    return MetricEigen(t, e_rad, ratio * ratio / (b * b))


def direct_log_ratios(model: GreenModel, line: FlowLine, t: float, T: float) -> Tuple[float, float]:
    """``(log e_rad(T)/e_rad(t), log e_sph(T)/e_sph(t))`` from the eigenvalues.

    Loses all digits once the ratios are within rounding of 1; see
    :func:`log_sup_log_ratio` for the resolvable form.
    """
    a, b = metric_eigen(model, line, t), metric_eigen(model, line, T)
    return math.log(b.e_rad / a.e_rad), math.log(b.e_sph / a.e_sph)


def _log_gap_rate(model: GreenModel, R: float) -> float:
    """``log(K / (G phi))`` at radius ``R``."""
    log_k = model.log_slope_defect(R)
    if log_k == -math.inf:
        return -math.inf
    return log_k - math.log(model.G(R)) - math.log(model.profile.phi(R))


def log_sup_log_ratio(model: GreenModel, r0: float, t: float, T: float,
                      line: Optional[FlowLine] = None, ode: OdeSpec = FLOW_ODE) -> float:
    """``log`` of :func:`sup_log_ratio`; ``-inf`` when ``g(t)`` does not move."""
    if not 0 < t < T:
        raise ValueError(f"need 0 < t < T, got t={t!r}, T={T!r}")
    if line is None or line.r0 != r0 or line.t_max < T:
        line = flow_line(model, r0, T, ode)
    R_t, R_T = float(line.R(t)), float(line.R(T))
    scale = 0.25 * model.profile.a
    log_int = log_integrate(lambda R: _log_gap_rate(model, R), R_t, R_T,
                            QuadSpec(abs_tol=0.0, rel_tol=1e-10), scale=scale)
    if log_int == -math.inf:
        return -math.inf
    return math.log(2.0 * (model.n - 1)) + log_int


def sup_log_ratio(model: GreenModel, r0: float, t: float, T: float,
                  line: Optional[FlowLine] = None, ode: OdeSpec = FLOW_ODE) -> float:
    """``sup_v |log(g(T)(v,v) / g(t)(v,v))|`` at the base point ``r0``.

    The supremum is attained on the radial eigenvector (the radial log-rate is
    ``n-1`` times the spherical one).  Underflows to 0.0 beyond double range;
    use :func:`log_sup_log_ratio` there.
    """
    return math.exp(log_sup_log_ratio(model, r0, t, T, line, ode))


def check_gprime(model: GreenModel, r0: float, t: float, h: float,
                 line: Optional[FlowLine] = None, ode: OdeSpec = FLOW_ODE) -> Tuple[float, float]:
    """Centered-difference ``d/dt e`` versus the trace-free Hessian formula.

    Returns ``(radial residual, spherical residual)``; both are ``O(h^2)``.
    """
    if not t - h > 0:
        raise ValueError("check_gprime needs t - h > 0")
    if line is None or line.r0 != r0 or line.t_max < t + h:
        line = flow_line(model, r0, t + h, ode)
    lo, hi = metric_eigen(model, line, t - h), metric_eigen(model, line, t + h)
    fd_rad = (hi.e_rad - lo.e_rad) / (2 * h)
    fd_sph = (hi.e_sph - lo.e_sph) / (2 * h)
    exact_rad, exact_sph = gprime_eigen(model, line, t)
    return float(abs(fd_rad - exact_rad)), float(abs(fd_sph - exact_sph))


def gprime_eigen(model: GreenModel, line: FlowLine, t: float) -> Tuple[float, float]:
    """``2 Phi_t^*[b^-2 (Hess b^2 - Lap b^2 / n g)]`` on the unit frame at ``r0``."""
    R, J = (float(v) for v in line.state(t))
    hess = hessian_eigen_b2(model, R)
    mean = hess.laplacian / model.n
    b = model.b(R)
    p = model.profile
    stretch_sph = (p.phi(R) / p.phi(line.r0)) ** 2
    return (2.0 * J * J * (hess.lam_rad - mean) / (b * b),
            2.0 * stretch_sph * (hess.lam_sph - mean) / (b * b))


def check_transport(model: GreenModel, r0: float, t: float,
                    line: Optional[FlowLine] = None, ode: OdeSpec = FLOW_ODE) -> Tuple[float, float]:
    """Residuals of the two transport identities along the flow from ``r0``.

    1. ``|b(R(t)) - b(r0) exp(int_0^t 2 b'(R(u))^2 du)|``, the exponent by
       quadrature over the dense trajectory.
    2. Relative gap between the warped-product volume distortion
       ``phi(r0)^(n-1) / ((b^2)'(R) phi(R)^(n-1))`` and
       ``b(r0)^(n-1) / (2 b'(r0) b(R)^n)``.  They agree because
       ``(b^2)' phi^(n-1) = 2 b^n`` and ``phi^(n-1) = b^(n-1) / b'``.
    """
    if not t > 0:
        raise ValueError("check_transport needs t > 0")
    if line is None or line.r0 != r0 or line.t_max < t:
        line = flow_line(model, r0, t, ode)
    exponent = integrate_interval(lambda u: 2.0 * model.bp(float(line.R(u))) ** 2,
                                  0.0, t, TRANSPORT_QUAD)
    R = float(line.R(t))
    v0, vR = model.radial(r0), model.radial(R)
    res_b = abs(vR.b - v0.b * math.exp(exponent))
    n, p = model.n, model.profile
    direct = p.phi(r0) ** (n - 1) / (2.0 * vR.b * vR.bp * p.phi(R) ** (n - 1))
    transported = v0.b ** (n - 1) / (2.0 * v0.bp * vR.b ** n)
    res_vol = abs(direct / transported - 1.0)
    return res_b, res_vol


def log_rate_bound(model: GreenModel, line: FlowLine, t: float, h: float) -> Tuple[float, float, float]:
    """Finite-difference ``|d/dt log e_rad|``, ``|d/dt log e_sph|`` and their bound.

    The bound is ``2 |Hess b^2 - Lap b^2/n g|`` at ``R(t)``.
    """
    lo, hi = metric_eigen(model, line, t - h), metric_eigen(model, line, t + h)
    d_rad = abs(math.log(hi.e_rad / lo.e_rad)) / (2 * h)
    d_sph = abs(math.log(hi.e_sph / lo.e_sph)) / (2 * h)
    bound = 2.0 * math.sqrt(hessian_eigen_b2(model, float(line.R(t))).tracefree_norm_sq)
    return d_rad, d_sph, bound
