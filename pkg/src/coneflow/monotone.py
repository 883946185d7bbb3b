"""Level-set monotone quantities, the shell inequality, and decay fits.

Values that underflow (the trace-free Hessian decays exponentially on the
smoothed cone) are carried as natural logarithms alongside the plain float,
which is then 0.0.  Fits and monotonicity counts always use the logs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .flow import FLOW_ODE, FlowLine, flow_line, log_sup_log_ratio
from .green import GreenModel, b_inverse
from .numerics import OdeSpec, QuadSpec, log_integrate

LOG_QUAD = QuadSpec(abs_tol=0.0, rel_tol=1e-10)


class DecayFit(NamedTuple):
    exponent: float
    residual: float
    intercept: float
    degenerate: bool

    @classmethod
    def degenerate_fit(cls) -> "DecayFit":
        return cls(math.nan, math.nan, math.nan, True)


def fit_decay(x, y=None, *, log_y=None) -> DecayFit:
    """Least-squares slope of ``log y`` against ``log x``.

    Pass either ``y`` or, for values outside double range, ``log_y``.
    Non-positive ``y`` (``-inf`` logs) are dropped; fewer than three usable
    samples give a degenerate fit.  ``residual`` is the RMS of the fit in log
    coordinates.

    >>> fit_decay([1, 2, 4], [1, 0.25, 0.0625]).exponent
    -2.0
    """
    x = np.asarray(x, dtype=float)
    if log_y is None:
        with np.errstate(divide="ignore"):
            ly = np.log(np.where(np.asarray(y, dtype=float) > 0, y, 0.0))
    else:
        ly = np.asarray(log_y, dtype=float)
    keep = np.isfinite(ly) & (x > 0)
    if keep.sum() < 3:
        return DecayFit.degenerate_fit()
    lx, ly = np.log(x[keep]), ly[keep]
    design = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    rms = float(np.sqrt(np.mean(resid * resid)))
    # snap exact power laws to their slope
    if rms < 1e-12:
        slope = float(np.round(slope, 12))
    return DecayFit(float(slope), rms, float(intercept), False)


@dataclass(frozen=True)
class DecayReport:
    profile: str
    quantity: str
    x: np.ndarray
    values: np.ndarray
    log_values: np.ndarray
    fit: DecayFit
    violations: int
    worst_violation: float
    extra: dict = field(default_factory=dict)

    @property
    def fitted_exponent(self) -> float:
        return self.fit.exponent

    @property
    def degenerate(self) -> bool:
        return self.fit.degenerate

    @property
    def strictly_decreasing(self) -> bool:
        with np.errstate(invalid="ignore"):
            return bool(np.all(np.diff(self.log_values) < 0))


def _violations(log_values: np.ndarray, values: np.ndarray):
    with np.errstate(invalid="ignore"):
        increases = np.diff(log_values) > 0
    if not increases.any():
        return 0, 0.0
    return int(increases.sum()), float(np.max(np.diff(values)[increases], initial=0.0))


def _report(model: GreenModel, quantity: str, x, log_values, fit_x=None) -> DecayReport:
    log_values = np.asarray(log_values, dtype=float)
    values = np.exp(log_values)
    x = np.asarray(x, dtype=float)
    # exact fixed points give log = -inf; tiny resolved values still get fitted
    if not np.any(np.isfinite(log_values)):
        fit = DecayFit.degenerate_fit()
    else:
        fit = fit_decay(x if fit_x is None else fit_x, log_y=log_values)
    count, worst = _violations(log_values, values)
    return DecayReport(model.manifold.label, quantity, x, values, log_values, fit, count, worst)


def area_and_A(model: GreenModel, r: float):
    """Area of ``{b = r}`` and ``A(r) = r^(1-n) int_{b=r} |grad b|^3``."""
    rb = b_inverse(model, r)
    n = model.n
    area = model.manifold.sphere_area * model.profile.phi(rb) ** (n - 1)
    return area, r ** (1 - n) * area * model.bp(rb) ** 3


def _log_weighted_tracefree(model: GreenModel, s: float) -> float:
    """``log(b^-n |Hess b^2 - Lap b^2/n g|^2 phi^(n-1))`` at radius ``s``."""
    log_tf = model.log_tracefree_norm_sq(s)
    if log_tf == -math.inf:
        return -math.inf
    n = model.n
    return -n * math.log(model.b(s)) + log_tf + (n - 1) * math.log(model.profile.phi(s))


def log_shell_integral(model: GreenModel, lower: float, upper: float = math.inf) -> float:
    """``log int b^-n |trace-free Hess b^2|^2 dvol`` over the shell ``[lower, upper]``."""
    log_int = log_integrate(lambda s: _log_weighted_tracefree(model, s), lower, upper,
                            LOG_QUAD, scale=0.25 * model.profile.a)
    if log_int == -math.inf:
        return -math.inf
    return math.log(model.manifold.sphere_area) + log_int


def log_hess_weighted_integral(model: GreenModel, r: float) -> float:
    return log_shell_integral(model, b_inverse(model, r))


def hess_weighted_integral(model: GreenModel, r: float) -> float:
    """``H(r) = int_{b >= r} b^-n |Hess b^2 - (Lap b^2 / n) g|^2``.

    The integrand decays exponentially on the smoothed cone, so the range is
    truncated once it falls 1e-17 below its peak.  Underflows to 0.0 for
    large ``r``; :func:`log_hess_weighted_integral` keeps the digits.
    """
    return math.exp(log_hess_weighted_integral(model, r))


class Prop26Result(NamedTuple):
    lhs: float
    rhs: float
    satisfied: bool
    log_lhs: float
    log_rhs: float


def prop26_check(model: GreenModel, r: float, s: float, t: float,
                 line: Optional[FlowLine] = None, ode: OdeSpec = FLOW_ODE) -> Prop26Result:
    """Compare the metric change between times ``s < t`` with the shell bound.

    ``lhs`` is :func:`~coneflow.flow.sup_log_ratio` at ``b^-1(r)``.  ``rhs`` is
    ``sqrt(t-s) (2 r^(n-1) / Area{b=r} * (1/b'(b^-1 r)) * I)^(1/2)`` with ``I``
    the weighted trace-free integral over the swept shell ``[R(s), R(t)]``.
    ``satisfied`` is ``lhs <= rhs + 1e-9``; the log fields allow a strict
    comparison when both sides are tiny.
    """
    if not 0 < s < t:
        raise ValueError(f"need 0 < s < t, got s={s!r}, t={t!r}")
    rb = b_inverse(model, r)
    if line is None or line.r0 != rb or line.t_max < t:
        line = flow_line(model, rb, t, ode)
    log_lhs = log_sup_log_ratio(model, rb, s, t, line)
    area, _ = area_and_A(model, r)
    shell = log_shell_integral(model, float(line.R(s)), float(line.R(t)))
    if shell == -math.inf:
        log_rhs = -math.inf
    else:
        n = model.n
        log_rhs = 0.5 * math.log(t - s) + 0.5 * (
            math.log(2.0) + (n - 1) * math.log(r) - math.log(area)
            - math.log(model.bp(rb)) + shell)
    lhs, rhs = math.exp(log_lhs), math.exp(log_rhs)
    return Prop26Result(lhs, rhs, lhs <= rhs + 1e-9, log_lhs, log_rhs)


def main_theorem_table(model: GreenModel, r: float, t_grid: Sequence[float],
                       T: float, ode: OdeSpec = FLOW_ODE) -> DecayReport:
    """``sup_v |log g(T)(v,v)/g(t)(v,v)|`` on the level ``{b = r}`` for each ``t``.

    By symmetry the level-set average equals the value at one base point.
    The fitted exponent is the slope of ``log lhs`` against ``log t``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0) or not t_grid[-1] < T:
        raise ValueError("t_grid must be increasing with max(t_grid) < T")
    rb = b_inverse(model, r)
    line = flow_line(model, rb, T, ode)
    logs = [log_sup_log_ratio(model, rb, float(t), T, line) for t in t_grid]
    report = _report(model, "main_lhs", t_grid, logs)
    report.extra.update(r=r, base_radius=rb, T=T, line=line)
    return report


def loj_decay_table(model: GreenModel, r_grid: Sequence[float], s_base: float) -> DecayReport:
    """``H(r)`` against ``log(r / s_base)``; the exponent fits ``log H`` vs ``log log``."""
    r_grid = np.asarray(r_grid, dtype=float)
    if np.any(np.diff(r_grid) <= 0) or not r_grid[0] > s_base:
        raise ValueError("r_grid must be increasing and above s_base")
    log_ratio = np.log(r_grid / s_base)
    logs = [log_hess_weighted_integral(model, float(r)) for r in r_grid]
    report = _report(model, "H", log_ratio, logs)
    report.extra.update(r=r_grid, s_base=s_base)
    return report


def gradient_radius(model: GreenModel, grid: Sequence[float], eps_rel: float = 0.01) -> float:
    """Smallest grid radius with ``|b' - b_inf| < eps_rel * b_inf`` from there on."""
    grid = sorted(float(r) for r in grid)
    ok = [abs(model.bp(r) - model.b_inf) < eps_rel * model.b_inf for r in grid]
    for i, r in enumerate(grid):
        if all(ok[i:]):
            return r
    return math.inf
