"""Quadrature on half-lines and an adaptive Dormand-Prince integrator.

Every radial quantity in this package is either an improper integral over
``[r, inf)`` of a function with a known power-law tail, or the solution of a
small non-stiff ODE along a flow line.  The two entry points are
:func:`integrate_to_infinity` and :func:`solve_ode`.

The head of an improper integral is handed to QUADPACK (``scipy.integrate.quad``);
the tail past ``QuadSpec.tail_radius`` is evaluated in closed form from a
:class:`PowerTail` descriptor.  The ODE solver is a Dormand-Prince 5(4) pair
with a proportional-integral step controller and the usual quartic dense
output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate


class DivergenceError(ValueError):
    """The integrand does not decay fast enough for the integral to exist."""


class AccuracyError(RuntimeError):
    """Quadrature stopped before reaching the requested tolerance."""


class IntegrationFailure(RuntimeError):
    """The ODE step size collapsed; ``t_last`` is the last accepted time."""

    def __init__(self, message: str, t_last: float):
        super().__init__(f"{message} (last valid t = {t_last!r})")
        self.t_last = t_last


@dataclass(frozen=True)
class QuadSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    tail_radius: float = 50.0
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0 or not self.abs_tol + self.rel_tol > 0:
            raise ValueError("QuadSpec needs abs_tol, rel_tol >= 0 with abs_tol + rel_tol > 0")
        if not self.tail_radius > 0:
            raise ValueError("QuadSpec.tail_radius must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("QuadSpec.max_subdivisions must be at least 1")


@dataclass(frozen=True)
class OdeSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    dense_output: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("OdeSpec tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("OdeSpec.max_step must be positive")


DEFAULT_QUAD = QuadSpec()
DEFAULT_ODE = OdeSpec()


@dataclass(frozen=True)
class PowerTail:
    """Asymptotic form ``coef * (s + offset) ** (-power)`` of an integrand.

    A conical warp ``phi(s) = alpha * s + c`` gives ``phi ** (1 - n)`` the tail
    ``PowerTail(alpha ** (1 - n), n - 1, c / alpha)``.
    """

    coef: float
    power: float
    offset: float = 0.0

    def __call__(self, s: float) -> float:
        return self.coef * (s + self.offset) ** (-self.power)

    def integral_from(self, lower: float) -> float:
        if self.power <= 1.0:
            raise DivergenceError(
                f"tail ~ s^-{self.power:g} does not decay faster than 1/s")
        return self.coef * (lower + self.offset) ** (1.0 - self.power) / (self.power - 1.0)


def conical_tail(coef: float, n: int) -> PowerTail:
    """Tail ``coef * s ** (1 - n)`` of a Green integrand on an n-dimensional cone."""
    return PowerTail(coef, n - 1.0)


def integrate_interval(f: Callable[[float], float], a: float, b: float,
                       spec: QuadSpec = DEFAULT_QUAD, log_variable: bool = False,
                       offset: bool = False) -> float:
    """Plain adaptive Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    With ``log_variable`` the integral is taken in ``u = log(s / a)``, which
    flattens integrands that behave like a negative power of ``s`` near a
    small positive ``a``.  With ``offset`` the integrand is called with
    ``s - a`` instead of ``s``; in the log variable that offset is
    ``a expm1(u)``, exact even when ``b - a`` is far below ``a``.
    """
    if a == b:
        return 0.0
    if log_variable:
        if not 0 < a < b:
            raise ValueError("log_variable needs 0 < a < b")
        point = math.expm1 if offset else math.exp
        return integrate_interval(lambda u: f(a * point(u)) * a * math.exp(u),
                                  0.0, math.log1p((b - a) / a), spec)
    if offset:
        return integrate_interval(f, 0.0, b - a, spec)
    try:
        out = integrate.quad(f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                             limit=spec.max_subdivisions, full_output=1)
    except ValueError as exc:  # tolerances below what QUADPACK accepts
        raise AccuracyError(str(exc)) from exc
    if len(out) > 3:
        message = out[3].split("\n")[0].strip()
        if "diverg" in message.lower():
            raise DivergenceError(message)
        raise AccuracyError(f"quadrature on [{a:g}, {b:g}] failed: {message}")
    value = out[0]
    if not math.isfinite(value):
        raise DivergenceError(f"non-finite quadrature result on [{a:g}, {b:g}]")
    return value


def integrate_to_infinity(integrand: Callable[[float], float], lower: float,
                          tail: Optional[PowerTail], spec: QuadSpec = DEFAULT_QUAD,
                          tail_check: float = 1e-6, log_variable: bool = False,
                          offset: bool = False) -> float:
    """Integrate ``integrand`` over ``[lower, inf)``.

    The range is split at ``max(lower, spec.tail_radius)``.  The head goes to
    adaptive quadrature and the rest is ``tail.integral_from(split)``.  With
    ``tail=None`` the integrand is taken to be negligible past the split.

    ``tail_check`` guards against a descriptor that does not describe the
    integrand: at the split point the two must agree to that relative
    tolerance.  ``log_variable`` and ``offset`` are passed on to the head
    quadrature; with ``offset`` the integrand takes ``s - lower``.
    """
    if tail is not None and tail.power <= 1.0:
        raise DivergenceError(
            f"integrand ~ s^-{tail.power:g} does not decay faster than 1/s")
    split = max(lower, spec.tail_radius)
    head = (integrate_interval(integrand, lower, split, spec, log_variable, offset)
            if split > lower else 0.0)
    if tail is None:
        return head
    expected = tail(split)
    actual = integrand(split - lower if offset else split)
    if abs(actual - expected) > tail_check * abs(expected):
        raise DivergenceError(
            f"integrand does not follow its tail at s={split:g}: "
            f"{actual:.6g} vs tail {expected:.6g}")
    return head + tail.integral_from(split)


def log_integrate(log_f: Callable[[float], float], lower: float, upper: float = math.inf,
                  spec: QuadSpec = DEFAULT_QUAD, scale: float = 1.0,
                  floor: float = 1e-17) -> float:
    """Return ``log`` of the integral of ``exp(log_f)`` over ``[lower, upper]``.

    Meant for integrands that decay (at least eventually) exponentially and may
    sit far below the smallest double.  The integrand is rescaled by its
    running maximum; the range is truncated where it has dropped below
    ``floor`` times that maximum, scanning outwards in steps that start at
    ``scale`` and grow geometrically.  Returns ``-inf`` for an integrand that
    vanishes identically at ``lower``.

    ``log_f`` itself carries a rounding error near ``eps * |log_f|``, so the
    relative tolerance is never tighter than that.  The returned log keeps
    its full relative precision.
    """
    if upper <= lower:
        return -math.inf
    peak = log_f(lower)
    if peak == -math.inf:
        return -math.inf
    drop = math.log(floor)
    x, step = lower, scale
    for _ in range(400):
        x = min(upper, x + step)
        value = log_f(x)
        peak = max(peak, value)
        if x >= upper or value - peak < drop:
            break
        step *= 1.25
    else:
        raise AccuracyError("log-integrand does not decay; cannot truncate its range")
    cut = x
    noise = 16.0 * np.finfo(float).eps * abs(peak)
    if noise > spec.rel_tol:
        spec = replace(spec, rel_tol=noise)
    total = integrate_interval(lambda s: math.exp(log_f(s) - peak), lower, cut, spec)
    if total <= 0.0:
        return -math.inf
    return peak + math.log(total)


# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# Quartic continuous extension: y(t + theta h) = y + h K^T P [theta, .., theta^4].
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

# PI controller constants (Hairer, Norsett & Wanner, DOPRI5).
_SAFETY = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0
_MAX_STEPS = 200_000


class Trajectory:
    """Accepted steps of :func:`solve_ode` plus the dense interpolant.

    Calling the trajectory at a time in ``t_span`` returns the state there.
    Accepted step times return the stored step values bit-for-bit.
    """

    def __init__(self, t: np.ndarray, y: np.ndarray, q: Optional[np.ndarray]):
        self.t = t
        self.y = y
        self._q = q
        self.t_span = (float(t[0]), float(t[-1]))
        self._forward = t[-1] >= t[0]
        self.t.setflags(write=False)
        self.y.setflags(write=False)

    @property
    def n_steps(self) -> int:
        return len(self.t) - 1

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = min(self.t_span), max(self.t_span)
        if np.any(ts < lo - 1e-12 * max(1.0, abs(lo))) or np.any(ts > hi + 1e-12 * max(1.0, abs(hi))):
            raise ValueError(f"t outside the integrated span {self.t_span}")
        key = self.t if self._forward else -self.t
        tk = ts if self._forward else -ts
        idx = np.clip(np.searchsorted(key, tk, side="right") - 1, 0, self.n_steps - 1)
        out = np.empty((len(ts), self.y.shape[1]))
        for j, (i, tj) in enumerate(zip(idx, ts)):
            if tj == self.t[i]:
                out[j] = self.y[i]
            elif tj == self.t[i + 1]:
                out[j] = self.y[i + 1]
            else:
                if self._q is None:
                    raise ValueError("trajectory was built without dense output")
                h = self.t[i + 1] - self.t[i]
                theta = (tj - self.t[i]) / h
                powers = theta ** np.arange(1, 5)
                out[j] = self.y[i] + h * (self._q[i] @ powers)
        return out[0] if scalar else out


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def _initial_step(f, t0, y0, f0, direction, spec, order=5):
    scale = spec.abs_tol + spec.rel_tol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = np.asarray(f(t0 + direction * h0, y1), dtype=float)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, 1e-3 * h0)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / order)
    return min(100 * h0, h1, spec.max_step)


def solve_ode(vector_field: Callable[[float, np.ndarray], np.ndarray], y0, t_span,
              spec: OdeSpec = DEFAULT_ODE) -> Trajectory:
    """Integrate ``y' = vector_field(t, y)`` over ``t_span`` with DOPRI5.

    The step controller is the PI rule of Gustafsson as used in Hairer's
    DOPRI5; errors are measured in the RMS norm scaled by
    ``abs_tol + rel_tol * |y|``.  The final step lands exactly on
    ``t_span[1]``.  ``t_span`` may run backwards.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    y = np.array(y0, dtype=float).ravel()
    if t1 == t0:
        return Trajectory(np.array([t0]), y[None, :].copy(), None)
    direction = 1.0 if t1 > t0 else -1.0
    dim = y.size
    k = np.empty((7, dim))
    k[0] = vector_field(t0, y)
    if not np.all(np.isfinite(k[0])):
        raise IntegrationFailure("vector field not finite at the initial state", t0)
    h = _initial_step(vector_field, t0, y, k[0], direction, spec)

    ts, ys, qs = [t0], [y.copy()], []
    t = t0
    fac_old = 1e-4
    rejected = False
    for _ in range(_MAX_STEPS):
        if abs(t1 - t) <= 0.0:
            break
        h = min(h, spec.max_step)
        if h < 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise IntegrationFailure("step size underflow", t)
        last = h >= abs(t1 - t)
        hs = direction * (abs(t1 - t) if last else h)
        for i in range(1, 7):
            yi = y + hs * (_A[i] @ k[:i])
            k[i] = vector_field(t + _C[i] * hs, yi)
        y_new = y + hs * (_B @ k)
        err_vec = hs * (_E @ k)
        scale = spec.abs_tol + spec.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec / scale)
        if not np.isfinite(err) or not np.all(np.isfinite(y_new)):
            h *= _FAC_MIN
            rejected = True
            continue
        fac11 = max(err, 1e-300) ** _EXPO
        if err <= 1.0:
            fac = fac11 / fac_old ** _BETA
            fac = min(1.0 / _FAC_MIN, max(1.0 / _FAC_MAX, fac / _SAFETY))
            h_new = abs(hs) / fac
            if rejected:
                h_new = min(h_new, abs(hs))
            fac_old = max(err, 1e-4)
            if spec.dense_output:
                qs.append(k.T @ _P)
            t = t1 if last else t + hs
            y = y_new
            ts.append(t)
            ys.append(y.copy())
            k[0] = k[6]
            h = h_new
            rejected = False
        else:
            h = abs(hs) / min(1.0 / _FAC_MIN, fac11 / _SAFETY)
            rejected = True
    else:
        raise IntegrationFailure("maximum number of steps exceeded", t)

    q = np.array(qs) if spec.dense_output else None
    return Trajectory(np.array(ts), np.array(ys), q)
