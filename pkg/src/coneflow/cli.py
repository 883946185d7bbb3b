"""Config-driven experiment runner.

A run file is line oriented ``key = value`` text split into sections::

    [model]
    profile = smoothed_cone
    n = 4
    alpha = 0.5

    [run]
    suites = identities, flow, monotone, decay

    [grids]
    t_grid = log:1:16:5

Keys before the first header belong to ``[model]``.  ``#`` starts a comment.
Grids are ``log:start:stop:count`` (geometric), ``lin:start:stop:count`` or
a comma-separated list.  Radii in ``[grids]`` are geodesic distances from the
pole; level-set checks convert them to levels of ``b``.

``run`` writes one CSV per experiment plus ``report.txt`` with one
``NAME status measured threshold`` line per check.  The process exits 0 iff
no check failed.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import flow, green, monotone, warp
from .numerics import OdeSpec, QuadSpec

SUITES = ("identities", "flow", "monotone", "decay")
DEFAULT_OUT = "coneflow_out"


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


# --------------------------------------------------------------------------
# config

def parse_grid(text: str) -> Tuple[float, ...]:
    """Parse ``log:a:b:k``, ``lin:a:b:k`` or ``x1, x2, ...``.

    >>> parse_grid("log:1:16:5")
    (1.0, 2.0, 4.0, 8.0, 16.0)
    """
    text = text.strip()
    kind, sep, rest = text.partition(":")
    if sep and kind in ("log", "lin"):
        parts = rest.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} needs {kind}:start:stop:count")
        start, stop, count = _number(parts[0]), _number(parts[1]), _count(parts[2])
        if kind == "log":
            if not (start > 0 and stop > 0):
                raise ValueError("log grid endpoints must be positive")
            values = np.geomspace(start, stop, count)
        else:
            values = np.linspace(start, stop, count)
        # 15 digits drops last-ulp noise such as 7.999999999999999
        return tuple(float(f"{v:.15g}") for v in values)
    return _numbers(text)


def _number(text: str) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise ValueError(f"malformed number {text.strip()!r}") from None
    if math.isnan(value):
        raise ValueError("nan is not a valid number")
    return value


def _count(text: str) -> int:
    value = _number(text)
    if value != int(value) or value < 1:
        raise ValueError(f"count {text.strip()!r} must be a positive integer")
    return int(value)


def _numbers(text: str) -> Tuple[float, ...]:
    items = [s for s in (p.strip() for p in text.split(",")) if s]
    if not items:
        raise ValueError("empty list")
    return tuple(_number(s) for s in items)


def _suites(text: str) -> Tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in names if s not in SUITES]
    if bad or not names:
        raise ValueError(f"suites must be drawn from {', '.join(SUITES)}; got {text.strip()!r}")
    return tuple(s for s in SUITES if s in names)


def _word(text: str) -> str:
    if not text or any(c.isspace() for c in text):
        raise ValueError(f"expected a single word, got {text!r}")
    return text


_SCHEMA: Dict[str, Dict[str, Callable[[str], object]]] = {
    "model": {"profile": _word, "n": _count, "alpha": _number, "a": _number},
    "run": {"suites": _suites, "out": str, "seed": _count},
    "grids": {
        "r_grid": parse_grid, "t_grid": parse_grid, "T": _number, "flow_time": _number,
        "main_radius": _number, "area_radii": parse_grid, "loj_radii": parse_grid,
        "loj_base": _number, "prop26_radii": parse_grid, "prop26_s": parse_grid,
        "prop26_dt": parse_grid, "gprime_r0": _number, "gprime_t": _number,
        "gprime_h": _numbers, "rate_bound_samples": _count,
    },
    "quad": {"abs_tol": _number, "rel_tol": _number, "tail_radius": _number,
             "max_subdivisions": _count},
    "ode": {"rel_tol": _number, "abs_tol": _number, "max_step": _number},
    "thresholds": {},  # keys are the check names in CHECK_THRESHOLDS
}


@dataclass(frozen=True)
class Grids:
    r_grid: Tuple[float, ...] = parse_grid("log:0.1:1000:50")
    t_grid: Tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    T: float = 64.0
    flow_time: float = 1.0
    main_radius: float = 10.0
    area_radii: Tuple[float, ...] = parse_grid("log:1:1000:20")
    loj_radii: Tuple[float, ...] = (10.0, 30.0, 100.0, 300.0, 1000.0)
    loj_base: float = 1.0
    prop26_radii: Tuple[float, ...] = (2.0, 5.0, 20.0)
    prop26_s: Tuple[float, ...] = (0.5, 1.0, 2.0)
    prop26_dt: Tuple[float, ...] = (1.0, 2.0, 4.0)
    gprime_r0: float = 1.0
    gprime_t: float = 1.0
    gprime_h: Tuple[float, ...] = (1e-2, 5e-3, 2.5e-3)
    rate_bound_samples: int = 20


@dataclass(frozen=True)
class RunConfig:
    manifold: warp.ModelManifold
    suites: Tuple[str, ...] = SUITES
    grids: Grids = Grids()
    quad: QuadSpec = QuadSpec()
    ode: OdeSpec = flow.FLOW_ODE
    thresholds: Dict[str, float] = field(default_factory=dict)
    out: Optional[str] = None
    seed: int = 12345

    @property
    def profile_name(self) -> str:
        return self.manifold.profile.name


def parse_config(path) -> RunConfig:
    """Read and validate a run file; errors carry ``path:line``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror or exc})") from None
    return parse_config_text(text, str(path))


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    values: Dict[Tuple[str, str], object] = {}
    lines: Dict[Tuple[str, str], int] = {}
    section = "model"

    def fail(lineno, msg):
        raise ConfigError(f"{source}:{lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                fail(lineno, f"malformed section header {line!r}")
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                fail(lineno, f"unknown section [{section}]")
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            fail(lineno, f"expected 'key = value', got {line!r}")
        schema = CHECK_THRESHOLDS if section == "thresholds" else _SCHEMA[section]
        if key not in schema:
            fail(lineno, f"unknown key {key!r} in [{section}]")
        if (section, key) in values:
            fail(lineno, f"duplicate key {key!r} in [{section}] (first on line {lines[section, key]})")
        parse = _number if section == "thresholds" else schema[key]
        try:
            values[section, key] = parse(value)
        except ValueError as exc:
            fail(lineno, f"{key}: {exc}")
        lines[section, key] = lineno

    def where(section, key):
        return f"{source}:{lines.get((section, key), 0)}"

    # model
    model = {k: v for (s, k), v in values.items() if s == "model"}
    name = model.get("profile", "smoothed_cone")
    try:
        manifold = warp.make_profile(name, model.get("n", 4), model.get("alpha"),
                                     model.get("a", 1.0))
    except ValueError as exc:
        key = "alpha" if "alpha" in str(exc) else "a" if "scale" in str(exc) else \
            "n" if "dimension" in str(exc) else "profile"
        raise ConfigError(f"{where('model', key)}: {exc}") from None

    # grids
    grid_kw = {k: v for (s, k), v in values.items() if s == "grids"}
    grids = replace(Grids(), **grid_kw)
    for f in fields(Grids):
        v = getattr(grids, f.name)
        if f.name in ("gprime_h",):
            if len(v) < 2 or any(h <= 0 for h in v) or any(np.diff(v) >= 0):
                raise ConfigError(f"{where('grids', f.name)}: gprime_h must be positive "
                                  "and strictly decreasing with at least two steps")
        elif isinstance(v, tuple):
            if len(v) == 0 or any(np.diff(v) <= 0):
                raise ConfigError(f"{where('grids', f.name)}: {f.name} must be non-empty "
                                  "and strictly increasing")
            if v[0] <= 0:
                raise ConfigError(f"{where('grids', f.name)}: {f.name} must be positive")
        elif isinstance(v, float) and not v > 0:
            raise ConfigError(f"{where('grids', f.name)}: {f.name} must be positive")
    if not grids.T > grids.t_grid[-1]:
        raise ConfigError(f"{where('grids', 'T')}: T={grids.T:g} must exceed "
                          f"max(t_grid)={grids.t_grid[-1]:g}")
    if not grids.loj_radii[0] > grids.loj_base:
        raise ConfigError(f"{where('grids', 'loj_radii')}: loj_radii must lie above loj_base")
    if not grids.gprime_t > grids.gprime_h[0]:
        raise ConfigError(f"{where('grids', 'gprime_t')}: gprime_t must exceed the largest h")

    # tolerances
    try:
        quad = replace(QuadSpec(), **{k: v for (s, k), v in values.items() if s == "quad"})
    except ValueError as exc:
        raise ConfigError(f"{source}: [quad] {exc}") from None
    ode_kw = {k: v for (s, k), v in values.items() if s == "ode"}
    ode = replace(flow.FLOW_ODE, **ode_kw)
    if not (ode.rel_tol >= 0 and ode.abs_tol >= 0 and ode.rel_tol + ode.abs_tol > 0
            and ode.max_step > 0):
        raise ConfigError(f"{source}: [ode] tolerances must be non-negative, not both zero")

    thresholds = {k: v for (s, k), v in values.items() if s == "thresholds"}
    return RunConfig(manifold=manifold,
                     suites=values.get(("run", "suites"), SUITES),
                     grids=grids, quad=quad, ode=ode, thresholds=thresholds,
                     out=values.get(("run", "out")),
                     seed=values.get(("run", "seed"), 12345))


# --------------------------------------------------------------------------
# checks and formatting

# default threshold and comparison for every check
CHECK_THRESHOLDS: Dict[str, Tuple[float, str]] = {
    "ricci_nonnegative": (-1e-12, ">="),
    "b_inf_routes": (1e-6, "<="),
    "laplace_residual": (1e-8, "<="),
    "flux_residual": (1e-10, "<="),
    "msy_lower": (0.0, ">"),
    "transport_b": (1e-7, "<="),
    "transport_volume": (1e-7, "<="),
    "semigroup": (1e-8, "<="),
    "gprime_residual": (1e-5, "<="),
    "gprime_order": (0.5, "<="),
    "rate_bound": (1e-6, "<="),
    "volume_ratio_monotone": (1e-10, "<="),
    "volume_ratio_floor": (-1e-10, ">="),
    "A_monotone": (1e-9, "<="),
    "area_band": (10.0, "<="),
    "H_monotone": (0.0, "<="),
    "prop26": (0.0, "<="),
    "gradient_radius": (math.nan, "<="),  # threshold is the configured main radius
    "main_decay": (0.0, "<"),
    "main_fit_residual": (math.inf, "<="),
    "loj_decay": (math.nan, "<="),  # threshold is -1 + fit residual
    "loj_fit_residual": (math.inf, "<="),
}

_COMPARE = {
    "<=": lambda m, t: m <= t,
    "<": lambda m, t: m < t,
    ">=": lambda m, t: m >= t,
    ">": lambda m, t: m > t,
}


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    measured: float
    threshold: float
    wall_time: float = 0.0
    error: str = ""

    def line(self) -> str:
        return f"{self.name} {self.status} {fmt(self.measured)} {fmt(self.threshold)}"


@dataclass
class SuiteReport:
    checks: List[Check] = field(default_factory=list)
    files: List[Path] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(c.status == "fail" for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def text(self) -> str:
        return "".join(c.line() + "\n" for c in self.checks)


def fmt(x) -> str:
    """17 significant digits, or ``nan``/``inf`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0"  # no negative zero
    return format(x, ".17g")


def fmt_log(log_x: float) -> str:
    """Format ``exp(log_x)`` even when it is outside double range."""
    if log_x == -math.inf:
        return "0"
    if math.isnan(log_x):
        return "nan"
    x = math.exp(log_x)
    if 0.0 < x < math.inf and x >= sys.float_info.min:
        return fmt(x)
    e10 = log_x / math.log(10.0)
    k = math.floor(e10)
    mantissa = 10.0 ** (e10 - k)
    if mantissa >= 10.0:
        mantissa, k = mantissa / 10.0, k + 1
    return f"{mantissa:.16f}e{k:+d}"


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> Path:
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return path


class _Runner:
    def __init__(self, config: RunConfig, out: Optional[Path]):
        self.config = config
        self.out = out
        self.report = SuiteReport()
        self.model: Optional[green.GreenModel] = None

    def threshold(self, name: str, default: Optional[float] = None) -> float:
        if name in self.config.thresholds:
            return self.config.thresholds[name]
        return CHECK_THRESHOLDS[name][0] if default is None else default

    def record(self, name, measured, threshold=None, status=None, started=None):
        threshold = self.threshold(name, threshold)
        if status is None:
            ok = _COMPARE[CHECK_THRESHOLDS[name][1]](measured, threshold)
            status = "pass" if ok else "fail"
        wall = time.perf_counter() - started if started is not None else 0.0
        self.report.checks.append(Check(name, status, float(measured), float(threshold), wall))

    def guarded(self, names: Sequence[str], body: Callable[[], None]) -> None:
        """Run ``body``; any exception marks its not-yet-recorded checks as failed."""
        started = time.perf_counter()
        done = {c.name for c in self.report.checks}
        try:
            body()
        except Exception as exc:  # module errors become failed checks
            msg = f"{type(exc).__name__}: {exc}"
            print(f"error in {', '.join(names)}: {msg}", file=sys.stderr)
            recorded = {c.name for c in self.report.checks} - done
            for name in names:
                if name not in recorded:
                    wall = time.perf_counter() - started
                    self.report.checks.append(Check(name, "fail", math.nan,
                                                    self.threshold(name), wall, msg))

    def csv(self, name, header, rows):
        if self.out is not None:
            self.report.files.append(write_csv(self.out / name, header, rows))

    # -- suites ---------------------------------------------------------------

    def build(self) -> None:
        self.model = green.build_green(self.config.manifold, self.config.quad)

    def identities(self) -> None:
        cfg, g = self.config, self.config.grids
        started = time.perf_counter()
        manifold = cfg.manifold
        ric = min(min(warp.ricci_eigenvalues(manifold, r)) for r in g.r_grid)
        self.record("ricci_nonnegative", ric, started=started)

        def routes():
            model = green.GreenModel(manifold, cfg.quad)
            route_a = warp.asymptotic_volume_ratio(manifold) ** (1.0 / (manifold.n - 2))
            route_b = model.bp(1e4 * manifold.profile.a)
            self.record("b_inf_routes", abs(route_a - route_b), started=started)
        self.guarded(["b_inf_routes"], routes)

        self.build()
        rep = green.identity_residuals(self.model, g.r_grid)
        self.record("laplace_residual", rep.max_laplace, started=started)
        self.record("flux_residual", rep.max_flux, started=started)
        self.record("msy_lower", rep.msy_bounds[0], started=started)
        self.csv("identities.csv", ("r", "laplace_residual", "flux_residual", "msy_ratio"),
                 [tuple(map(fmt, row)) for row in zip(rep.r, rep.laplace_residual,
                                                      rep.flux_residual, rep.msy_ratio)])

    def flow_suite(self) -> None:
        cfg, g, model = self.config, self.config.grids, self.model
        started = time.perf_counter()
        res = [flow.check_transport(model, r, g.flow_time, ode=cfg.ode) for r in g.r_grid]
        self.record("transport_b", max(r[0] for r in res), started=started)
        self.record("transport_volume", max(r[1] for r in res), started=started)

        started = time.perf_counter()
        r0, t1, t2 = g.gprime_r0, 0.5 * g.flow_time, 0.7 * g.flow_time
        whole = flow.flow_line(model, r0, t1 + t2, cfg.ode)
        first = flow.flow_line(model, r0, t1, cfg.ode)
        second = flow.flow_line(model, float(first.R(t1)), t2, cfg.ode)
        direct, composed = float(whole.R(t1 + t2)), float(second.R(t2))
        self.record("semigroup", abs(direct - composed) / abs(direct), started=started)

        started = time.perf_counter()
        hs = g.gprime_h
        line = flow.flow_line(model, g.gprime_r0, g.gprime_t + hs[0], cfg.ode)
        res = np.array([flow.check_gprime(model, g.gprime_r0, g.gprime_t, h, line) for h in hs])
        self.record("gprime_residual", float(res[-1].max()), started=started)
        # both sides vanish on cones: there is no truncation error to measure
        resolved = res[-1] > 1e-13
        if not resolved.any():
            self.record("gprime_order", math.nan, status="degenerate", started=started)
        else:
            steps = np.array(hs[:-1]) / np.array(hs[1:])
            ratios = res[:-1, resolved] / res[1:, resolved]
            worst = float(np.max(np.abs(ratios - steps[:, None] ** 2)))
            self.record("gprime_order", worst, started=started)

        started = time.perf_counter()
        rng = np.random.default_rng(cfg.seed)
        h = 1e-4
        worst = -math.inf
        for _ in range(g.rate_bound_samples):
            r0 = float(np.exp(rng.uniform(math.log(0.2), math.log(50.0))))
            t = float(rng.uniform(0.1, 2.0))
            line = flow.flow_line(model, r0, t + h, cfg.ode)
            d_rad, d_sph, bound = flow.log_rate_bound(model, line, t, h)
            worst = max(worst, max(d_rad, d_sph) - bound)
        self.record("rate_bound", worst, started=started)

        base = g.main_radius
        times = sorted({0.0, *g.t_grid, g.T})
        line = flow.flow_line(model, base, g.T, cfg.ode)
        rows = []
        for t in times:
            e = flow.metric_eigen(model, line, t)
            R, J = (float(v) for v in line.state(t))
            rows.append((fmt(t), fmt(R), fmt(J), fmt(e.e_rad), fmt(e.e_sph)))
        self.csv("flow.csv", ("t", "R", "J", "e_rad", "e_sph"), rows)

    def monotone_suite(self) -> None:
        cfg, g, model = self.config, self.config.grids, self.model
        manifold = cfg.manifold
        started = time.perf_counter()
        ratios = np.array([warp.volume_ratio(manifold, r, cfg.quad) for r in g.area_radii])
        self.record("volume_ratio_monotone", float(np.max(np.diff(ratios), initial=-math.inf)),
                    started=started)
        floor = warp.asymptotic_volume_ratio(manifold)
        self.record("volume_ratio_floor", float(np.min(ratios - floor)), started=started)

        started = time.perf_counter()
        levels = [model.b(r) for r in g.area_radii]
        pairs = [monotone.area_and_A(model, lv) for lv in levels]
        A = np.array([p[1] for p in pairs])
        self.record("A_monotone", float(np.max(np.diff(A), initial=-math.inf)), started=started)
        n = manifold.n
        normalized = np.array([area / (manifold.sphere_area * lv ** (n - 1))
                               for (area, _), lv in zip(pairs, levels)])
        band = float(max(normalized.max(), 1.0 / normalized.min()))
        self.record("area_band", band, started=started)
        self.csv("area.csv", ("r", "area", "A"),
                 [(fmt(lv), fmt(area), fmt(a)) for lv, (area, a) in zip(levels, pairs)])

        started = time.perf_counter()
        logs = np.array([monotone.log_hess_weighted_integral(model, lv) for lv in levels])
        with np.errstate(invalid="ignore"):
            increases = int(np.sum(np.diff(logs) > 0))
        self.record("H_monotone", increases, started=started)

        started = time.perf_counter()
        failures = 0
        longest = max(g.prop26_s) + max(g.prop26_dt)
        for r in g.prop26_radii:
            level = model.b(r)
            line = flow.flow_line(model, green.b_inverse(model, level), longest, cfg.ode)
            for s in g.prop26_s:
                for dt in g.prop26_dt:
                    res = monotone.prop26_check(model, level, s, s + dt, line)
                    failures += not res.satisfied
        self.record("prop26", failures, started=started)

    def decay_suite(self) -> None:
        cfg, g, model = self.config, self.config.grids, self.model
        started = time.perf_counter()
        r0 = monotone.gradient_radius(model, g.area_radii)
        self.record("gradient_radius", r0, threshold=g.main_radius, started=started)

        started = time.perf_counter()
        main = monotone.main_theorem_table(model, model.b(g.main_radius), g.t_grid, g.T, cfg.ode)
        fit = main.fit
        rows = []
        for t, lv in zip(main.x, main.log_values):
            bound = math.nan if fit.degenerate else fit.intercept + fit.exponent * math.log(t)
            rows.append((fmt(t), fmt_log(lv), fmt_log(bound)))
        self.csv("decay_main.csv", ("t", "lhs", "bound_fit"), rows)
        if main.degenerate:
            self.record("main_decay", math.nan, status="degenerate", started=started)
            self.record("main_fit_residual", math.nan, status="degenerate", started=started)
        else:
            status = None if main.strictly_decreasing else "fail"
            self.record("main_decay", fit.exponent, status=status, started=started)
            self.record("main_fit_residual", fit.residual, started=started)

        started = time.perf_counter()
        loj = monotone.loj_decay_table(model, [model.b(r) for r in g.loj_radii],
                                       model.b(g.loj_base))
        fit = loj.fit
        self.csv("decay_loj.csv", ("r", "log_ratio", "H"),
                 [(fmt(r), fmt(x), fmt_log(lv))
                  for r, x, lv in zip(loj.extra["r"], loj.x, loj.log_values)])
        if loj.degenerate:
            self.record("loj_decay", math.nan, status="degenerate", started=started)
            self.record("loj_fit_residual", math.nan, status="degenerate", started=started)
        else:
            status = None if loj.violations == 0 else "fail"
            self.record("loj_decay", fit.exponent, threshold=-1.0 + fit.residual,
                        status=status, started=started)
            self.record("loj_fit_residual", fit.residual, started=started)


SUITE_CHECKS = {
    "identities": ["ricci_nonnegative", "b_inf_routes", "laplace_residual", "flux_residual",
                   "msy_lower"],
    "flow": ["transport_b", "transport_volume", "semigroup", "gprime_residual",
             "gprime_order", "rate_bound"],
    "monotone": ["volume_ratio_monotone", "volume_ratio_floor", "A_monotone", "area_band",
                 "H_monotone", "prop26"],
    "decay": ["gradient_radius", "main_decay", "main_fit_residual", "loj_decay",
              "loj_fit_residual"],
}


def run(config: RunConfig, out: Optional[os.PathLike] = None) -> SuiteReport:
    """Execute the selected suites; write CSVs and ``report.txt`` into ``out``.

    ``out=None`` runs without touching the filesystem.  Every enabled check
    appears exactly once in the report, failed if its computation raised.
    """
    out_path = Path(out) if out is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
    runner = _Runner(config, out_path)
    bodies = {"identities": runner.identities, "flow": runner.flow_suite,
              "monotone": runner.monotone_suite, "decay": runner.decay_suite}
    for suite in config.suites:
        checks = SUITE_CHECKS[suite]
        if suite != "identities" and runner.model is None:
            runner.guarded(checks, runner.build)
            if runner.model is None:
                continue
        runner.guarded(checks, bodies[suite])
    if out_path is not None:
        report_path = out_path / "report.txt"
        with open(report_path, "w", newline="\n", encoding="ascii") as fh:
            fh.write(runner.report.text())
        runner.report.files.append(report_path)
    return runner.report


def resolve_out(cli_out: Optional[str], config: Optional[RunConfig]) -> Path:
    """``--out`` beats ``CONEFLOW_OUT``, which beats the config's ``out``."""
    if cli_out:
        return Path(cli_out)
    env = os.environ.get("CONEFLOW_OUT")
    if env:
        return Path(env)
    if config is not None and config.out:
        return Path(config.out)
    return Path(DEFAULT_OUT)


def _print_report(report: SuiteReport) -> None:
    for c in report.checks:
        print(f"{c.line()}  ({c.wall_time:.2f} s)")
    status = "FAIL" if report.failed else "ok"
    print(f"{status}: {sum(c.status == 'fail' for c in report.checks)} failed, "
          f"{len(report.checks)} checks")


def _cmd_run(args) -> int:
    try:
        config = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = resolve_out(args.out, config)
    report = run(config, out)
    _print_report(report)
    print(f"wrote {len(report.files)} files to {out}")
    return report.exit_code


def _cmd_verify(args) -> int:
    try:
        manifold = warp.make_profile(args.profile, args.n, args.alpha, args.a)
    except ValueError as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return 2
    config = RunConfig(manifold=manifold, suites=("identities",))
    out = args.out or os.environ.get("CONEFLOW_OUT")
    report = run(config, out)
    _print_report(report)
    return report.exit_code


def _cmd_list(args) -> int:
    for name in warp.PROFILES:
        print(f"{name:14s} {_PROFILE_FORMULAS[name]}")
    return 0


_PROFILE_FORMULAS = {
    "euclid": "phi = r",
    "cone": "phi = alpha r",
    "smoothed_cone": "phi = alpha r + (1 - alpha) a tanh(r / a)",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coneflow",
        description="Green-function flows on rotationally symmetric model manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the suites described by a config file")
    p.add_argument("--config", required=True, help="path to the run file")
    p.add_argument("--out", help="output directory (overrides CONEFLOW_OUT and the config)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("verify", help="run the identity suite with default grids")
    p.add_argument("--profile", required=True, choices=sorted(warp.PROFILES))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--a", type=float, default=1.0, help="smoothing scale")
    p.add_argument("--out", help="also write identities.csv and report.txt here")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("list-profiles", help="print the profile catalog")
    p.set_defaults(func=_cmd_list)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
