import math

import numpy as np
import pytest

from coneflow.green import build_green
from coneflow.warp import make_profile

# lines appended by test_acceptance.py, echoed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


def simpson_to_infinity(f, lower, n_panels=200_000):
    """Composite Simpson on ``u = 1/s`` over ``(0, 1/lower]``.

    Independent of QUADPACK and of any tail descriptor; ``f(1/u)/u^2`` must
    vanish as ``u -> 0``.
    """
    u = np.linspace(0.0, 1.0 / lower, 2 * n_panels + 1)
    g = np.zeros_like(u)
    g[1:] = np.array([f(1.0 / x) for x in u[1:]]) / u[1:] ** 2
    h = u[1] - u[0]
    return h / 3.0 * (g[0] + g[-1] + 4.0 * g[1:-1:2].sum() + 2.0 * g[2:-1:2].sum())


@pytest.fixture(scope="session")
def euclid4():
    return build_green(make_profile("euclid", 4))


@pytest.fixture(scope="session")
def euclid3():
    return build_green(make_profile("euclid", 3))


@pytest.fixture(scope="session")
def cone3():
    return build_green(make_profile("cone", 3, alpha=0.5))


@pytest.fixture(scope="session")
def smooth4():
    return build_green(make_profile("smoothed_cone", 4, alpha=0.5, a=1.0))


@pytest.fixture(scope="session")
def smooth4_flat():
    return build_green(make_profile("smoothed_cone", 4, alpha=0.9, a=1.0))


@pytest.fixture(scope="session", params=["euclid", "cone", "smoothed_cone"])
def any_model(request):
    n = 4
    alpha = None if request.param == "euclid" else 0.5
    return build_green(make_profile(request.param, n, alpha=alpha))


def log_grid(lo, hi, k):
    return np.geomspace(lo, hi, k)


E = math.e
