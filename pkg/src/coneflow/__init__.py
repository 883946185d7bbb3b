"""Green-function flows and monotone quantities on rotationally symmetric manifolds."""
from .green import GreenModel, b_infinity, b_inverse, build_green, hessian_eigen_b2
from .flow import flow_line, metric_eigen, sup_log_ratio
from .monotone import (area_and_A, fit_decay, hess_weighted_integral, loj_decay_table,
                       main_theorem_table, prop26_check)
from .warp import ModelManifold, make_profile

__all__ = [
    "GreenModel", "ModelManifold", "area_and_A", "b_infinity", "b_inverse", "build_green",
    "fit_decay", "flow_line", "hess_weighted_integral", "hessian_eigen_b2",
    "loj_decay_table", "main_theorem_table", "make_profile", "metric_eigen",
    "prop26_check", "sup_log_ratio",
]
__version__ = "0.1.0"
