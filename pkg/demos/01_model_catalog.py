"""
The model catalog
=================

Three rotationally symmetric metrics ``dr^2 + phi(r)^2 g_S`` with
nonnegative Ricci curvature.  The smoothed cone looks Euclidean near the
pole and like a cone of slope ``alpha`` far out.
"""
import numpy as np

from coneflow.warp import make_profile, ricci_eigenvalues, volume_ratio

models = {
    "euclid": make_profile("euclid", 4),
    "cone": make_profile("cone", 4, alpha=0.5),
    "smoothed_cone": make_profile("smoothed_cone", 4, alpha=0.5, a=1.0),
}

# %%
# Profiles and their slopes.  The smoothed cone starts with slope 1 and
# settles on alpha within a few multiples of the smoothing scale.
radii = np.array([0.1, 1.0, 3.0, 10.0, 100.0])
for name, m in models.items():
    p = m.profile
    print(f"{name:14s} phi'(r) =", " ".join(f"{p.dphi(r):.6f}" for r in radii))

# %%
# Ricci eigenvalues never dip below zero.
grid = np.geomspace(1e-2, 1e3, 200)
for name, m in models.items():
    ric = np.array([ricci_eigenvalues(m, r) for r in grid])
    print(f"{name:14s} min Ricci (radial, spherical) = {ric.min(axis=0) + 0.0}")

# %%
# Volume ratio vol(B_r) / (omega_n r^n) decreases towards alpha^(n-1).
for name, m in models.items():
    vals = [volume_ratio(m, r) for r in (1.0, 10.0, 100.0, 1e4)]
    print(f"{name:14s}", " ".join(f"{v:.6f}" for v in vals),
          f" limit {m.profile.alpha ** (m.n - 1):.6f}")
