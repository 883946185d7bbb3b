"""
Flowing along grad b^2
======================

The flow of ``grad b^2`` is the dilation ``x -> e^(2t) x`` on flat space.
On the smoothed cone the rescaled metrics ``g(t)`` converge as ``t`` grows,
and the change between two times is carried by the trace-free Hessian.
"""
import math

from coneflow import build_green, make_profile
from coneflow.flow import check_gprime, check_transport, flow_line, metric_eigen, sup_log_ratio

flat = build_green(make_profile("euclid", 4))
line = flow_line(flat, 1.0, 1.0)
print("flat: R(1) =", float(line.R(1.0)), " e^2 =", math.e ** 2)

# %%
model = build_green(make_profile("smoothed_cone", 4, alpha=0.5, a=1.0))
line = flow_line(model, 1.0, 16.0)
print(" t        R(t)          J(t)        e_rad        e_sph")
for t in (0.0, 1.0, 2.0, 4.0, 8.0, 16.0):
    e = metric_eigen(model, line, t)
    print(f"{t:4g} {float(line.R(t)):12.6g} {float(line.J(t)):12.6g} {e.e_rad:12.6g} {e.e_sph:12.6g}")

# %%
# sup over unit vectors of |log g(16)(v,v) / g(t)(v,v)|
for t in (1.0, 2.0, 4.0, 8.0):
    print(f"t={t:3g}  sup log ratio = {sup_log_ratio(model, 1.0, t, 16.0, line):.3e}")

# %%
# Time derivative of g(t) against central differences: second order in h
for h in (1e-2, 5e-3, 2.5e-3):
    print(f"h={h:g}  residuals", check_gprime(model, 1.0, 1.0, h))
print("transport residuals", check_transport(model, 1.0, 2.0))
