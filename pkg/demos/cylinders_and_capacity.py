"""Poisson cylinders and the capacity of long capsules.

Run with ``python3 demos/cylinders_and_capacity.py``.
"""

import math

from stochvis.analytic import ModelParams, ball_capacity, cylinder_f, mean_projected_sine
from stochvis.brownian import BallShape, axis_capsule, capacity_mc
from stochvis.geom import Ball
from stochvis.models import WindowSpec
from stochvis.visibility import estimate_f, visibility_counts

# A cylinder blocks [0, r e1] iff its axis passes within rho of the segment. In the
# plane the measure of such lines is (2/pi) r + 2 rho, so alpha = 1/4, rho = 1, r = pi
# gives f = exp(-1).
p2 = ModelParams("cylinders", 2, 0.25, 1.0)
est = estimate_f(p2, WindowSpec(math.pi, 1.0), math.pi, 20_000, seed=2)
print(f"d=2: f exact {cylinder_f(p2, math.pi):.4f}, simulated {est.p_hat:.4f} +- {est.se:.4f}")

# In d=3 the segment term carries the mean |sin| of the angle between the axis and e1.
p3 = ModelParams("cylinders", 3, 0.1, 1.0)
print(f"E|sin theta| in d=3: {mean_projected_sine(3):.6f} (pi/4 = {math.pi / 4:.6f})")
vc = visibility_counts(p3, WindowSpec(6.0, 1.0), 6.0, 2000, seed=4)
print(f"d=3, r=6: f exact {cylinder_f(p3, 6.0):.4f}, simulated {vc.f.p_hat:.4f}; "
      f"P_vis {vc.pvis.p_hat:.3f} ({vc.pvis.undecided} undecided)")

# Newtonian capacity by walk on spheres. The unit ball has capacity 2 pi in this
# normalisation; a capsule of length r grows like r / log r.
cap = capacity_mc(BallShape(Ball([0.0, 0.0, 0.0], 1.0)), 3, R=2.0, n=20_000, seed=5)
print(f"\ncap B(0,1): {cap.value:.3f} +- {cap.se:.3f} (exact {ball_capacity(3, 1.0):.3f})")
for r in (8, 16, 32, 64):
    c = capacity_mc(axis_capsule(3, r, 1.0), 3, n=5000, seed=r)
    print(f"capsule r={r:3d}: cap {c.value:7.2f} +- {c.se:5.2f}   cap / (r / log r) = "
          f"{c.value / (r / math.log(r)):.3f}")
