"""The two geometric facts behind the cylinder bounds.

Run with ``python3 demos/geometry_lemmas.py``.
"""

import math

import numpy as np

from stochvis.geom import Capsule, best_projection, projection_bounds_hold, symdiff_volume_mc
from stochvis.geom import sphere_cover

rng = np.random.default_rng(7)

# Some coordinate hyperplane keeps both norms and the sine of the angle between
# two vectors within a factor 1/sqrt(d).
for d in (3, 4, 5):
    x, y = rng.standard_normal(d), rng.standard_normal(d)
    i, px, py = best_projection(x, y)
    print(f"d={d}: drop axis {i}; |px|/|x| = {np.linalg.norm(px) / np.linalg.norm(x):.3f}, "
          f"|py|/|y| = {np.linalg.norm(py) / np.linalg.norm(y):.3f} "
          f"(>= {1 / math.sqrt(d):.3f}); admissible axes: "
          f"{[j for j in range(d) if projection_bounds_hold(x, y, j)]}")

# Two capsules of length r from the origin at angle phi differ in volume of order
# r rho^(d-2) min(r sin(phi/2), rho).
r = 12.0
print("\nphi      symdiff    / (r min(r sin(phi/2), 1))   [d=3, rho=1]")
for phi in (0.02, 0.05, 0.1, 0.3, 1.0, math.pi / 2, math.pi):
    x = np.array([r, 0.0, 0.0])
    y = r * np.array([math.cos(phi), math.sin(phi), 0.0])
    v = symdiff_volume_mc(Capsule.from_origin(x, 1.0), Capsule.from_origin(y, 1.0), 200_000, 1)
    print(f"{phi:5.3f}  {v.value:9.3f}  {v.value / (r * min(r * math.sin(phi / 2), 1.0)):9.3f}")

# A delta-dense set of directions on the sphere of radius r.
cover = sphere_cover(3, 10.0, 0.5)
print(f"\ncube-sphere cover of the radius-10 sphere at delta=0.5: {len(cover)} points")
