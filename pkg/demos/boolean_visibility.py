"""Visibility through a planar Boolean model of unit disks.

Run with ``python3 demos/boolean_visibility.py``.
"""

import math

import numpy as np

from stochvis.analytic import ModelParams, ScalingProfile, boolean_f
from stochvis.harness import RunConfig, run_sweep, verify_bounds
from stochvis.models import WindowSpec, sample_scene
from stochvis.stats import stream
from stochvis.visibility import blocked_arcs_d2, estimate_f, visible_direction_exists

params = ModelParams("boolean", 2, 0.1, 1.0)

# Fixed direction: the segment [0, r e1] is clear iff no disk centre lies within
# distance 1 of it, a Poisson count with mean alpha * (pi + 2 r).
for r in (5.0, 10.0, 20.0):
    est = estimate_f(params, WindowSpec(r, 1.0), r, 20_000, seed=1)
    print(f"r={r:5.1f}  f exact {boolean_f(params, r):.5f}  simulated {est.p_hat:.5f} +- {est.se:.5f}")

# One scene at r = 10. Each disk blocks one arc of directions; the origin sees
# distance 10 somewhere iff the union of arcs leaves a gap.
scene = sample_scene(params, WindowSpec(10.0, 1.0), stream(3))
arcs = blocked_arcs_d2(scene, 10.0)
print(f"\n{len(scene)} disks, {len(arcs)} blocked arcs covering {arcs.measure / (2 * math.pi):.1%}"
      f" of the circle; visible: {visible_direction_exists(scene, 10.0)}")
gaps = np.c_[arcs.hi, np.r_[arcs.lo[1:], arcs.lo[0] + 2 * math.pi]]
widest = gaps[np.argmax(gaps[:, 1] - gaps[:, 0])]
print(f"widest gap: {widest[0]:.3f} .. {widest[1] % (2 * math.pi):.3f} rad")

# Omnidirectional visibility decays much more slowly than f. The ratio
# P_vis / ((r / delta)^(d-1) f), with delta(r) = 1/r, stays within a constant band.
print(f"\ndelta(r) for the planar Boolean model: 1/r, e.g. {ScalingProfile('boolean', 2).delta(8.0):.3f} at r=8")
cfg = RunConfig(model="boolean", d=2, alpha=0.1, rho=1.0, r=(8, 12, 16, 20, 24), n=10_000, seed=6)
result = run_sweep(cfg)
for row in result.rows:
    print(f"r={row.r:4.0f}  f={row.f_analytic:.5f}  P_vis={row.pvis_hat:.4f}  ratio={row.ratio:.4f}")
print(verify_bounds(result, band=3.0))
