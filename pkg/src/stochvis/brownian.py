"""Brownian hitting: exact sphere formulas, walk-on-spheres, Newtonian capacity.

The walk-on-spheres sampler jumps to a uniform point on the largest sphere
around the walker that avoids the target. Once the walker is far away
(beyond ``2 * R1`` with ``R1 = bound + margin``) it is resolved exactly:
with probability ``(R1/|y|)^(d-2)`` it returns to the sphere ``|z| = R1``
at a point drawn from the exterior harmonic measure, otherwise it escapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .analytic import ModelParams, sphere_measure_mass
from .geom import Ball, Capsule, batch_dist2_point_segment
from .stats import CapacityEstimate, Estimate, ProbEstimate, run_batches

WALK_BATCH = 10_000


# --- exact formulas ------------------------------------------------------------


def hitting_between_spheres(d: int, y_norm: float, R1: float, R2: float) -> float:
    """P_y[hit |z| = R2 before |z| = R1] for R1 < |y| < R2."""
    if not 0 < R1 < y_norm < R2:
        raise ValueError("need 0 < R1 < |y| < R2")
    if d == 2:
        return (math.log(R1) - math.log(y_norm)) / (math.log(R1) - math.log(R2))
    if d < 1:
        raise ValueError("d must be positive")
    e = 2 - d
    return (R1**e - y_norm**e) / (R1**e - R2**e)


def escape_prob(d: int, y_norm: float, R1: float) -> float:
    """P_y[never hit the ball of radius R1], |y| >= R1, d >= 3."""
    if d < 3:
        raise ValueError("escape probability is zero for d < 3")
    if y_norm < R1:
        raise ValueError("need |y| >= R1")
    return 1.0 - (R1 / y_norm) ** (d - 2)


# --- shapes --------------------------------------------------------------------


class Shape:
    """Compact set given by an exact distance oracle and a bounding radius about 0."""

    bound: float
    scale: float

    def distance(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class BallShape(Shape):
    def __init__(self, ball: Ball):
        self.ball = ball
        self.bound = float(np.linalg.norm(ball.center)) + ball.radius
        self.scale = ball.radius

    def distance(self, pts):
        return np.maximum(np.linalg.norm(pts - self.ball.center, axis=-1) - self.ball.radius, 0.0)


class CapsuleShape(Shape):
    def __init__(self, capsule: Capsule):
        self.capsule = capsule
        s = capsule.seg
        self.bound = max(np.linalg.norm(s.a), np.linalg.norm(s.b)) + capsule.radius
        self.scale = capsule.radius

    def distance(self, pts):
        s = self.capsule.seg
        return np.maximum(np.sqrt(batch_dist2_point_segment(pts, s.a, s.b)) - self.capsule.radius, 0.0)


class UnionShape(Shape):
    def __init__(self, parts: Sequence[Shape]):
        if not parts:
            raise ValueError("empty union")
        self.parts = list(parts)
        self.bound = max(p.bound for p in self.parts)
        self.scale = min(p.scale for p in self.parts)

    def distance(self, pts):
        return np.min([p.distance(pts) for p in self.parts], axis=0)


def as_shape(obj) -> Shape:
    if isinstance(obj, Shape):
        return obj
    if isinstance(obj, Ball):
        return BallShape(obj)
    if isinstance(obj, Capsule):
        return CapsuleShape(obj)
    raise TypeError(f"cannot use {type(obj).__name__} as a shape")


def capsule_shape(x, rho: float) -> CapsuleShape:
    return CapsuleShape(Capsule.from_origin(x, rho))


def axis_capsule(d: int, r: float, rho: float) -> CapsuleShape:
    x = np.zeros(d)
    x[0] = r
    return capsule_shape(x, rho)


# --- walk-on-spheres -------------------------------------------------------------


@dataclass(frozen=True)
class WosConfig:
    """Walk-on-spheres settings.

    ``eps_hit`` defaults to ``1e-4 * shape.scale``; the re-entry sphere has
    radius ``R1 = bound + margin`` (``margin`` defaults to ``bound``) and
    walkers beyond ``R_out = 2 * R1`` are resolved exactly.
    """

    eps_hit: Optional[float] = None
    margin: Optional[float] = None
    max_steps: int = 100_000

    def resolve(self, shape: Shape) -> tuple[float, float, float]:
        eps = self.eps_hit if self.eps_hit is not None else 1e-4 * shape.scale
        margin = self.margin if self.margin is not None else shape.bound
        if eps <= 0 or margin <= 0:
            raise ValueError("eps_hit and margin must be positive")
        R1 = shape.bound + margin
        return eps, R1, 2.0 * R1


def uniform_sphere(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    g = rng.standard_normal((m, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_exterior_harmonic(y: np.ndarray, R: float, rng: np.random.Generator) -> np.ndarray:
    """Entrance point on the sphere |z| = R of Brownian motion from |y| > R, given it hits.

    The density against the uniform measure is
    ``|y|^(d-2) (|y|^2 - R^2) / |y - z|^d``; sampled by rejection from
    uniform proposals, accepting with ``((|y| - R) / |y - z|)^d``.
    """
    y = np.atleast_2d(y)
    m, d = y.shape
    ny = np.linalg.norm(y, axis=1)
    if np.any(ny <= R):
        raise ValueError("points must lie outside the sphere")
    out = np.empty_like(y)
    todo = np.arange(m)
    while todo.size:
        z = R * uniform_sphere(rng, todo.size, d)
        ratio = (ny[todo] - R) / np.linalg.norm(y[todo] - z, axis=1)
        ok = rng.random(todo.size) < ratio**d
        out[todo[ok]] = z[ok]
        todo = todo[~ok]
    return out


@dataclass
class WalkResult:
    hit: np.ndarray
    censored: np.ndarray
    inner_hit: Optional[np.ndarray] = None
    steps: Optional[np.ndarray] = None


def wos_batch(shape: Shape, starts: np.ndarray, cfg: WosConfig, rng: np.random.Generator,
              inner: Optional[Shape] = None) -> WalkResult:
    """Run one walk per start point; vectorised over walkers.

    With ``inner`` (a subset of ``shape``) each path is continued after it
    reaches ``shape`` until it reaches ``inner`` or escapes, so both hit
    indicators come from the same Brownian path (``inner_hit <= hit``).
    Sphere jumps sized by the distance to ``shape`` are valid moves for the
    ``inner`` question too, since they stay inside its complement.
    """
    starts = np.array(starts, dtype=float, ndmin=2)
    m, d = starts.shape
    if d < 3:
        raise ValueError("Brownian hitting of compacts needs d >= 3")
    eps, R1, R_out = cfg.resolve(shape)
    pos = starts.copy()
    hit = np.zeros(m, bool)
    inner_hit = np.zeros(m, bool)
    phase = np.zeros(m, np.int8)  # 0: targeting shape, 1: targeting inner only
    active = np.ones(m, bool)
    steps = np.zeros(m, np.int64)
    exponent = d - 2
    for _ in range(cfg.max_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        p = pos[idx]
        norm = np.linalg.norm(p, axis=1)
        dist = shape.distance(p)
        if inner is not None:
            in_phase1 = phase[idx] == 1
            if in_phase1.any():
                dist[in_phase1] = inner.distance(p[in_phase1])
        absorbed = dist <= eps
        if absorbed.any():
            a = idx[absorbed]
            if inner is None:
                hit[a] = True
                active[a] = False
            else:
                newly = phase[a] == 0
                hit[a[newly]] = True
                also_inner = np.zeros(a.size, bool)
                also_inner[~newly] = True
                if newly.any():
                    also_inner[newly] = inner.distance(pos[a[newly]]) <= eps
                inner_hit[a[also_inner]] = True
                active[a[also_inner]] = False
                phase[a[~also_inner]] = 1
        far = ~absorbed & (norm >= R_out)
        if far.any():
            f = idx[far]
            back = rng.random(f.size) < (R1 / norm[far]) ** exponent
            active[f[~back]] = False
            if back.any():
                pos[f[back]] = sample_exterior_harmonic(pos[f[back]], R1, rng)
        move = ~absorbed & ~far
        if move.any():
            mv = idx[move]
            pos[mv] += dist[move, None] * uniform_sphere(rng, mv.size, d)
        steps[idx] += 1
    censored = active.copy()
    return WalkResult(hit, censored, inner_hit if inner is not None else None, steps)


def wos_hits(shape, start, cfg: Optional[WosConfig] = None,
             rng: Optional[np.random.Generator] = None) -> Optional[bool]:
    """Whether one Brownian path from ``start`` hits ``shape``; None if censored."""
    shape = as_shape(shape)
    cfg = cfg or WosConfig()
    rng = rng if rng is not None else np.random.default_rng()
    res = wos_batch(shape, np.asarray(start, float)[None, :], cfg, rng)
    if res.censored[0]:
        return None
    return bool(res.hit[0])


def hit_probability_mc(shape, d: int, start_norm: float, n: int, seed: int,
                       cfg: Optional[WosConfig] = None, threads: int = 1) -> ProbEstimate:
    """Frequency of hitting ``shape`` from uniform starts on the sphere |y| = start_norm."""
    shape = as_shape(shape)
    cfg = cfg or WosConfig()

    def work(size, rng):
        res = wos_batch(shape, start_norm * uniform_sphere(rng, size, d), cfg, rng)
        return int(res.hit.sum()), int(res.censored.sum())

    out = run_batches(work, n, seed, (11,), threads, WALK_BATCH)
    hits = sum(h for h, _ in out)
    cens = sum(c for _, c in out)
    return ProbEstimate(hits, n - cens, undecided=cens)


def two_sphere_mc(d: int, y_norm: float, R1: float, R2: float, n: int, seed: int,
                  eps: float = 1e-6, max_steps: int = 100_000) -> ProbEstimate:
    """Frequency of leaving the annulus R1 < |z| < R2 through the outer sphere."""
    if not 0 < R1 < y_norm < R2:
        raise ValueError("need 0 < R1 < |y| < R2")
    rng = np.random.default_rng(seed)
    pos = y_norm * uniform_sphere(rng, n, d)
    active = np.ones(n, bool)
    outer = np.zeros(n, bool)
    for _ in range(max_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        norm = np.linalg.norm(pos[idx], axis=1)
        din, dout = norm - R1, R2 - norm
        dist = np.minimum(din, dout)
        done = dist <= eps
        outer[idx[done]] = dout[done] < din[done]
        active[idx[done]] = False
        mv = idx[~done]
        pos[mv] += dist[~done, None] * uniform_sphere(rng, mv.size, d)
    cens = int(active.sum())
    return ProbEstimate(int(outer.sum()), n - cens, undecided=cens)


def capacity_mc(shape, d: int, R: Optional[float] = None, n: int = 10_000, seed: int = 0,
                cfg: Optional[WosConfig] = None, threads: int = 1) -> CapacityEstimate:
    """Newtonian capacity as (mass of the sphere measure) x (hit fraction) from |y| = R."""
    shape = as_shape(shape)
    if d < 3:
        raise ValueError("capacity needs d >= 3")
    R = shape.bound if R is None else R
    if shape.bound > R * (1 + 1e-12):
        raise ValueError("shape is not contained in B(0, R)")
    cfg = cfg or WosConfig()

    def work(size, rng):
        res = wos_batch(shape, R * uniform_sphere(rng, size, d), cfg, rng)
        return int(res.hit.sum()), int(res.censored.sum())

    out = run_batches(work, n, seed, (12,), threads, WALK_BATCH)
    hits = sum(h for h, _ in out)
    cens = sum(c for _, c in out)
    return CapacityEstimate(hits, n - cens, sphere_measure_mass(d, R), censored=cens)


@dataclass(frozen=True)
class CoupledCapacity:
    """Capacities of ``outer`` and ``inner`` (inner subset of outer) from shared paths."""

    outer: CapacityEstimate
    inner: CapacityEstimate
    difference: Estimate


def capacity_pair_mc(outer, inner, d: int, R: Optional[float] = None, n: int = 10_000,
                     seed: int = 0, cfg: Optional[WosConfig] = None,
                     threads: int = 1) -> CoupledCapacity:
    """cap(outer), cap(inner) and their difference with common random numbers."""
    outer, inner = as_shape(outer), as_shape(inner)
    R = outer.bound if R is None else R
    if outer.bound > R * (1 + 1e-12):
        raise ValueError("shape is not contained in B(0, R)")
    cfg = cfg or WosConfig()

    def work(size, rng):
        res = wos_batch(outer, R * uniform_sphere(rng, size, d), cfg, rng, inner=inner)
        ok = ~res.censored
        return int(res.hit[ok].sum()), int(res.inner_hit[ok].sum()), int(res.censored.sum())

    out = run_batches(work, n, seed, (13,), threads, WALK_BATCH)
    h_out = sum(o[0] for o in out)
    h_in = sum(o[1] for o in out)
    cens = sum(o[2] for o in out)
    mass = sphere_measure_mass(d, R)
    m = n - cens
    p = (h_out - h_in) / m
    diff = Estimate(mass * p, mass * math.sqrt(p * (1 - p) / m), m)
    return CoupledCapacity(CapacityEstimate(h_out, m, mass, cens),
                           CapacityEstimate(h_in, m, mass, cens), diff)


# --- interlacement laws via capacity ---------------------------------------------


def _exp_law(alpha: float, cap_value: float, cap_se: float, n: int) -> Estimate:
    if alpha == 0:
        return Estimate(1.0, 0.0, n)
    v = math.exp(-alpha * cap_value)
    return Estimate(v, alpha * v * cap_se, n)


def bi_f(params: ModelParams, r: float, n: int, seed: int, cfg: Optional[WosConfig] = None,
         threads: int = 1) -> Estimate:
    """exp(-alpha cap(capsule around [0, r e1])) with delta-method error."""
    if params.d < 3:
        raise ValueError("interlacements need d >= 3")
    shape = axis_capsule(params.d, r, params.rho)
    cap = capacity_mc(shape, params.d, None, n, seed, cfg, threads)
    return _exp_law(params.alpha, cap.value, cap.se, cap.n)


def bi_conditional_dir(x, r: float, params: ModelParams, n: int, seed: int,
                       cfg: Optional[WosConfig] = None, threads: int = 1) -> Estimate:
    """P[0 sees x | 0 sees r e1] = exp(-alpha (cap(union) - cap(axis capsule)))."""
    x = np.asarray(x, dtype=float)
    d = params.d
    if d < 3 or x.size != d:
        raise ValueError("x must lie in R^d with d >= 3")
    if abs(np.linalg.norm(x) - r) > 1e-9 * max(r, 1.0):
        raise ValueError("need |x| = r")
    base = axis_capsule(d, r, params.rho)
    union = UnionShape([base, capsule_shape(x, params.rho)])
    pair = capacity_pair_mc(union, base, d, None, n, seed, cfg, threads)
    return _exp_law(params.alpha, pair.difference.value, pair.difference.se, pair.difference.n)
