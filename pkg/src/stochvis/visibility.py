"""Visibility from the origin: fixed-direction and omnidirectional.

d = 2 is handled exactly. Each obstacle blocks a closed arc of directions
with a closed-form half-width, and the origin sees the circle of radius r
iff those arcs leave a gap. In d >= 3 directions are searched on adaptive
cube-sphere cells. The clearance of the segment ``[0, e]`` (distance to
the nearest obstacle minus its radius) is 1-Lipschitz in the endpoint
``e``, which gives one-sided certificates per cell:

* clearance at the cell centre > 0: a visible direction exists;
* clearance at the centre + cell radius <= 0: the whole cell is blocked.

Cells with neither certificate are split until their radius reaches the
requested resolution, split once more, and otherwise reported undecided.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .analytic import ModelParams, ScalingProfile
from .geom import (Segment, batch_dist2_point_segment, batch_dist2_segment_line,
                   batch_dist2_segment_segment)
from .models import (BooleanBatch, BooleanScene, CylinderBatch, CylinderScene,
                     InterlacementScene, Scene, TrajectoryConfig, WindowSpec,
                     _interlacement_engine, sample_batch)
from .stats import ProbEstimate, run_batches

TWO_PI = 2.0 * math.pi


def default_resolution(params: ModelParams, r: float) -> float:
    """delta(r) / 4 for the model's visibility window."""
    return float(ScalingProfile(params.model, params.d).delta(r)) / 4.0


def segment_clear(scene: Scene, x) -> bool:
    """True iff ``[0, x]`` avoids every obstacle of ``scene``."""
    x = np.asarray(x, float)
    return not scene.meets(Segment.from_origin(x))


# --- exact arcs in the plane -----------------------------------------------------------


@dataclass(frozen=True)
class ArcSet:
    """Sorted disjoint closed arcs ``[lo, hi]`` of angles in ``[0, 2 pi]``."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def from_arcs(cls, lo, hi) -> "ArcSet":
        """Union of arcs given as ``lo <= hi`` (any real angles, lengths <= 2 pi)."""
        lo, hi = _normalise_arcs(np.asarray(lo, float), np.asarray(hi, float))
        if lo.size == 0:
            return cls(lo, hi)
        order = np.argsort(lo, kind="stable")
        lo, hi = lo[order], hi[order]
        reach = np.maximum.accumulate(hi)
        new = np.concatenate([[True], lo[1:] > reach[:-1]])
        starts = np.flatnonzero(new)
        ends = np.concatenate([starts[1:], [lo.size]]) - 1
        return cls(lo[starts], reach[ends])

    @property
    def measure(self) -> float:
        return float(np.sum(self.hi - self.lo))

    @property
    def full(self) -> bool:
        return self.lo.size == 1 and self.lo[0] <= 0.0 and self.hi[0] >= TWO_PI

    def __len__(self) -> int:
        return self.lo.size

    def contains(self, theta) -> np.ndarray:
        t = np.mod(np.asarray(theta, float), TWO_PI)
        k = np.searchsorted(self.lo, t, side="right") - 1
        ok = k >= 0
        out = np.zeros(t.shape, bool)
        out[ok] = t[ok] <= self.hi[k[ok]]
        return out


def _normalise_arcs(lo, hi):
    """Map arcs into [0, 2 pi], splitting those that wrap; full arcs become [0, 2 pi]."""
    full = hi - lo >= TWO_PI
    lo, hi = lo[~full], hi[~full]
    shift = np.floor(lo / TWO_PI) * TWO_PI
    lo, hi = lo - shift, hi - shift
    wrap = hi > TWO_PI
    out_lo = np.concatenate([lo, np.zeros(wrap.sum()), np.zeros(full.sum())])
    out_hi = np.concatenate([np.minimum(hi, TWO_PI), hi[wrap] - TWO_PI, np.full(full.sum(), TWO_PI)])
    return out_lo, out_hi


def disk_arcs(centers, radii, r: float):
    """Directions ``theta`` whose segment ``[0, r u(theta)]`` meets a closed disk.

    Returns ``(mid, half)``: the blocked set is ``|theta - mid| <= half``
    (``half = pi`` means every direction, ``half < 0`` none). The distance
    from the centre to the segment grows with the angle to the centre, so
    the set is one arc. Its edge is the tangent direction when the tangent
    point lies within the segment, and otherwise the direction whose
    endpoint touches the disk.
    """
    centers = np.atleast_2d(np.asarray(centers, float))
    a = np.asarray(radii, float) * np.ones(len(centers))
    D = np.hypot(centers[:, 0], centers[:, 1])
    mid = np.arctan2(centers[:, 1], centers[:, 0])
    half = np.full(D.shape, -1.0)
    inside = D <= a
    half[inside] = math.pi
    rest = ~inside
    Dr, ar = D[rest], a[rest]
    tangent_foot = np.sqrt(Dr**2 - ar**2)
    w = np.where(tangent_foot <= r, np.arcsin(np.clip(ar / Dr, 0, 1)), -1.0)
    endpoint = (tangent_foot > r) & (Dr - ar <= r)
    c = (Dr**2 + r**2 - ar**2) / (2 * r * Dr)
    w = np.where(endpoint, np.arccos(np.clip(c, -1, 1)), w)
    half[rest] = w
    return mid, half


def line_arcs(points, directions, rho: float, r: float):
    """Blocked directions for planar strips of half-width ``rho`` around lines.

    With ``q`` the distance from the origin to the line and ``n`` the unit
    normal towards it, ``[0, r u]`` comes within ``rho`` iff
    ``r (u . n) >= q - rho``.
    """
    p = np.atleast_2d(np.asarray(points, float))
    v = np.atleast_2d(np.asarray(directions, float))
    foot = p - np.einsum("ij,ij->i", p, v)[:, None] * v
    q = np.hypot(foot[:, 0], foot[:, 1])
    mid = np.arctan2(foot[:, 1], foot[:, 0])
    half = np.full(q.shape, -1.0)
    half[q <= rho] = math.pi
    reach = (q > rho) & (q - rho <= r)
    half[reach] = np.arccos(np.clip((q[reach] - rho) / r, -1, 1))
    return mid, half


def _scene_arcs_2d(scene, r: float):
    if isinstance(scene, (BooleanScene, BooleanBatch)):
        return disk_arcs(scene.centers, scene.radii, r)
    if isinstance(scene, (CylinderScene, CylinderBatch)):
        return line_arcs(scene.points, scene.directions, scene.params.rho, r)
    raise TypeError("exact arcs are available for Boolean and cylinder scenes")


def blocked_arcs_d2(scene: Scene, r: float) -> ArcSet:
    """Exact set of blocked directions for visibility to distance ``r`` in the plane."""
    if scene.params.d != 2:
        raise ValueError("blocked_arcs_d2 needs d = 2")
    if isinstance(scene, InterlacementScene):
        raise TypeError("interlacements do not exist in d = 2")
    if len(scene) == 0:
        return ArcSet(np.empty(0), np.empty(0))
    mid, half = _scene_arcs_2d(scene, r)
    keep = half >= 0
    return ArcSet.from_arcs(mid[keep] - half[keep], mid[keep] + half[keep])


def _covered_2d(mid, half, owner, n_scenes: int) -> np.ndarray:
    """Per scene: do the arcs of that scene cover the whole circle?

    Scene ``k`` is shifted to ``[10 k, 10 k + 2 pi]`` so one sort and one
    running maximum handle the whole batch.
    """
    keep = half >= 0
    mid, half, owner = mid[keep], half[keep], owner[keep]
    full = half >= math.pi
    lo = np.mod(mid - half, TWO_PI)
    hi = lo + 2 * half
    wrap = (hi > TWO_PI) & ~full
    lo = np.where(full, 0.0, lo)
    hi = np.where(full, TWO_PI, np.minimum(hi, TWO_PI))
    lo = np.concatenate([lo, np.zeros(wrap.sum())])
    hi = np.concatenate([hi, (mid - half)[wrap] % TWO_PI + 2 * half[wrap] - TWO_PI])
    owner = np.concatenate([owner, owner[wrap]])
    if lo.size == 0:
        return np.zeros(n_scenes, bool)
    off = 10.0 * owner
    order = np.lexsort((lo, owner))
    lo, hi, owner, off = lo[order] + off[order], hi[order] + off[order], owner[order], off[order]
    reach = np.maximum.accumulate(hi)
    first = np.concatenate([[True], owner[1:] != owner[:-1]])
    last = np.concatenate([owner[1:] != owner[:-1], [True]])
    prev = np.concatenate([[-np.inf], reach[:-1]])
    gap = np.where(first, lo > off, lo > prev)
    gap |= last & (reach < off + TWO_PI)
    covered = np.zeros(n_scenes, bool)
    has = np.zeros(n_scenes, bool)
    has[owner] = True
    any_gap = np.zeros(n_scenes, bool)
    any_gap[owner[gap]] = True
    covered[has] = ~any_gap[has]
    return covered


# --- certified direction search in d >= 3 ---------------------------------------------


def _obstacles(scene: Scene, r: float):
    """Obstacle arrays restricted to those able to touch B(0, r)."""
    if isinstance(scene, BooleanScene):
        c, a = scene.centers, scene.radii
        keep = np.linalg.norm(c, axis=1) <= r + a
        return "ball", (c[keep],), a[keep]
    if isinstance(scene, CylinderScene):
        p, v, rho = scene.points, scene.directions, scene.params.rho
        foot = p - np.einsum("ij,ij->i", p, v)[:, None] * v
        keep = np.linalg.norm(foot, axis=1) <= r + rho
        return "line", (p[keep], v[keep]), np.full(keep.sum(), rho)
    p, q = scene.edges()
    rho = scene.params.rho
    keep = batch_dist2_point_segment(np.zeros(p.shape[1]), p, q) <= (r + rho) ** 2
    return "edge", (p[keep], q[keep]), np.full(keep.sum(), rho)


def _clearance(kind, arrays, radii, ends, cell, obs) -> np.ndarray:
    """dist([0, ends[cell]], obstacle obs) - radius, per pair."""
    e = ends[cell]
    zero = np.zeros_like(e)
    if kind == "ball":
        d2 = batch_dist2_point_segment(arrays[0][obs], zero, e)
    elif kind == "line":
        d2 = batch_dist2_segment_line(zero, e, arrays[0][obs], arrays[1][obs])
    else:
        d2 = batch_dist2_segment_segment(zero, e, arrays[0][obs], arrays[1][obs])
    return np.sqrt(d2) - radii[obs]


def _cell_directions(d, face, coords):
    axis, side = np.divmod(face, 2)
    pts = np.empty((len(face), d))
    for ax in range(d):
        sel = axis == ax
        if sel.any():
            pts[sel] = np.insert(coords[sel], ax, np.where(side[sel] == 1, 1.0, -1.0), axis=1)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _search_cells(scene: Scene, r: float, resolution: float,
                  max_cells: int = 2_000_000) -> Optional[bool]:
    d = scene.params.d
    kind, arrays, radii = _obstacles(scene, r)
    n_obs = radii.size
    if n_obs == 0:
        return True
    # level 0: one cell per cube face, half-side 1 in face coordinates
    face = np.arange(2 * d)
    coords = np.zeros((2 * d, d - 1))
    half = 1.0
    cell = np.repeat(np.arange(2 * d), n_obs)
    obs = np.tile(np.arange(n_obs), 2 * d)
    children = np.array(list(itertools.product((-0.5, 0.5), repeat=d - 1)))
    finest = None
    while True:
        eta = r * half * math.sqrt(d - 1)  # radius of every cell at this level
        ends = r * _cell_directions(d, face, coords)
        g = _clearance(kind, arrays, radii, ends, cell, obs)
        gmin = np.full(len(face), np.inf)
        np.minimum.at(gmin, cell, g)
        if np.any(gmin > 0):
            return True
        open_ = gmin + eta > 0
        if not open_.any():
            return False
        if finest is not None and eta < finest:
            return None
        if eta <= resolution and finest is None:
            finest = eta  # one refinement beyond the requested resolution
        # pairs able to block part of an open cell
        relevant = open_[cell] & (g <= eta)
        cell, obs = cell[relevant], obs[relevant]
        open_ids = np.flatnonzero(open_)
        remap = np.full(len(face), -1)
        remap[open_ids] = np.arange(open_ids.size)
        k = children.shape[0]
        if open_ids.size * k > max_cells:
            return None
        face = np.repeat(face[open_ids], k)
        coords = (coords[open_ids][:, None, :] + half * children[None, :, :]).reshape(-1, d - 1)
        cell = (remap[cell][:, None] * k + np.arange(k)[None, :]).ravel()
        obs = np.repeat(obs, k)
        half /= 2.0


def visible_direction_exists(scene: Scene, r: float, resolution: Optional[float] = None
                             ) -> Optional[bool]:
    """Is some point of the sphere of radius ``r`` visible from the origin?

    Returns ``True``, ``False`` or ``None`` (undecided, only in d >= 3).
    ``resolution`` is the cell radius on the sphere at which refinement
    stops (default delta(r) / 4).
    """
    if r > scene.window.R_w * (1 + 1e-12):
        raise ValueError("r exceeds the window radius R_w")
    if resolution is None:
        resolution = default_resolution(scene.params, r)
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if scene.params.d == 2:
        return not blocked_arcs_d2(scene, r).full
    return _search_cells(scene, r, resolution)


# --- estimators -------------------------------------------------------------------------


@dataclass(frozen=True)
class VisibilityCounts:
    """Fixed-direction and omnidirectional visibility from one set of scenes."""

    f: ProbEstimate
    pvis: Optional[ProbEstimate]


def _check_r(window: WindowSpec, r: float):
    if r <= 0:
        raise ValueError("r must be positive")
    if r > window.R_w * (1 + 1e-12):
        raise ValueError("r exceeds the window radius R_w")


def visibility_counts(params: ModelParams, window: WindowSpec, r: float, n: int, seed: int,
                      resolution: Optional[float] = None, threads: int = 1,
                      traj: Optional[TrajectoryConfig] = None, pvis: bool = True,
                      task: Sequence[int] = (31,)) -> VisibilityCounts:
    """Estimate f(r) and (optionally) P_vis(r) from the same ``n`` scenes.

    f uses the direction ``e_1``. Undecided scenes (d >= 3 only) are
    counted separately and excluded from the P_vis hits.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    _check_r(window, r)
    window.check(params)
    d = params.d
    if resolution is None:
        resolution = default_resolution(params, r)
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    traj = traj or TrajectoryConfig()
    K = Segment.from_origin(np.eye(d)[0] * r)

    def work(size, rng):
        if params.model == "interlacements":
            counts, hits, pieces = _interlacement_engine(params, window, traj, size, rng, [K],
                                                         store=pvis)
            clear = ~hits[0, 0]
            if not pvis:
                return int(clear.sum()), 0, 0
            starts = np.concatenate([[0], np.cumsum(counts)])
            vis = und = 0
            for i in range(size):
                if clear[i]:
                    vis += 1
                    continue
                scene = InterlacementScene(params, window, traj, pieces[starts[i]:starts[i + 1]])
                res = _search_cells(scene, r, resolution)
                vis += res is True
                und += res is None
            return int(clear.sum()), vis, und
        batch = sample_batch(params, window, size, rng)
        clear = ~batch.meets(K)
        if not pvis:
            return int(clear.sum()), 0, 0
        if d == 2:
            mid, half = _scene_arcs_2d(batch, r)
            covered = _covered_2d(mid, half, batch.scene_of, size)
            return int(clear.sum()), int((~covered).sum()), 0
        vis = und = 0
        for i in range(size):
            if clear[i]:
                vis += 1
                continue
            res = _search_cells(batch.scene(i), r, resolution)
            vis += res is True
            und += res is None
        return int(clear.sum()), vis, und

    out = run_batches(work, n, seed, task, threads)
    f = ProbEstimate(sum(o[0] for o in out), n)
    if not pvis:
        return VisibilityCounts(f, None)
    return VisibilityCounts(f, ProbEstimate(sum(o[1] for o in out), n, sum(o[2] for o in out)))


def estimate_f(params: ModelParams, window: WindowSpec, r: float, n: int, seed: int,
               threads: int = 1, traj: Optional[TrajectoryConfig] = None) -> ProbEstimate:
    """Fraction of ``n`` scenes in which ``[0, r e_1]`` is clear."""
    return visibility_counts(params, window, r, n, seed, threads=threads, traj=traj,
                             pvis=False).f


def estimate_pvis(params: ModelParams, window: WindowSpec, r: float, n: int, seed: int,
                  resolution: Optional[float] = None, threads: int = 1,
                  traj: Optional[TrajectoryConfig] = None) -> ProbEstimate:
    """Fraction of ``n`` scenes with a visible direction; undecided scenes reported separately."""
    return visibility_counts(params, window, r, n, seed, resolution, threads, traj).pvis
