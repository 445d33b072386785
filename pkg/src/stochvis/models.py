"""Poisson samplers for the three obstacle models inside a finite window.

Every sampler draws exactly the obstacles able to reach the ball
``B(0, R_w + margin)``, so the restriction of each model to ``B(0, R_w)`` has
the exact law of the infinite model. Batches of scenes are stored as flat
arrays with a scene index; single scenes are batches of one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .analytic import ModelParams, RadiusLaw, ball_capacity, unit_ball_volume
from .brownian import sample_exterior_harmonic, uniform_sphere
from .geom import (Ball, Capsule, Segment, batch_dist2_point_segment,
                   batch_dist2_segment_line, batch_dist2_segment_segment)
from .stats import ProbEstimate, run_batches

TestShape = Union[Segment, Ball, Capsule]


@dataclass(frozen=True)
class WindowSpec:
    """Region of interest ``B(0, R_w)``; obstacles are sampled if they reach ``B(0, R_w + margin)``."""

    R_w: float
    margin: float

    def __post_init__(self):
        if self.R_w <= 0 or self.margin <= 0:
            raise ValueError("R_w and margin must be positive")

    @property
    def reach(self) -> float:
        return self.R_w + self.margin

    @classmethod
    def for_radius(cls, params: ModelParams, r: float) -> "WindowSpec":
        """Smallest exact window for queries inside ``B(0, r)``."""
        return cls(r, params.rho_max)

    def check(self, params: ModelParams):
        need = params.rho_max
        if self.margin < need * (1 - 1e-12):
            raise ValueError(f"window margin {self.margin} is below the obstacle radius {need}")


@dataclass(frozen=True)
class TrajectoryConfig:
    """Discretisation of interlacement trajectories.

    ``step`` is the Brownian time step h. Outside ``B(0, R + jump_k sqrt(h))``
    (R the reach radius) walkers move by exact sphere jumps that cannot
    touch ``B(0, R)``; beyond ``kill_factor * R`` they escape or re-enter
    exactly. Backward legs start at ``R + eps_b`` (default ``1e-3 * rho``)
    and use adaptive steps ``min(h, backward_c * gap^2)``.
    """

    step: float = 0.005
    eps_b: Optional[float] = None
    kill_factor: float = 4.0
    jump_k: float = 2.0
    backward_c: float = 0.05
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step h must be positive")
        if self.kill_factor <= 1 or self.jump_k <= 0:
            raise ValueError("need kill_factor > 1 and jump_k > 0")

    def eps_backward(self, rho: float) -> float:
        return self.eps_b if self.eps_b is not None else 1e-3 * rho


# --- test shapes -------------------------------------------------------------


def _parts(K: TestShape) -> tuple[np.ndarray, np.ndarray, float]:
    if isinstance(K, Segment):
        return K.a, K.b, 0.0
    if isinstance(K, Capsule):
        return K.seg.a, K.seg.b, K.radius
    if isinstance(K, Ball):
        return K.center, K.center, K.radius
    raise TypeError(f"unsupported test shape {type(K).__name__}")


def _check_in_window(K: TestShape, window: WindowSpec, d: int):
    a, b, rad = _parts(K)
    if a.size != d:
        raise ValueError("test shape has the wrong dimension")
    extent = max(np.linalg.norm(a), np.linalg.norm(b)) + rad
    if extent > window.R_w * (1 + 1e-12):
        raise ValueError("test shape leaves the validated window B(0, R_w)")


def _uniform_ball(rng, m, d, radius):
    return uniform_sphere(rng, m, d) * (radius * rng.random(m) ** (1.0 / d))[:, None]


# --- Boolean model -----------------------------------------------------------------


@dataclass(eq=False)
class BooleanBatch:
    params: ModelParams
    window: WindowSpec
    counts: np.ndarray
    centers: np.ndarray
    radii: np.ndarray

    @property
    def size(self) -> int:
        return self.counts.size

    @property
    def scene_of(self) -> np.ndarray:
        return np.repeat(np.arange(self.size), self.counts)

    def meets(self, K: TestShape) -> np.ndarray:
        a, b, rad = _parts(K)
        hit = batch_dist2_point_segment(self.centers, a, b) <= (self.radii + rad) ** 2
        out = np.zeros(self.size, bool)
        out[self.scene_of[hit]] = True
        return out

    def scene(self, i: int) -> "BooleanScene":
        lo = int(self.counts[:i].sum())
        hi = lo + int(self.counts[i])
        return BooleanScene(self.params, self.window, self.centers[lo:hi], self.radii[lo:hi])


def boolean_batch(params: ModelParams, window: WindowSpec, size: int,
                  rng: np.random.Generator) -> BooleanBatch:
    window.check(params)
    d, R = params.d, window.reach
    counts = rng.poisson(params.alpha * unit_ball_volume(d) * R**d, size)
    total = int(counts.sum())
    centers = _uniform_ball(rng, total, d, R)
    radii = params.law.sample(rng, total)
    return BooleanBatch(params, window, counts, centers, radii)


# --- Poisson cylinders ---------------------------------------------------------------


@dataclass(eq=False)
class CylinderBatch:
    params: ModelParams
    window: WindowSpec
    counts: np.ndarray
    points: np.ndarray
    directions: np.ndarray

    @property
    def size(self) -> int:
        return self.counts.size

    @property
    def scene_of(self) -> np.ndarray:
        return np.repeat(np.arange(self.size), self.counts)

    def meets(self, K: TestShape) -> np.ndarray:
        a, b, rad = _parts(K)
        d2 = batch_dist2_segment_line(a, b, self.points, self.directions)
        hit = d2 <= (self.params.rho + rad) ** 2
        out = np.zeros(self.size, bool)
        out[self.scene_of[hit]] = True
        return out

    def scene(self, i: int) -> "CylinderScene":
        lo = int(self.counts[:i].sum())
        hi = lo + int(self.counts[i])
        return CylinderScene(self.params, self.window, self.points[lo:hi], self.directions[lo:hi])


def cylinder_batch(params: ModelParams, window: WindowSpec, size: int,
                   rng: np.random.Generator) -> CylinderBatch:
    window.check(params)
    d, R = params.d, window.reach
    counts = rng.poisson(params.alpha * unit_ball_volume(d - 1) * R ** (d - 1), size)
    total = int(counts.sum())
    # uniform direction on the full sphere; v and -v give the same line
    v = uniform_sphere(rng, total, d)
    g = rng.standard_normal((total, d))
    g -= np.einsum("ij,ij->i", g, v)[:, None] * v
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    feet = g * (R * rng.random(total) ** (1.0 / (d - 1)))[:, None]
    return CylinderBatch(params, window, counts, feet, v)


# --- Brownian interlacements ---------------------------------------------------------


class _Recorder:
    """Collects polyline pieces (level-0 points) per trajectory."""

    def __init__(self):
        self.rows = []  # (traj ids, piece ids, seq, points)

    def add(self, traj, piece, seq, pts):
        self.rows.append((traj, piece, seq, pts))

    def pieces(self, n_traj: int) -> list[list[np.ndarray]]:
        out: list[list[np.ndarray]] = [[] for _ in range(n_traj)]
        if not self.rows:
            return out
        traj = np.concatenate([r[0] for r in self.rows])
        piece = np.concatenate([r[1] for r in self.rows])
        seq = np.concatenate([r[2] for r in self.rows])
        pts = np.concatenate([r[3] for r in self.rows])
        order = np.lexsort((seq, piece, traj))
        traj, piece, pts = traj[order], piece[order], pts[order]
        cut = np.flatnonzero((np.diff(traj) != 0) | (np.diff(piece) != 0)) + 1
        for block_t, block_p in zip(np.split(traj, cut), np.split(pts, cut)):
            if block_p.shape[0] >= 2:
                out[int(block_t[0])].append(block_p)
        return out


def _edge_hits(p, q, queries, rho, prefilter=None):
    """(queries, edges) bool: edge [p, q] comes within rho + query radius of the query axis."""
    res = np.zeros((len(queries), p.shape[0]), bool)
    for k, (a, b, rad) in enumerate(queries):
        reach2 = (rho + rad) ** 2
        sel = slice(None) if prefilter is None else np.flatnonzero(prefilter[k])
        if prefilter is not None and sel.size == 0:
            continue
        pp, qq = p[sel], q[sel]
        if np.array_equal(a, b):
            d2 = batch_dist2_point_segment(a, pp, qq)
        else:
            d2 = batch_dist2_segment_segment(pp, qq, a, b)
        res[k, sel] = d2 <= reach2
    return res


# macro steps advanced per loop iteration for walkers near the reach ball
_BLOCK = 32


def _interlacement_engine(params: ModelParams, window: WindowSpec, traj: TrajectoryConfig,
                          size: int, rng: np.random.Generator, queries: Sequence[TestShape] = (),
                          levels: int = 1, store: bool = False, backward: bool = False):
    """Sample ``size`` interlacement scenes; evaluate queries on the fly.

    Returns ``(counts, hits, pieces)`` where ``hits[j, k, s]`` says whether
    query ``k`` meets scene ``s`` when paths are discretised with step
    ``h / 2^j``; level j uses every ``2^(levels-1-j)``-th point of the finest
    path, so all levels share one Brownian path. ``pieces`` (if ``store``)
    lists level-0 polylines per trajectory; forward and backward legs are
    separate pieces, and sphere jumps / re-entries start new pieces.
    """
    window.check(params)
    d, rho = params.d, params.rho
    R = window.reach
    R_kill = traj.kill_factor * R
    h = traj.step
    S = 2 ** (levels - 1)
    hf = h / S
    shell = R + traj.jump_k * math.sqrt(h)
    qs = [_parts(K) for K in queries]
    fwd_rng, bwd_rng = rng.spawn(2)

    counts = fwd_rng.poisson(params.alpha * ball_capacity(d, R), size)
    M = int(counts.sum())
    scene_of = np.repeat(np.arange(size), counts)
    hits = np.zeros((levels, len(qs), size), bool)
    entries = R * uniform_sphere(fwd_rng, M, d)
    rec = _Recorder() if store else None
    piece = np.zeros(M, np.int64)
    macro = np.zeros(M, np.int64)  # orders recorded points within a piece

    def record_hits(tids, path, n_valid, j):
        # level-j points are every (S >> j)-th fine point
        pts = path[:, :: S >> j]
        p, q = pts[:, :-1], pts[:, 1:]
        valid = np.arange(p.shape[1])[None, :] < (n_valid << j)[:, None]
        fp, fq = p[valid], q[valid]
        owner = np.broadcast_to(tids[:, None], valid.shape)[valid]
        seg_len = np.linalg.norm(fq - fp, axis=-1)
        # every edge point lies within seg_len of the edge start
        pre = [np.sqrt(batch_dist2_point_segment(fp, a, b)) - seg_len <= rho + rad
               for a, b, rad in qs]
        eh = _edge_hits(fp, fq, qs, rho, pre)
        for k in range(len(qs)):
            hits[j, k, scene_of[owner[eh[k]]]] = True

    pos = entries.copy()
    active = np.ones(M, bool)
    for _ in range(traj.max_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        p = pos[idx]
        norm = np.linalg.norm(p, axis=1)
        kill = norm >= R_kill
        if kill.any():
            k_ids = idx[kill]
            back = fwd_rng.random(k_ids.size) < (R / norm[kill]) ** (d - 2)
            active[k_ids[~back]] = False
            if back.any():
                b_ids = k_ids[back]
                pos[b_ids] = sample_exterior_harmonic(pos[b_ids], R, fwd_rng)
                piece[b_ids] += 1
        jump = ~kill & (norm > shell)
        if jump.any():
            j_ids = idx[jump]
            # the sphere of radius |y| - R about y stays outside B(0, R)
            pos[j_ids] += (norm[jump] - R)[:, None] * uniform_sphere(fwd_rng, j_ids.size, d)
            piece[j_ids] += 1
        euler = ~kill & ~jump
        if not euler.any():
            continue
        e_ids = idx[euler]
        m = e_ids.size
        start = pos[e_ids]
        incr = fwd_rng.standard_normal((m, _BLOCK * S, d)) * math.sqrt(hf)
        path = np.concatenate([start[:, None, :], start[:, None, :] + np.cumsum(incr, axis=1)], axis=1)
        out = np.linalg.norm(path[:, S::S], axis=-1) > shell
        # macro steps kept: through the first macro point outside the shell
        n_valid = np.where(out.any(axis=1), out.argmax(axis=1) + 1, _BLOCK)
        if qs:
            for j in range(levels):
                record_hits(e_ids, path, n_valid, j)
        if rec is not None:
            keep = np.arange(_BLOCK + 1)[None, :] <= n_valid[:, None]
            owner = np.broadcast_to(e_ids[:, None], keep.shape)[keep]
            seq = (macro[e_ids][:, None] + np.arange(_BLOCK + 1)[None, :])[keep]
            rec.add(owner, piece[owner], seq, path[:, ::S][keep])
        macro[e_ids] += n_valid + 1
        pos[e_ids] = path[np.arange(m), n_valid * S]
    else:
        raise RuntimeError("interlacement step budget exceeded")

    pieces = rec.pieces(M) if rec is not None else None

    if backward or store:
        _backward_legs(params, R, R_kill, traj, entries, bwd_rng, scene_of, qs, hits,
                       pieces if store else None)
    return counts, hits, pieces


def _backward_legs(params, R, R_kill, traj, entries, rng, scene_of, qs, hits, pieces):
    """Brownian motion conditioned never to hit B(0, R), via the Doob drift of the escape probability."""
    d, rho = params.d, params.rho
    M = entries.shape[0]
    if M == 0:
        return
    eps_b = traj.eps_backward(rho)
    u = entries / np.linalg.norm(entries, axis=1, keepdims=True)
    pos = (R + eps_b) * u
    prev = entries.copy()
    active = np.ones(M, bool)
    rec = [[entries[i].copy(), pos[i].copy()] for i in range(M)] if pieces is not None else None
    levels = hits.shape[0]
    for _ in range(traj.max_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        p = pos[idx]
        if qs:
            eh = _edge_hits(prev[idx], p, qs, rho)
            for k in range(len(qs)):
                hits[:, k, scene_of[idx[eh[k]]]] = True
        norm = np.linalg.norm(p, axis=1)
        done = norm >= R_kill
        active[idx[done]] = False
        idx, p, norm = idx[~done], p[~done], norm[~done]
        if idx.size == 0:
            break
        gap = norm - R
        assert np.all(gap > 0), "backward leg entered the reach ball"
        dt = np.minimum(traj.step, traj.backward_c * gap**2)
        g = (R / norm) ** (d - 2)
        drift = ((d - 2) * g / (norm**2 * (1.0 - g)))[:, None] * p
        new = p + drift * dt[:, None] + rng.standard_normal(p.shape) * np.sqrt(dt)[:, None]
        bad = np.linalg.norm(new, axis=1) <= R
        while bad.any():
            # an Euler step may not cross into the conditioned-away ball; redraw it
            b = np.flatnonzero(bad)
            new[b] = p[b] + drift[b] * dt[b, None] + rng.standard_normal((b.size, d)) * np.sqrt(dt[b])[:, None]
            bad[b] = np.linalg.norm(new[b], axis=1) <= R
        prev[idx] = p
        pos[idx] = new
        if rec is not None:
            for i, q in zip(idx, new):
                rec[i].append(q)
    else:
        raise RuntimeError("interlacement step budget exceeded")
    if rec is not None:
        for i in range(M):
            pieces[i].append(np.array(rec[i]))


@dataclass(eq=False)
class InterlacementBatch:
    params: ModelParams
    window: WindowSpec
    traj: TrajectoryConfig
    counts: np.ndarray
    pieces: list  # per trajectory: list of (m, d) polylines

    @property
    def size(self) -> int:
        return self.counts.size

    def scene(self, i: int) -> "InterlacementScene":
        lo = int(self.counts[:i].sum())
        hi = lo + int(self.counts[i])
        return InterlacementScene(self.params, self.window, self.traj, self.pieces[lo:hi])

    def meets(self, K: TestShape) -> np.ndarray:
        return np.array([self.scene(i).meets(K) for i in range(self.size)], bool)


def interlacement_batch(params: ModelParams, window: WindowSpec, size: int,
                        rng: np.random.Generator,
                        traj: Optional[TrajectoryConfig] = None) -> InterlacementBatch:
    traj = traj or TrajectoryConfig()
    counts, _, pieces = _interlacement_engine(params, window, traj, size, rng, store=True)
    return InterlacementBatch(params, window, traj, counts, pieces)


# --- single scenes -------------------------------------------------------------------


@dataclass(eq=False)
class BooleanScene:
    params: ModelParams
    window: WindowSpec
    centers: np.ndarray
    radii: np.ndarray
    model: str = field(default="boolean", init=False)

    def __len__(self):
        return len(self.radii)

    def meets(self, K: TestShape) -> bool:
        _check_in_window(K, self.window, self.params.d)
        a, b, rad = _parts(K)
        return bool(np.any(batch_dist2_point_segment(self.centers, a, b) <= (self.radii + rad) ** 2))

    @property
    def balls(self) -> list[Ball]:
        return [Ball(c, r) for c, r in zip(self.centers, self.radii)]

    def arrays(self) -> dict:
        return {"centers": self.centers, "radii": self.radii}


@dataclass(eq=False)
class CylinderScene:
    params: ModelParams
    window: WindowSpec
    points: np.ndarray
    directions: np.ndarray
    model: str = field(default="cylinders", init=False)

    def __len__(self):
        return len(self.points)

    def meets(self, K: TestShape) -> bool:
        _check_in_window(K, self.window, self.params.d)
        a, b, rad = _parts(K)
        d2 = batch_dist2_segment_line(a, b, self.points, self.directions)
        return bool(np.any(d2 <= (self.params.rho + rad) ** 2))

    @property
    def obstacles(self):
        from .geom import LineObstacle
        return [LineObstacle(p, v, self.params.rho) for p, v in zip(self.points, self.directions)]

    def arrays(self) -> dict:
        return {"points": self.points, "directions": self.directions}


@dataclass(eq=False)
class InterlacementScene:
    params: ModelParams
    window: WindowSpec
    traj: TrajectoryConfig
    trajectories: list  # per trajectory: list of polylines
    model: str = field(default="interlacements", init=False)

    def __len__(self):
        return len(self.trajectories)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.params.d
        ps, qs = [np.empty((0, d))], [np.empty((0, d))]
        for pieces in self.trajectories:
            for poly in pieces:
                ps.append(poly[:-1])
                qs.append(poly[1:])
        return np.concatenate(ps), np.concatenate(qs)

    def meets(self, K: TestShape) -> bool:
        _check_in_window(K, self.window, self.params.d)
        p, q = self.edges()
        if p.shape[0] == 0:
            return False
        return bool(_edge_hits(p, q, [_parts(K)], self.params.rho)[0].any())

    def arrays(self) -> dict:
        polys = [poly for pieces in self.trajectories for poly in pieces]
        owner = np.concatenate([[i] * len(p) for i, p in enumerate(self.trajectories)]
                               or [np.empty(0)]).astype(np.int64)
        lengths = np.array([len(p) for p in polys], np.int64)
        pts = np.concatenate(polys) if polys else np.empty((0, self.params.d))
        return {"points": pts, "piece_lengths": lengths, "piece_owner": owner}


Scene = Union[BooleanScene, CylinderScene, InterlacementScene]


def sample_boolean(params: ModelParams, window: WindowSpec, rng: np.random.Generator) -> BooleanScene:
    if params.model != "boolean":
        raise ValueError("params are not a Boolean model")
    return boolean_batch(params, window, 1, rng).scene(0)


def sample_cylinders(params: ModelParams, window: WindowSpec, rng: np.random.Generator) -> CylinderScene:
    if params.model != "cylinders":
        raise ValueError("params are not a cylinder model")
    return cylinder_batch(params, window, 1, rng).scene(0)


def sample_interlacements(params: ModelParams, window: WindowSpec, h: float,
                          rng: np.random.Generator,
                          traj: Optional[TrajectoryConfig] = None) -> InterlacementScene:
    if params.model != "interlacements":
        raise ValueError("params are not an interlacement model")
    if h <= 0:
        raise ValueError("step h must be positive")
    traj = traj or TrajectoryConfig()
    traj = TrajectoryConfig(h, traj.eps_b, traj.kill_factor, traj.jump_k, traj.backward_c, traj.max_steps)
    return interlacement_batch(params, window, 1, rng, traj).scene(0)


def sample_scene(params: ModelParams, window: WindowSpec, rng: np.random.Generator,
                 traj: Optional[TrajectoryConfig] = None) -> Scene:
    if params.model == "boolean":
        return sample_boolean(params, window, rng)
    if params.model == "cylinders":
        return sample_cylinders(params, window, rng)
    traj = traj or TrajectoryConfig()
    return sample_interlacements(params, window, traj.step, rng, traj)


def sample_batch(params: ModelParams, window: WindowSpec, size: int, rng: np.random.Generator,
                 traj: Optional[TrajectoryConfig] = None):
    if params.model == "boolean":
        return boolean_batch(params, window, size, rng)
    if params.model == "cylinders":
        return cylinder_batch(params, window, size, rng)
    return interlacement_batch(params, window, size, rng, traj)


def scene_empty(scene: Scene, K: TestShape) -> bool:
    """True iff no obstacle of ``scene`` meets ``K`` (which must lie in the window)."""
    return not scene.meets(K)


# --- empty-set frequencies -------------------------------------------------------------


def empty_frequency(params: ModelParams, window: WindowSpec, K: TestShape, n: int, seed: int,
                    threads: int = 1, traj: Optional[TrajectoryConfig] = None,
                    levels: int = 1, task: Sequence[int] = (21,)) -> list[ProbEstimate]:
    """Fraction of ``n`` scenes that avoid ``K``.

    Returns one estimate per discretisation level (interlacements: steps
    h, h/2, ...; other models: a single exact estimate).
    """
    _check_in_window(K, window, params.d)
    traj = traj or TrajectoryConfig()

    def work(size, rng):
        if params.model == "interlacements":
            _, hits, _ = _interlacement_engine(params, window, traj, size, rng, [K], levels)
            return [int(size - hits[j, 0].sum()) for j in range(levels)]
        batch = sample_batch(params, window, size, rng)
        return [int(size - batch.meets(K).sum())]

    out = run_batches(work, n, seed, task, threads)
    return [ProbEstimate(sum(o[j] for o in out), n) for j in range(len(out[0]))]


# --- serialisation -------------------------------------------------------------------


def save_scene(scene: Scene, path: Union[str, Path]) -> None:
    """Write a scene as ``.npz``.

    Keys: ``model``, ``d``, ``alpha``, ``rho_spec`` (JSON radius law or the
    radius), ``R_w``, ``margin``, ``count`` and the model's flat arrays:
    Boolean ``centers (k, d)``, ``radii (k,)``; cylinders ``points (k, d)``,
    ``directions (k, d)``; interlacements ``points (m, d)``,
    ``piece_lengths``, ``piece_owner`` and ``step``.
    """
    import json
    p = scene.params
    rho_spec = json.dumps(p.law.to_json()) if isinstance(p.radius, RadiusLaw) else repr(float(p.radius))
    extra = {"step": scene.traj.step} if isinstance(scene, InterlacementScene) else {}
    np.savez(path, model=scene.model, d=p.d, alpha=p.alpha, rho_spec=rho_spec,
             R_w=scene.window.R_w, margin=scene.window.margin, count=len(scene),
             **scene.arrays(), **extra)


def load_scene(path: Union[str, Path]) -> Scene:
    import json
    z = np.load(path, allow_pickle=False)
    rho_spec = str(z["rho_spec"])
    radius = RadiusLaw.from_json(json.loads(rho_spec)) if rho_spec.startswith("{") else float(rho_spec)
    params = ModelParams(str(z["model"]), int(z["d"]), float(z["alpha"]), radius)
    window = WindowSpec(float(z["R_w"]), float(z["margin"]))
    if params.model == "boolean":
        return BooleanScene(params, window, z["centers"], z["radii"])
    if params.model == "cylinders":
        return CylinderScene(params, window, z["points"], z["directions"])
    lengths, owner = z["piece_lengths"], z["piece_owner"]
    polys = np.split(z["points"], np.cumsum(lengths)[:-1]) if lengths.size else []
    trajs: list = [[] for _ in range(int(z["count"]))]
    for poly, o in zip(polys, owner):
        trajs[int(o)].append(poly)
    return InterlacementScene(params, window, TrajectoryConfig(float(z["step"])), trajs)
