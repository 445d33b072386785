"""Dimension-generic geometry: segment distances, capsules, projections, sphere covers.

Points are plain numpy arrays of shape ``(d,)``; the vectorised helpers
(prefixed with ``batch_``) broadcast over leading axes so that whole scenes
can be tested at once.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .stats import ScaledEstimate


def _vec(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a 1-d coordinate vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("coordinates must be finite")
    return v


def _same_dim(*vs: np.ndarray) -> int:
    dims = {v.shape[-1] for v in vs}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


@dataclass(frozen=True, eq=False)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _vec(self.a))
        object.__setattr__(self, "b", _vec(self.b))
        _same_dim(self.a, self.b)

    @property
    def dim(self) -> int:
        return self.a.size

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))

    @classmethod
    def from_origin(cls, x) -> "Segment":
        x = _vec(x)
        return cls(np.zeros_like(x), x)


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.size


@dataclass(frozen=True, eq=False)
class Capsule:
    """Closed ``radius``-neighbourhood of a segment."""

    seg: Segment
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @classmethod
    def from_origin(cls, x, radius: float) -> "Capsule":
        return cls(Segment.from_origin(x), radius)

    @property
    def dim(self) -> int:
        return self.seg.dim

    @property
    def volume(self) -> float:
        return capsule_volume(self.dim, self.seg.length, self.radius)


@dataclass(frozen=True, eq=False)
class LineObstacle:
    """Doubly infinite solid cylinder: ``radius``-neighbourhood of a line."""

    point: np.ndarray
    direction: np.ndarray
    radius: float

    def __post_init__(self):
        p, v = _vec(self.point), _vec(self.direction)
        _same_dim(p, v)
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")
        if abs(p @ v) > 1e-9:
            raise ValueError("point must be the foot of the line (orthogonal to direction)")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "direction", v)

    @classmethod
    def through(cls, point, direction, radius: float) -> "LineObstacle":
        """Build from any point on the line and any nonzero direction."""
        v = _vec(direction)
        v = v / np.linalg.norm(v)
        p = _vec(point)
        return cls(p - (p @ v) * v, v, radius)


# --- vectorised distance kernels -------------------------------------------


def _dot(u, v):
    return np.einsum("...i,...i->...", u, v)


def batch_dist2_point_segment(p, a, b):
    """Squared distance from points ``p`` to segments ``[a, b]`` (broadcasting)."""
    p, a, b = np.asarray(p, float), np.asarray(a, float), np.asarray(b, float)
    ab = b - a
    ap = p - a
    den = _dot(ab, ab)
    num = _dot(ap, ab)
    t = np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)
    t = np.clip(t, 0.0, 1.0)
    diff = ap - t[..., None] * ab
    return _dot(diff, diff)


def batch_dist2_origin_segment(a, b):
    """Squared distance from the origin to segments ``[a, b]``."""
    return batch_dist2_point_segment(np.zeros(np.shape(a)[-1]), a, b)


def batch_dist2_segment_line(a, b, p, v):
    """Squared distance between segments ``[a, b]`` and lines ``p + R v`` (``v`` unit).

    Projecting orthogonally to ``v`` turns the line into a point, so the
    answer is the origin-to-segment distance of the projected segment.
    """
    a, b, p, v = (np.asarray(z, float) for z in (a, b, p, v))
    ap = a - p
    bp = b - p
    ap = ap - _dot(ap, v)[..., None] * v
    bp = bp - _dot(bp, v)[..., None] * v
    return batch_dist2_origin_segment(ap, bp)


def batch_dist2_segment_segment(p1, q1, p2, q2, eps=1e-300):
    """Squared distance between segments ``[p1, q1]`` and ``[p2, q2]``.

    Closed-form minimisation of the quadratic in ``(s, t)`` with clamping;
    degenerate segments reduce to points.
    """
    p1, q1, p2, q2 = np.broadcast_arrays(*(np.asarray(z, float) for z in (p1, q1, p2, q2)))
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = _dot(d1, d1)
    e = _dot(d2, d2)
    f = _dot(d2, r)
    c = _dot(d1, r)
    b = _dot(d1, d2)
    a_ok = a > eps
    e_ok = e > eps
    safe_a = np.where(a_ok, a, 1.0)
    safe_e = np.where(e_ok, e, 1.0)
    denom = a * e - b * b
    # parallel (or degenerate) pairs take s = 0 and rely on the clamping below
    general = denom > 1e-14 * a * e
    s = np.where(general, np.clip((b * f - c * e) / np.where(general, denom, 1.0), 0, 1), 0.0)
    t = (b * s + f) / safe_e
    s = np.where(t < 0, np.clip(-c / safe_a, 0, 1), s)
    s = np.where(t > 1, np.clip((b - c) / safe_a, 0, 1), s)
    t = np.clip(t, 0.0, 1.0)
    # degenerate first segment: s = 0, t from projecting p1 on segment 2
    t = np.where(~a_ok, np.clip(f / safe_e, 0, 1), t)
    s = np.where(~a_ok, 0.0, s)
    # degenerate second segment: t = 0
    s = np.where(a_ok & ~e_ok, np.clip(-c / safe_a, 0, 1), s)
    t = np.where(~e_ok, 0.0, t)
    diff = (p1 + s[..., None] * d1) - (p2 + t[..., None] * d2)
    out = _dot(diff, diff)
    # near-parallel pairs: s = 0 can miss a closer endpoint pair, and with no
    # interior minimum the distance is attained at an endpoint
    near = ~general & a_ok & e_ok
    if np.any(near):
        P1, Q1, P2, Q2 = (z[near] for z in (p1, q1, p2, q2))
        ends = np.minimum.reduce([batch_dist2_point_segment(P1, P2, Q2),
                                  batch_dist2_point_segment(Q1, P2, Q2),
                                  batch_dist2_point_segment(P2, P1, Q1),
                                  batch_dist2_point_segment(Q2, P1, Q1)])
        out = np.array(out, copy=True)
        out[near] = np.minimum(out[near], ends)
    return out


# --- scalar operations -------------------------------------------------------


def dist_point_segment(p, s: Segment) -> float:
    p = _vec(p)
    _same_dim(p, s.a)
    return math.sqrt(float(batch_dist2_point_segment(p, s.a, s.b)))


def dist_segment_line(s: Segment, line: LineObstacle) -> float:
    """Distance from a segment to the axis of ``line`` (its radius is ignored)."""
    _same_dim(s.a, line.point)
    return math.sqrt(float(batch_dist2_segment_line(s.a, s.b, line.point, line.direction)))


def dist_segment_segment(s1: Segment, s2: Segment) -> float:
    _same_dim(s1.a, s2.a)
    return math.sqrt(float(batch_dist2_segment_segment(s1.a, s1.b, s2.a, s2.b)))


def unit_ball_volume(s: int) -> float:
    """Volume kappa_s of the s-dimensional unit ball (kappa_0 = 1)."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    return math.pi ** (s / 2) / math.gamma(s / 2 + 1)


def capsule_volume(d: int, length: float, rho: float) -> float:
    """Lebesgue volume of the rho-neighbourhood of a segment of the given length."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if length < 0 or rho <= 0:
        raise ValueError("need length >= 0 and rho > 0")
    if d == 1:
        return length + 2 * rho
    return unit_ball_volume(d - 1) * rho ** (d - 1) * length + unit_ball_volume(d) * rho**d


def _angle(x: np.ndarray, y: np.ndarray) -> float:
    # Kahan's formula, accurate for nearly (anti)parallel vectors
    xu = x / np.linalg.norm(x)
    yu = y / np.linalg.norm(y)
    return 2.0 * math.atan2(np.linalg.norm(xu - yu), np.linalg.norm(xu + yu))


def projection_bounds_hold(x, y, i: int, rtol: float = 1e-12) -> bool:
    """Check the three coordinate-hyperplane projection inequalities for axis ``i``."""
    x, y = _vec(x), _vec(y)
    d = x.size
    px, py = x.copy(), y.copy()
    px[i] = 0.0
    py[i] = 0.0
    k = 1.0 / math.sqrt(d)
    nx, ny = np.linalg.norm(px), np.linalg.norm(py)
    if nx < k * np.linalg.norm(x) * (1 - rtol) or ny < k * np.linalg.norm(y) * (1 - rtol):
        return False
    if nx == 0 or ny == 0:
        return False
    return math.sin(_angle(px, py)) >= k * math.sin(_angle(x, y)) * (1 - rtol) - 1e-15


def best_projection(x, y) -> tuple[int, np.ndarray, np.ndarray]:
    """Coordinate hyperplane on which projecting ``x`` and ``y`` keeps norms and angle.

    Returns ``(i, pi_i(x), pi_i(y))`` with ``i`` the smallest 0-based axis
    index such that both projected norms are at least ``1/sqrt(d)`` of the
    originals and ``sin`` of the projected angle is at least ``1/sqrt(d)``
    times the original one.
    """
    x, y = _vec(x), _vec(y)
    d = _same_dim(x, y)
    if d < 3:
        raise ValueError("best_projection needs d >= 3")
    if not np.any(x) or not np.any(y):
        raise ValueError("x and y must be nonzero")
    for i in range(d):
        if projection_bounds_hold(x, y, i):
            px, py = x.copy(), y.copy()
            px[i] = 0.0
            py[i] = 0.0
            return i, px, py
    raise ArithmeticError("no admissible axis found")  # excluded by the projection lemma


# --- sphere covers -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SphereCover:
    """Centres on the sphere of radius ``r``; every sphere point is within ``delta`` of one."""

    r: float
    delta: float
    centers: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.centers)


def cube_face_cells(d: int, n: int, face: int, idx: np.ndarray) -> np.ndarray:
    """Unit directions of cube-sphere cells.

    The cube surface ``[-1, 1]^d`` has ``2d`` faces (``face = 2 * axis + side``);
    each face is split into ``n^(d-1)`` equal squares indexed by ``idx``
    (shape ``(m, d-1)``). Returned directions are the radial projections of
    the square centres. A square's half-diagonal is ``sqrt(d-1)/n``; radial
    projection onto the unit sphere is 1-Lipschitz outside the unit ball, so
    that bound also covers the projected cell.
    """
    axis, side = divmod(face, 2)
    idx = np.atleast_2d(idx)
    coords = -1.0 + (2.0 * idx + 1.0) / n
    pts = np.insert(coords, axis, 1.0 if side else -1.0, axis=1)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def cube_cells_per_axis(d: int, r: float, delta: float) -> int:
    """Smallest cube-sphere subdivision whose cells have radius <= delta on B(r)."""
    return max(1, math.ceil(r * math.sqrt(d - 1) / delta))


def _all_cube_cells(d: int, n: int) -> np.ndarray:
    grid = np.array(list(itertools.product(range(n), repeat=d - 1)), dtype=float)
    return np.concatenate([cube_face_cells(d, n, face, grid) for face in range(2 * d)])


def sphere_cover(d: int, r: float, delta: float) -> SphereCover:
    """Deterministic delta-dense set of points on the sphere of radius ``r`` in R^d.

    d = 2 uses an equally spaced arc grid (at least two points); d >= 3 uses
    the cube-sphere grid, with ``2d * ceil(r sqrt(d-1) / delta)^(d-1)``
    points.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if r <= 0:
        raise ValueError("r must be positive")
    if d < 2:
        raise ValueError("sphere_cover needs d >= 2")
    if d == 2:
        if delta >= 2 * r:
            m = 2
        else:
            # chord between neighbours' midpoint and a centre: 2 r sin(pi / (2m)) <= delta
            m = max(2, math.ceil(math.pi / (2 * math.asin(delta / (2 * r)))))
        theta = 2 * math.pi * np.arange(m) / m
        centers = r * np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        n = cube_cells_per_axis(d, r, delta)
        centers = r * _all_cube_cells(d, n)
    return SphereCover(r, delta, centers)


# --- symmetric difference volume ---------------------------------------------


def _capsule_box(c: Capsule) -> tuple[np.ndarray, np.ndarray]:
    lo = np.minimum(c.seg.a, c.seg.b) - c.radius
    hi = np.maximum(c.seg.a, c.seg.b) + c.radius
    return lo, hi


def symdiff_volume_mc(c1: Capsule, c2: Capsule, n: int, seed: int) -> ScaledEstimate:
    """Rejection estimate of the volume of ``c1`` symmetric-difference ``c2``.

    Points are uniform in the joint bounding box; ``hits`` counts points in
    exactly one capsule. Capsules need not be anchored at the origin.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    _same_dim(c1.seg.a, c2.seg.a)
    lo1, hi1 = _capsule_box(c1)
    lo2, hi2 = _capsule_box(c2)
    lo, hi = np.minimum(lo1, lo2), np.maximum(hi1, hi2)
    box = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    hits = 0
    for size in _chunks(n, 1 << 18):
        pts = lo + (hi - lo) * rng.random((size, lo.size))
        in1 = batch_dist2_point_segment(pts, c1.seg.a, c1.seg.b) <= c1.radius**2
        in2 = batch_dist2_point_segment(pts, c2.seg.a, c2.seg.b) <= c2.radius**2
        hits += int(np.count_nonzero(in1 != in2))
    return ScaledEstimate(hits, n, box)


def symdiff_length_1d(x: float, y: float, rho: float) -> float:
    """Exact length of the symmetric difference of two 1-d capsules anchored at 0."""
    i1 = (min(0.0, x) - rho, max(0.0, x) + rho)
    i2 = (min(0.0, y) - rho, max(0.0, y) + rho)
    overlap = max(0.0, min(i1[1], i2[1]) - max(i1[0], i2[0]))
    return (i1[1] - i1[0]) + (i2[1] - i2[0]) - 2 * overlap


def _chunks(n: int, size: int):
    while n > 0:
        yield min(n, size)
        n -= size
