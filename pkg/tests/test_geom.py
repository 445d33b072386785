import math

import numpy as np
import pytest
from hypothesis import example, given
from hypothesis import strategies as st

from stochvis.geom import (Ball, Capsule, LineObstacle, Segment, batch_dist2_segment_segment,
                           best_projection, capsule_volume, cube_cells_per_axis,
                           dist_point_segment, dist_segment_line, dist_segment_segment,
                           projection_bounds_hold, sphere_cover, symdiff_length_1d,
                           symdiff_volume_mc, unit_ball_volume)

coord = st.floats(-5, 5, allow_nan=False)


def vec(d):
    return st.lists(coord, min_size=d, max_size=d).map(np.array)


def grid_min(f, m=801):
    """Brute-force minimum of f(t, u) over a (t, u) grid."""
    t = np.linspace(0, 1, m)[:, None]
    u = np.linspace(0, 1, m)[None, :]
    return float(np.min(f(t, u)))


# --- distances ----------------------------------------------------------------


def test_point_segment_examples():
    s = Segment([-1, 0], [1, 0])
    assert dist_point_segment([0, 1], s) == 1.0
    assert dist_point_segment([2, 0], s) == 1.0
    assert dist_point_segment([3, 4, 0], Segment([0, 0, 0], [0, 0, 0])) == 5.0


def test_segment_line_examples():
    s = Segment([0, 0, 0], [1, 0, 0])
    assert dist_segment_line(s, LineObstacle([0, 0, 1], [0, 1, 0], 1.0)) == pytest.approx(1.0)
    x_axis = LineObstacle([0, 0, 0], [1, 0, 0], 1.0)
    assert dist_segment_line(s, x_axis) == 0.0
    assert dist_segment_line(Segment([0, 0, 2], [0, 0, 3]), x_axis) == pytest.approx(2.0)


def test_segment_line_matches_grid():
    # grid over t in [0,1] and u in [-5, 5] along the line
    a, b = np.array([0.0, 0, 2]), np.array([0.0, 0, 3])

    def f(t, u):
        p = a + t[..., None] * (b - a)
        q = (10 * u - 5)[..., None] * np.array([1.0, 0, 0])
        return np.linalg.norm(p - q, axis=-1)

    assert grid_min(f) == pytest.approx(2.0, abs=1e-9)


def test_segment_segment_examples():
    assert dist_segment_segment(Segment([0, 0], [1, 0]), Segment([0, 1], [1, 1])) == 1.0
    assert dist_segment_segment(Segment([-1, 0], [1, 0]), Segment([0, -1], [0, 1])) == 0.0
    skew = dist_segment_segment(Segment([0, 0, 0], [1, 0, 0]), Segment([0, 1, 1], [1, 1, 1]))
    assert skew == pytest.approx(math.sqrt(2), rel=1e-14)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        Segment([0, 0], [0, 0, 1])
    with pytest.raises(ValueError):
        dist_point_segment([0, 0, 0], Segment([0, 0], [1, 0]))
    with pytest.raises(ValueError):
        dist_segment_segment(Segment([0, 0], [1, 0]), Segment([0, 0, 0], [1, 0, 0]))


def test_line_obstacle_invariants():
    with pytest.raises(ValueError):
        LineObstacle([0, 0, 0], [1, 1, 0], 1.0)
    with pytest.raises(ValueError):
        LineObstacle([1, 0, 0], [1, 0, 0], 1.0)
    line = LineObstacle.through([3, 2, 0], [2, 0, 0], 0.5)
    np.testing.assert_allclose(line.point, [0, 2, 0])


@given(vec(3), vec(3), vec(3), vec(3))
# nearly parallel segments meeting at a shared endpoint
@example(np.array([0.0, 1, 0]), np.zeros(3), np.zeros(3), np.array([0.0, 2.0, 1.23e-7]))
def test_segment_segment_against_grid(p1, q1, p2, q2):
    exact = dist_segment_segment(Segment(p1, q1), Segment(p2, q2))

    def f(t, u):
        return np.linalg.norm((p1 + t[..., None] * (q1 - p1)) - (p2 + u[..., None] * (q2 - p2)), axis=-1)

    brute = grid_min(f, 201)
    # grid spacing bounds the brute-force excess
    slack = (np.linalg.norm(q1 - p1) + np.linalg.norm(q2 - p2)) / 200 + 1e-9
    assert exact <= brute + 1e-9
    assert brute <= exact + slack


@given(vec(3), vec(3), vec(3), vec(3))
def test_segment_segment_symmetric(p1, q1, p2, q2):
    d12 = batch_dist2_segment_segment(p1, q1, p2, q2)
    d21 = batch_dist2_segment_segment(p2, q2, p1, q1)
    d_rev = batch_dist2_segment_segment(q1, p1, q2, p2)
    assert d12 >= 0
    assert d12 == pytest.approx(d21, abs=1e-9)
    assert d12 == pytest.approx(d_rev, abs=1e-9)


@given(vec(4), vec(4), vec(4), vec(4))
def test_point_distance_is_lipschitz(p, q, a, b):
    s = Segment(a, b)
    assert abs(dist_point_segment(p, s) - dist_point_segment(q, s)) <= np.linalg.norm(p - q) + 1e-9


@given(vec(3), vec(3), vec(3), vec(3))
def test_segment_line_not_above_segment_segment(a, b, p, v):
    # a line contains every segment along it, so it can only be closer
    if np.linalg.norm(v) < 1e-3:
        return
    line = LineObstacle.through(p, v, 1.0)
    chord = Segment(line.point - 50 * line.direction, line.point + 50 * line.direction)
    s = Segment(a, b)
    assert dist_segment_line(s, line) <= dist_segment_segment(s, chord) + 1e-9


# --- volumes --------------------------------------------------------------------


def test_unit_ball_volume():
    assert unit_ball_volume(0) == 1.0
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_capsule_volume_examples():
    assert capsule_volume(2, 0, 1) == pytest.approx(math.pi)
    assert capsule_volume(1, 3, 1) == 5.0
    assert capsule_volume(3, 2, 1) == pytest.approx(10 * math.pi / 3)
    with pytest.raises(ValueError):
        capsule_volume(0, 1, 1)


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_capsule_volume_ball_case(d):
    assert capsule_volume(d, 0, 1.7) == pytest.approx(unit_ball_volume(d) * 1.7**d)


def test_capsule_volume_by_rejection(rng):
    # 10 pi / 3 for the d=3 capsule of length 2, radius 1
    n = 400_000
    pts = rng.uniform([-1, -1, -1], [3, 1, 1], size=(n, 3))
    t = np.clip(pts[:, 0] / 2, 0, 1)
    inside = np.sum((pts - t[:, None] * [2, 0, 0]) ** 2, axis=1) <= 1
    p = inside.mean()
    est, se = 16 * p, 16 * math.sqrt(p * (1 - p) / n)
    assert abs(est - 10 * math.pi / 3) < 3 * se


def test_symdiff_examples():
    c = Capsule.from_origin([3.0, 4.0], 1.0)
    est = symdiff_volume_mc(c, Capsule.from_origin([3.0, 4.0], 1.0), 1000, 0)
    assert est.value == 0 and est.se == 0
    assert symdiff_length_1d(3, 5, 1) == 2.0
    assert symdiff_length_1d(3, -5, 1) == pytest.approx(capsule_volume(1, 3, 1) + capsule_volume(1, 5, 1) - 2 * 2)
    with pytest.raises(ValueError):
        symdiff_volume_mc(c, c, 0, 0)


def test_symdiff_matches_grid_quadrature():
    # cells of size rho / 50 over the joint bounding box
    h = 1 / 50
    xs = np.arange(-1 + h / 2, 11, h)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    in1 = (np.abs(Y) <= 1) & (X >= 0) & (X <= 10) | (X**2 + Y**2 <= 1) | ((X - 10) ** 2 + Y**2 <= 1)
    in2 = (np.abs(X) <= 1) & (Y >= 0) & (Y <= 10) | (X**2 + Y**2 <= 1) | (X**2 + (Y - 10) ** 2 <= 1)
    quad = float(np.count_nonzero(in1 != in2)) * h * h
    est = symdiff_volume_mc(Capsule.from_origin([10, 0], 1), Capsule.from_origin([0, 10], 1), 400_000, 3)
    # grid boundary error is O(h * perimeter); small next to 3 SE here
    assert abs(est.value - quad) < 3 * est.se + 0.05


def test_symdiff_disjoint_is_sum():
    c1 = Capsule(Segment([1.0, 0, 0], [5.0, 0, 0]), 0.5)
    c2 = Capsule(Segment([0, 2.0, 0], [0, 6.0, 1.0]), 0.5)
    est = symdiff_volume_mc(c1, c2, 400_000, 5)
    assert abs(est.value - (c1.volume + c2.volume)) < 3 * est.se


# --- projection lemma --------------------------------------------------------------


def test_best_projection_examples():
    e = np.eye(3)
    i, px, py = best_projection(e[0], e[1])
    assert i == 2  # third axis, 0-based
    np.testing.assert_array_equal(px, e[0])
    np.testing.assert_array_equal(py, e[1])
    i, _, _ = best_projection(e[0], e[0])
    assert i == 1


def test_best_projection_errors():
    with pytest.raises(ValueError):
        best_projection([1, 0], [0, 1])
    with pytest.raises(ValueError):
        best_projection([0, 0, 0], [0, 1, 0])


@given(st.integers(3, 6), st.integers(0, 2**32 - 1))
def test_best_projection_admissible(d, seed):
    g = np.random.default_rng(seed)
    x, y = g.standard_normal(d), g.standard_normal(d)
    i, px, py = best_projection(x, y)
    assert projection_bounds_hold(x, y, i)
    # smallest admissible index
    assert not any(projection_bounds_hold(x, y, j) for j in range(i))
    assert px[i] == 0 and py[i] == 0


# --- sphere covers ---------------------------------------------------------------


def _audit(cover, pts):
    # chunked over centres so large covers stay within memory
    best = np.full(len(pts), np.inf)
    for lo in range(0, len(cover.centers), 20_000):
        c = cover.centers[lo:lo + 20_000]
        d2 = ((pts[:, None, :] - c[None, :, :]) ** 2).sum(-1)
        best = np.minimum(best, d2.min(axis=1))
    return np.sqrt(best).max()


def test_cover_d2_examples():
    cov = sphere_cover(2, 1.0, math.pi / 2)
    assert 2 <= len(cov) <= 8
    th = np.linspace(0, 2 * math.pi, int(2 * math.pi / (math.pi / 200)) + 1)
    assert _audit(cov, np.column_stack([np.cos(th), np.sin(th)])) <= math.pi / 2
    assert len(sphere_cover(2, 1.0, 2.0)) >= 2
    with pytest.raises(ValueError):
        sphere_cover(2, 1.0, 0.0)


def test_cover_d3_count_and_density(rng):
    cov = sphere_cover(3, 10.0, 1.0)
    assert len(cov) <= 20 * 100
    assert len(cov) == 6 * cube_cells_per_axis(3, 10.0, 1.0) ** 2
    np.testing.assert_allclose(np.linalg.norm(cov.centers, axis=1), 10.0)
    g = rng.standard_normal((10_000, 3))
    pts = 10 * g / np.linalg.norm(g, axis=1, keepdims=True)
    worst = max(_audit(cov, chunk) for chunk in np.array_split(pts, 20))
    assert worst <= 1.0


@given(st.integers(2, 4), st.floats(0.5, 5), st.floats(0.2, 2), st.integers(0, 1000))
def test_cover_density_property(d, r, delta, seed):
    if delta > 2 * r:
        return
    cov = sphere_cover(d, r, delta)
    g = np.random.default_rng(seed).standard_normal((300, d))
    pts = r * g / np.linalg.norm(g, axis=1, keepdims=True)
    assert _audit(cov, pts) <= delta * (1 + 1e-12)
