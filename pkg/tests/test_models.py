import math

import numpy as np
import pytest
from scipy import stats

from stochvis.analytic import (ModelParams, RadiusLaw, ball_capacity, boolean_mu_ball,
                               cylinder_mu_ball)
from stochvis.geom import Ball, Capsule, Segment, unit_ball_volume
from stochvis.models import (BooleanScene, CylinderScene, InterlacementScene, TrajectoryConfig,
                             WindowSpec, _interlacement_engine, boolean_batch, cylinder_batch,
                             empty_frequency, interlacement_batch, load_scene, sample_boolean,
                             sample_cylinders, sample_interlacements, sample_scene, save_scene,
                             scene_empty)
from stochvis.stats import stream

BOOL = ModelParams("boolean", 2, 0.05, 1.0)
CYL = ModelParams("cylinders", 3, 0.1, 1.0)
BI = ModelParams("interlacements", 3, 0.1, 0.5)
BI_WINDOW = WindowSpec(1.0, 0.5)
FAST = TrajectoryConfig(step=4e-3)


def close(est, target, extra=0.0):
    return abs(est.p_hat - target) <= 3 * est.se + extra


def test_window_checks():
    with pytest.raises(ValueError):
        WindowSpec(0.0, 1.0)
    with pytest.raises(ValueError):
        WindowSpec(5.0, 0.5).check(BOOL)
    w = WindowSpec.for_radius(BOOL, 7.0)
    assert (w.R_w, w.margin, w.reach) == (7.0, 1.0, 8.0)


@pytest.mark.parametrize("params,window", [
    (BOOL.with_alpha(0.0), WindowSpec(5, 1)),
    (CYL.with_alpha(0.0), WindowSpec(5, 1)),
    (BI.with_alpha(0.0), BI_WINDOW),
])
def test_alpha_zero_gives_empty_scene(params, window):
    scene = sample_scene(params, window, stream(0), FAST)
    assert len(scene) == 0
    assert scene_empty(scene, Segment.from_origin(np.eye(params.d)[0] * window.R_w))


def test_test_shape_must_stay_in_window():
    scene = sample_boolean(BOOL, WindowSpec(5, 1), stream(1))
    with pytest.raises(ValueError):
        scene.meets(Segment.from_origin([6.0, 0.0]))


def test_ball_on_segment_blocks():
    scene = BooleanScene(BOOL, WindowSpec(10, 1), np.array([[5.0, 0.0]]), np.array([1.0]))
    assert not scene_empty(scene, Segment.from_origin([10.0, 0]))
    assert scene_empty(scene, Segment.from_origin([0, 10.0]))
    assert not scene_empty(scene, Ball([5.0, 0], 0.1))


# --- Boolean ------------------------------------------------------------------------


def test_boolean_mean_count():
    b = boolean_batch(BOOL, WindowSpec(5, 1), 20_000, stream(2))
    mean = BOOL.alpha * unit_ball_volume(2) * 6.0**2
    assert abs(b.counts.mean() - mean) <= 3 * math.sqrt(mean / b.counts.size)
    assert np.all(np.linalg.norm(b.centers, axis=1) <= 6.0)


def test_boolean_test_ball_law():
    est = empty_frequency(BOOL, WindowSpec(5, 1), Ball([2.0, 1.0], 1.5), 20_000, 3)[0]
    assert close(est, math.exp(-BOOL.alpha * boolean_mu_ball(2, BOOL.law, 1.5)))


def test_boolean_random_radii_law():
    law = RadiusLaw.discrete([0.5, 1.5], [0.5, 0.5])
    p = ModelParams("boolean", 3, 0.05, law)
    est = empty_frequency(p, WindowSpec(3, 1.5), Ball([1.0, 0, 0], 1.0), 20_000, 4)[0]
    assert close(est, math.exp(-p.alpha * boolean_mu_ball(3, law, 1.0)))


def test_boolean_restriction_consistency():
    K = Ball([1.0, -1.0], 1.0)
    a = empty_frequency(BOOL, WindowSpec(3, 1), K, 20_000, 5)[0]
    b = empty_frequency(BOOL, WindowSpec(6, 1), K, 20_000, 6)[0]
    assert abs(a.p_hat - b.p_hat) <= 3 * math.hypot(a.se, b.se)


# --- cylinders -----------------------------------------------------------------------


def test_cylinder_mean_count():
    b = cylinder_batch(CYL, WindowSpec(5, 1), 20_000, stream(7))
    mean = CYL.alpha * unit_ball_volume(2) * 6.0**2
    assert abs(b.counts.mean() - mean) <= 3 * math.sqrt(mean / b.counts.size)
    np.testing.assert_allclose(np.einsum("ij,ij->i", b.points, b.directions), 0, atol=1e-12)
    assert np.all(np.linalg.norm(b.points, axis=1) <= 6.0)


@pytest.mark.parametrize("d", [2, 3])
def test_cylinder_test_ball_law(d):
    p = ModelParams("cylinders", d, 0.1, 1.0)
    K = Ball(np.r_[1.0, np.zeros(d - 1)], 1.0)
    est = empty_frequency(p, WindowSpec(3, 1), K, 20_000, 8)[0]
    assert close(est, math.exp(-p.alpha * cylinder_mu_ball(d, 1.0, 1.0)))


def test_cylinder_isotropy_chi2():
    # blocking counts of [0, 5u] over 8 directions from one set of scenes
    b = cylinder_batch(CYL, WindowSpec(5, 1), 20_000, stream(9))
    dirs = stream(10).standard_normal((8, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    blocked = np.array([b.meets(Segment.from_origin(5 * u)).sum() for u in dirs])
    # counts are dependent (same scenes); the chi-square here is only a smoke alarm
    table = np.vstack([blocked, b.size - blocked])
    assert stats.chi2_contingency(table)[1] > 1e-3


def test_cylinder_scene_objects():
    scene = sample_cylinders(CYL, WindowSpec(5, 1), stream(11))
    for ob in scene.obstacles:
        assert ob.radius == 1.0


# --- interlacements -----------------------------------------------------------------


def test_interlacement_mean_count():
    counts, _, _ = _interlacement_engine(BI, BI_WINDOW, FAST, 20_000, stream(12))
    mean = BI.alpha * ball_capacity(3, BI_WINDOW.reach)
    assert abs(counts.mean() - mean) <= 3 * math.sqrt(mean / counts.size)


def test_interlacement_test_ball_law_and_refinement():
    K = Ball([0, 0, 0], 0.5)
    f_h, f_h2 = empty_frequency(BI, BI_WINDOW, K, 6000, 13, traj=FAST, levels=2)
    exact = math.exp(-BI.alpha * ball_capacity(3, 1.0))
    margin = abs(f_h.p_hat - f_h2.p_hat) / (math.sqrt(2) - 1)
    assert close(f_h2, exact, margin)
    assert abs(f_h.p_hat - f_h2.p_hat) < 2 * f_h2.se
    # missing excursions between grid points can only make the coarse path see less
    assert f_h.hits >= f_h2.hits


def test_interlacement_scene_structure():
    traj = TrajectoryConfig(step=1e-2)
    batch = interlacement_batch(BI.with_alpha(0.3), BI_WINDOW, 20, stream(14), traj)
    R = BI_WINDOW.reach
    for i in range(batch.size):
        scene = batch.scene(i)
        for pieces in scene.trajectories:
            # a forward piece and a backward piece both start at the entry point
            starts = [np.linalg.norm(p[0]) for p in pieces]
            assert sum(abs(s - R) < 1e-12 for s in starts) >= 2
            for poly in pieces:
                steps = np.linalg.norm(np.diff(poly, axis=0), axis=1)
                assert steps.max() <= 10 * math.sqrt(traj.step * 3)
            backward = pieces[-1]
            assert np.all(np.linalg.norm(backward, axis=1) >= R * (1 - 1e-12))


def test_interlacement_queries_match_stored_scenes():
    # on-the-fly hit flags and the stored polylines describe the same paths
    K = Segment.from_origin([1.0, 0, 0])
    counts, hits, pieces = _interlacement_engine(BI.with_alpha(0.5), BI_WINDOW, FAST, 200,
                                                 stream(15), [K], store=True)
    starts = np.concatenate([[0], np.cumsum(counts)])
    traj = FAST
    for i in range(200):
        scene = InterlacementScene(BI, BI_WINDOW, traj, pieces[starts[i]:starts[i + 1]])
        assert scene.meets(K) == hits[0, 0, i]


def test_interlacement_forward_independent_of_backward():
    K = Ball([0, 0, 0], 0.5)
    a = _interlacement_engine(BI, BI_WINDOW, FAST, 300, stream(16), [K])
    b = _interlacement_engine(BI, BI_WINDOW, FAST, 300, stream(16), [K], backward=True)
    assert np.array_equal(a[1], b[1])


def test_sample_interlacements_rejects_bad_step():
    with pytest.raises(ValueError):
        sample_interlacements(BI, BI_WINDOW, 0.0, stream(0))
    with pytest.raises(ValueError):
        ModelParams("interlacements", 2, 0.1, 1.0)


# --- determinism and serialisation ------------------------------------------------


@pytest.mark.parametrize("params,window", [
    (BOOL, WindowSpec(5, 1)), (CYL, WindowSpec(5, 1)), (BI.with_alpha(0.3), BI_WINDOW)])
def test_scenes_are_deterministic(params, window):
    a = sample_scene(params, window, stream(17), FAST).arrays()
    b = sample_scene(params, window, stream(17), FAST).arrays()
    for k in a:
        assert np.array_equal(a[k], b[k])


@pytest.mark.parametrize("params,window", [
    (ModelParams("boolean", 2, 0.2, RadiusLaw.discrete([0.5, 1.0], [0.5, 0.5])), WindowSpec(4, 1)),
    (CYL, WindowSpec(5, 1)),
    (BI.with_alpha(0.3), BI_WINDOW)])
def test_save_load_roundtrip(params, window, tmp_path):
    scene = sample_scene(params, window, stream(18), FAST)
    path = tmp_path / "scene.npz"
    save_scene(scene, path)
    again = load_scene(path)
    assert again.model == scene.model and len(again) == len(scene)
    assert again.params.alpha == params.alpha
    for k, v in scene.arrays().items():
        assert np.array_equal(again.arrays()[k], v)
    probe = Capsule.from_origin(np.eye(params.d)[0] * window.R_w * 0.9, 0.05)
    assert again.meets(probe) == scene.meets(probe)


def test_scene_types():
    assert isinstance(sample_boolean(BOOL, WindowSpec(5, 1), stream(0)), BooleanScene)
    assert isinstance(sample_cylinders(CYL, WindowSpec(5, 1), stream(0)), CylinderScene)
    with pytest.raises(ValueError):
        sample_boolean(CYL, WindowSpec(5, 1), stream(0))
