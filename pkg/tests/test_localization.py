from __future__ import annotations

import math

import numpy as np
import pytest

from guidebot.config import LidarConfig, MclConfig
from guidebot.geometry import Pose2D
from guidebot.grid import OCCUPIED, OccupancyGrid
from guidebot.localization import (
    ParticleSet,
    estimate_pose,
    init_gaussian,
    init_uniform,
    low_variance_resample,
    mcl_step,
    scan_weights,
)
from guidebot.mapping import build_likelihood_field
from guidebot.world import LidarScan, cast_lidar
from guidebot import experiments


def small_map():
    g = OccupancyGrid(40, 40, 0.1)
    g.cells[0, :] = g.cells[-1, :] = g.cells[:, 0] = g.cells[:, -1] = OCCUPIED
    g.cells[18:22, 18:22] = OCCUPIED
    return g


CFG = MclConfig(n_particles=100)


def test_identity_prediction_keeps_poses():
    g = small_map()
    ps = ParticleSet(np.tile([1.0, 2.0, 0.5], (10, 1)), np.full(10, 0.1))
    cfg = MclConfig(n_particles=10, alphas=(0.0, 0.0, 0.0, 0.0))
    out, events = mcl_step(
        ps, Pose2D(0.0, 0.0, 0.0), None, None, g, cfg, np.random.default_rng(0)
    )
    assert np.allclose(out.poses, ps.poses)
    assert events == []


def test_weights_sum_to_one_after_update():
    g = small_map()
    field = build_likelihood_field(g, 0.2, 0.05)
    spec = LidarConfig(n_beams=60, max_range=5.0, noise_sigma=0.0)
    true_pose = Pose2D(1.0, 1.0, 0.3)
    scan = cast_lidar(g, true_pose, spec, None)
    rng = np.random.default_rng(1)
    ps = init_gaussian(true_pose, MclConfig(n_particles=100), rng)
    out, _ = mcl_step(ps, Pose2D(0, 0, 0), scan, field, g, MclConfig(n_particles=100), rng)
    assert out.weights.sum() == pytest.approx(1.0, abs=1e-9)


def test_likelihood_dominance_true_vs_decoy():
    g = small_map()
    field = build_likelihood_field(g, 0.15, 0.05)
    spec = LidarConfig(n_beams=60, max_range=5.0, noise_sigma=0.0)
    true_pose = Pose2D(1.0, 1.0, 0.0)
    decoy_pose = Pose2D(2.4, 2.8, 1.3)  # different surroundings
    scan = cast_lidar(g, true_pose, spec, None)
    n = 50
    poses = np.vstack(
        [np.tile([true_pose.x, true_pose.y, true_pose.theta], (n, 1)),
         np.tile([decoy_pose.x, decoy_pose.y, decoy_pose.theta], (n, 1))]
    )
    like, _ = scan_weights(poses, scan, field, 30)
    assert like[:n].sum() > like[n:].sum()


def test_estimate_pose_degenerate_set():
    ps = ParticleSet(np.tile([1.0, 2.0, 0.5], (4, 1)), np.full(4, 0.25))
    est = estimate_pose(ps)
    assert (est.x, est.y, est.theta) == pytest.approx((1.0, 2.0, 0.5))


def test_estimate_pose_circular_mean():
    poses = np.array([[0.0, 0.0, 3.0], [0.0, 0.0, -3.0]])
    est = estimate_pose(ParticleSet(poses, np.array([0.5, 0.5])))
    assert abs(est.theta) == pytest.approx(math.pi, abs=1e-9)


def test_estimate_pose_matches_direct_recomputation():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = 50
        poses = rng.uniform(-3, 3, (n, 3))
        w = rng.random(n)
        w /= w.sum()
        est = estimate_pose(ParticleSet(poses, w))
        x = float(np.sum(w * poses[:, 0]))
        y = float(np.sum(w * poses[:, 1]))
        th = math.atan2(
            float(np.sum(w * np.sin(poses[:, 2]))),
            float(np.sum(w * np.cos(poses[:, 2]))),
        )
        assert est.x == pytest.approx(x, abs=1e-12)
        assert est.y == pytest.approx(y, abs=1e-12)
        assert est.theta == pytest.approx(th, abs=1e-12)


def test_low_variance_resample_frequencies():
    rng = np.random.default_rng(11)
    n = 20
    weights = rng.random(n)
    weights /= weights.sum()
    poses = np.arange(n, dtype=float).reshape(-1, 1).repeat(3, axis=1)
    counts = np.zeros(n)
    trials = 10_000
    for _ in range(trials):
        out = low_variance_resample(poses, weights, rng)
        idx, c = np.unique(out[:, 0].astype(int), return_counts=True)
        counts[idx] += c
    total = trials * n
    freq = counts / total
    sigma = np.sqrt(weights * (1 - weights) / total)
    assert np.all(np.abs(freq - weights) <= 3 * sigma + 1e-12)


def test_particle_count_constant_across_resampling():
    g = small_map()
    field = build_likelihood_field(g, 0.2, 0.05)
    spec = LidarConfig(n_beams=40, max_range=5.0, noise_sigma=0.0)
    scan = cast_lidar(g, Pose2D(1.0, 1.0, 0.0), spec, None)
    rng = np.random.default_rng(3)
    cfg = MclConfig(n_particles=80)
    ps = init_uniform(g, cfg, rng)
    for _ in range(5):
        ps, _ = mcl_step(ps, Pose2D(0.01, 0.0, 0.0), scan, field, g, cfg, rng)
        assert len(ps) == 80
        assert ps.weights.sum() == pytest.approx(1.0, abs=1e-9)


def test_degenerate_belief_reinitializes():
    g = small_map()
    field = build_likelihood_field(g, 0.2, 0.05)
    # hand-built scan whose endpoints are far outside -> zero gated weights
    scan = LidarScan(4, -0.5, 0.5, 50.0, np.full(4, 30.0))
    poses = np.tile([1.0, 1.0, 0.0], (10, 1))
    poses[:, 0] = -50.0  # every particle outside the map -> gated to zero
    ps = ParticleSet(poses, np.full(10, 0.1))
    out, events = mcl_step(
        ps, Pose2D(0, 0, 0), scan, field, g, MclConfig(n_particles=10),
        np.random.default_rng(0),
    )
    assert "degenerate_belief" in events
    assert len(out) == 10
    for x, y, _ in out.poses:
        assert g.free_at_point(x, y)


def test_convergence_smoke():
    errs = [experiments.run_localization_trial(seed) for seed in range(5)]
    assert sum(e < 0.4 for e in errs) >= 4
