from __future__ import annotations

import math

import numpy as np
import pytest

from guidebot.config import LidarConfig, MappingConfig
from guidebot.geometry import Pose2D
from guidebot.grid import FREE, OCCUPIED, UNKNOWN, OccupancyGrid
from guidebot.mapping import (
    LogOddsGrid,
    NoObstacles,
    build_likelihood_field,
    obstacle_distances,
    update_map,
)
from guidebot.world import LidarScan, cast_lidar
from conftest import random_grid
from oracles import brute_nearest_occupied

CFG = MappingConfig()


def test_zero_beam_scan_is_noop():
    log = LogOddsGrid(20, 20, 0.1)
    scan = LidarScan(0, 0.0, 1.0, 5.0, np.empty(0))
    out = update_map(log, Pose2D(1.0, 1.0, 0.0), scan, CFG)
    assert np.array_equal(out.cells, log.cells)


def test_single_beam_hit_updates_endpoint_and_ray():
    log = LogOddsGrid(60, 20, 0.1)
    scan = LidarScan(1, 0.0, 0.1, 5.0, np.array([3.0]))
    pose = Pose2D(0.55, 1.05, 0.0)
    out = update_map(log, pose, scan, CFG)
    end_cell = (int((0.55 + 3.0) / 0.1), 10)
    assert out.cells[end_cell] == pytest.approx(CFG.l_occ)
    ray_cells = out.cells[6:end_cell[0], 10]
    assert np.allclose(ray_cells, CFG.l_free)
    # no endpoint update for a max-range beam
    log2 = LogOddsGrid(60, 20, 0.1)
    scan2 = LidarScan(1, 0.0, 0.1, 3.0, np.array([3.0]))
    out2 = update_map(log2, pose, scan2, CFG)
    assert (out2.cells > 0).sum() == 0


def test_updates_commute_below_clamp():
    log = LogOddsGrid(30, 30, 0.1)
    pose_a = Pose2D(1.05, 1.05, 0.0)
    pose_b = Pose2D(2.05, 2.05, 2.0)
    scan_a = LidarScan(5, -0.3, 0.3, 2.0, np.array([1.0, 1.2, 0.8, 1.5, 2.0]))
    scan_b = LidarScan(5, -0.3, 0.3, 2.0, np.array([0.5, 1.9, 1.1, 0.7, 1.3]))
    ab = update_map(update_map(log, pose_a, scan_a, CFG), pose_b, scan_b, CFG)
    ba = update_map(update_map(log, pose_b, scan_b, CFG), pose_a, scan_a, CFG)
    assert np.allclose(ab.cells, ba.cells, atol=1e-12)


def test_room_mapped_from_center_matches_walls(walled_grid):
    spec = LidarConfig(n_beams=180, max_range=8.0, noise_sigma=0.0)
    log = LogOddsGrid.like(walled_grid)
    rng = np.random.default_rng(0)
    for k in range(50):
        pose = Pose2D(3.0, 3.0, rng.uniform(-math.pi, math.pi))
        scan = cast_lidar(walled_grid, pose, spec, None)
        log = update_map(log, pose, scan, CFG)
    mapped = log.threshold()
    true_occ = np.argwhere(walled_grid.cells == OCCUPIED)
    got_occ = np.argwhere(mapped.cells == OCCUPIED)
    assert len(got_occ) > 0

    def hausdorff(a, b):
        best = 0.0
        for p in a:
            d = np.min(np.hypot(b[:, 0] - p[0], b[:, 1] - p[1]))
            best = max(best, float(d))
        return best

    # every mapped wall cell is within one cell of a true wall cell
    assert hausdorff(got_occ, true_occ) <= 1.0 + 1e-9
    # and the visible inner wall ring is recovered: check the inner ring
    inner = [c for c in true_occ if 1 <= c[0] <= 118 and 1 <= c[1] <= 118]
    assert len(inner) == 0  # walls are exactly the boundary ring here


def test_threshold_ternary():
    log = LogOddsGrid(2, 2, 0.1)
    log.cells[0, 0] = 1.0
    log.cells[1, 0] = -1.0
    t = log.threshold()
    assert t.cells[0, 0] == OCCUPIED
    assert t.cells[1, 0] == FREE
    assert t.cells[0, 1] == UNKNOWN


def test_occupied_cell_has_maximal_field_value():
    g = OccupancyGrid(10, 10, 0.1)
    g.cells[4, 4] = OCCUPIED
    field = build_likelihood_field(g, sigma_hit=0.2, p_rand=0.05)
    assert field.values[4, 4] == pytest.approx(1.0)
    assert field.values[4, 4] == field.values.max()
    assert field.values.min() > 0.0
    assert field.values.max() <= 1.0


def test_distance_transform_matches_brute_force():
    rng = np.random.default_rng(21)
    for _ in range(5):
        g = random_grid(rng, 30, 30, 0.1, 0.15)
        if not (g.cells == OCCUPIED).any():
            g.cells[3, 3] = OCCUPIED
        d = obstacle_distances(g)
        brute = brute_nearest_occupied(g)
        assert np.allclose(d, brute, atol=1e-12)


def test_fully_free_map_raises():
    g = OccupancyGrid(5, 5, 0.1)
    with pytest.raises(NoObstacles):
        build_likelihood_field(g, 0.2, 0.05)


def test_field_lookup_out_of_bounds_uses_floor():
    g = OccupancyGrid(5, 5, 0.1)
    g.cells[2, 2] = OCCUPIED
    field = build_likelihood_field(g, 0.2, 0.05)
    assert field.value_at(-1.0, -1.0) == pytest.approx(0.05)
    vals = field.values_at(np.array([-1.0, 0.25]), np.array([-1.0, 0.25]))
    assert vals[0] == pytest.approx(0.05)
    assert vals[1] == pytest.approx(field.values[2, 2])
