from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from guidebot.config import CameraConfig, LidarConfig, RobotConfig, UserFollowConfig
from guidebot.geometry import Pose2D, Twist2D, wrap_angle
from guidebot.grid import OCCUPIED, OccupancyGrid
from guidebot.world import (
    SensorInsideObstacle,
    UserState,
    cast_lidar,
    clamp_twist,
    raycast,
    render_torso,
    step_robot,
    step_user,
)
from conftest import random_grid
from oracles import euler_step_robot, slab_raycast


# --- step_robot -----------------------------------------------------------

def test_zero_command_is_identity():
    p = step_robot(Pose2D(0, 0, 0), Twist2D(0, 0), 0.1)
    assert (p.x, p.y, p.theta) == (0.0, 0.0, 0.0)


def test_straight_line():
    p = step_robot(Pose2D(0, 0, 0), Twist2D(1.0, 0.0), 1.0)
    assert (p.x, p.y, p.theta) == pytest.approx((1.0, 0.0, 0.0))


def test_arc_matches_fine_euler():
    p = step_robot(Pose2D(0, 0, 0), Twist2D(1.0, 0.5), 1.0)
    q = euler_step_robot(Pose2D(0, 0, 0), Twist2D(1.0, 0.5), 1.0, 100000)
    assert p.x == pytest.approx(q.x, abs=1e-4)
    assert p.y == pytest.approx(q.y, abs=1e-4)
    assert p.theta == pytest.approx(q.theta, abs=1e-6)


@given(
    st.floats(-1.0, 1.0),
    st.floats(-1.0, 1.0),
    st.floats(-3.0, 3.0),
    st.floats(-0.6, 0.6),
    st.floats(-1.0, 1.0),
    st.floats(0.01, 1.0),
)
def test_step_robot_exactly_reversible(x, y, th, v, w, dt):
    start = Pose2D(x, y, th)
    fwd = step_robot(start, Twist2D(v, w), dt)
    back = step_robot(fwd, Twist2D(-v, -w), dt)
    assert math.hypot(back.x - start.x, back.y - start.y) < 1e-9
    assert abs(wrap_angle(back.theta - start.theta)) < 1e-9


def test_clamp_twist():
    cfg = RobotConfig()
    cmd, clamped = clamp_twist(Twist2D(5.0, -9.0), cfg)
    assert clamped
    assert cmd == Twist2D(cfg.v_max, -cfg.omega_max)
    cmd, clamped = clamp_twist(Twist2D(0.1, 0.1), cfg)
    assert not clamped


# --- step_user ------------------------------------------------------------

FOLLOW = UserFollowConfig(tau=1.0, noise_sigma=0.0)


def anchored_user(robot: Pose2D, cfg: RobotConfig) -> UserState:
    ax, ay = robot.transform_point(*cfg.anchor_offset)
    return UserState(Pose2D(ax, ay, robot.theta))


def test_user_at_anchor_is_fixed_point():
    robot = Pose2D(1.0, 2.0, 0.5)
    cfg = RobotConfig()
    user = anchored_user(robot, cfg)
    stepped = step_user(user, robot, cfg, FOLLOW, 0.1, None)
    assert stepped.pose.x == pytest.approx(user.pose.x, abs=1e-12)
    assert stepped.pose.y == pytest.approx(user.pose.y, abs=1e-12)
    assert stepped.pose.theta == pytest.approx(user.pose.theta, abs=1e-12)


def test_first_order_lag_closed_form():
    robot = Pose2D(0.0, 0.0, 0.0)
    cfg = RobotConfig()
    ax, ay = robot.transform_point(*cfg.anchor_offset)
    user = UserState(Pose2D(ax - 1.0, ay, 0.0))  # 1 m behind the anchor
    stepped = step_user(user, robot, cfg, FOLLOW, 1.0, None)
    moved = stepped.pose.x - user.pose.x
    assert moved == pytest.approx(1.0 - math.exp(-1.0), abs=1e-9)


def test_noise_is_zero_mean_over_seeded_steps():
    robot = Pose2D(0.0, 0.0, 0.0)
    cfg = RobotConfig()
    follow = UserFollowConfig(tau=0.8, noise_sigma=0.05)
    rng = np.random.default_rng(123)
    n = 1000
    deltas = np.empty((n, 2))
    for i in range(n):
        user = anchored_user(robot, cfg)
        stepped = step_user(user, robot, cfg, follow, 0.1, rng)
        deltas[i] = (stepped.pose.x - user.pose.x, stepped.pose.y - user.pose.y)
    bound = 3 * follow.noise_sigma / math.sqrt(n)
    assert abs(deltas[:, 0].mean()) < bound
    assert abs(deltas[:, 1].mean()) < bound


def test_same_seed_gives_identical_user_steps():
    robot = Pose2D(0.0, 0.0, 0.0)
    cfg = RobotConfig()
    follow = UserFollowConfig(noise_sigma=0.05)
    user = anchored_user(robot, cfg)
    a = step_user(user, robot, cfg, follow, 0.1, np.random.default_rng(9))
    b = step_user(user, robot, cfg, follow, 0.1, np.random.default_rng(9))
    assert a == b


# --- cast_lidar -----------------------------------------------------------

def test_empty_map_all_ranges_max(empty_grid):
    spec = LidarConfig(n_beams=90, max_range=2.0, noise_sigma=0.0)
    scan = cast_lidar(empty_grid, Pose2D(0, 0, 0.2), spec, None)
    assert np.all(scan.ranges == 2.0)


def test_wall_ahead_range(walled_grid):
    # east wall cells start at x = 5.95 in a 6 m room
    spec = LidarConfig(n_beams=1, angle_min=0.0, angle_max=0.1,
                       max_range=8.0, noise_sigma=0.0)
    scan = cast_lidar(walled_grid, Pose2D(2.95, 3.0, 0.0), spec, None)
    assert scan.ranges[0] == pytest.approx(3.0, abs=walled_grid.resolution)


def test_sensor_inside_obstacle(walled_grid):
    with pytest.raises(SensorInsideObstacle):
        cast_lidar(walled_grid, Pose2D(0.02, 3.0, 0.0),
                   LidarConfig(n_beams=4, max_range=2.0), None)


def test_raycast_matches_slab_oracle():
    rng = np.random.default_rng(3)
    for _ in range(6):
        g = random_grid(rng, 25, 25, 0.1, 0.2, keep_free=[(12, 12)])
        angs = rng.uniform(-math.pi, math.pi, 30)
        got = raycast(g, 1.25, 1.25, angs, 3.0)
        for a, r in zip(angs, got):
            want = slab_raycast(g, 1.25, 1.25, float(a), 3.0)
            assert r == pytest.approx(want, abs=1e-9)


def test_numba_and_numpy_paths_identical():
    rng = np.random.default_rng(4)
    for _ in range(5):
        g = random_grid(rng, 30, 30, 0.07, 0.25, keep_free=[(15, 15)])
        angs = rng.uniform(-math.pi, math.pi, 50)
        fast = raycast(g, 1.085, 1.085, angs, 3.0)
        slow = raycast(g, 1.085, 1.085, angs, 3.0, force_numpy=True)
        assert np.array_equal(fast, slow)


def test_ranges_monotone_under_obstacle_insertion():
    rng = np.random.default_rng(5)
    g = random_grid(rng, 30, 30, 0.1, 0.1, keep_free=[(15, 15)])
    angs = rng.uniform(-math.pi, math.pi, 60)
    before = raycast(g, 1.55, 1.55, angs, 4.0)
    g2 = g.copy()
    free_cells = np.argwhere(g2.cells != OCCUPIED)
    pick = free_cells[rng.integers(0, len(free_cells), 10)]
    for ix, iy in pick:
        if (ix, iy) != (15, 15):
            g2.cells[ix, iy] = OCCUPIED
    after = raycast(g2, 1.55, 1.55, angs, 4.0)
    assert np.all(after <= before + 1e-12)


def test_lidar_noise_seeded_and_bounded(walled_grid):
    spec = LidarConfig(n_beams=60, max_range=8.0, noise_sigma=0.02)
    a = cast_lidar(walled_grid, Pose2D(3, 3, 0), spec, np.random.default_rng(11))
    b = cast_lidar(walled_grid, Pose2D(3, 3, 0), spec, np.random.default_rng(11))
    assert np.array_equal(a.ranges, b.ranges)
    assert a.ranges.min() > 0 and a.ranges.max() <= spec.max_range


# --- render_torso ---------------------------------------------------------

CAM = CameraConfig(image_width=320, hfov=1.5, max_depth=3.0, depth_noise_sigma=0.0)
# camera at the origin with its optical axis along map +x
CAM_POSE = Pose2D(0.0, 0.0, -math.pi / 2)


def facing_camera_user(x_lat: float, y_fwd: float, phi: float = 0.0) -> UserState:
    # map frame: forward = +x, image-right = -y
    theta = wrap_angle(math.pi + phi)  # facing the camera, deviated by phi
    return UserState(Pose2D(y_fwd, -x_lat, theta), 0.45)


def test_frontoparallel_plate(empty_grid):
    obs = render_torso(CAM, CAM_POSE, facing_camera_user(0.0, 2.0), empty_grid, None)
    assert len(obs) > 5
    assert np.allclose(obs.depths, 2.0, atol=1e-9)
    centroid = float(np.mean(obs.columns + 0.5))
    assert abs(centroid - CAM.image_width / 2) <= 0.5


def test_rotated_plate_edge_depth_difference(empty_grid):
    phi = 0.35
    obs = render_torso(CAM, CAM_POSE, facing_camera_user(0.0, 2.0, phi), empty_grid, None)
    diff = obs.depths[-1] - obs.depths[0]
    # edge columns sit within a pixel of the plate ends
    quant = 2.0 * 2.0 / CAM.focal_px
    assert diff == pytest.approx(0.45 * math.sin(phi), abs=quant)


def test_user_behind_camera_gives_empty(empty_grid):
    obs = render_torso(CAM, CAM_POSE, facing_camera_user(0.0, -2.0), empty_grid, None)
    assert len(obs) == 0


def test_occlusion_drops_columns(empty_grid):
    clear = render_torso(CAM, CAM_POSE, facing_camera_user(0.0, 2.0), empty_grid, None)
    g = empty_grid.copy()
    ix = g.world_to_cell(1.0, 0.0)[0]
    for iy in range(50, 60):  # wall piece covering one side of the view
        g.cells[ix, iy] = OCCUPIED
    obs = render_torso(CAM, CAM_POSE, facing_camera_user(0.0, 2.0), g, None)
    assert 0 < len(obs) < len(clear)


def test_render_noise_seeded():
    g = OccupancyGrid(100, 100, 0.05, Pose2D(-2.5, -2.5, 0))
    cam = CameraConfig(depth_noise_sigma=0.02)
    a = render_torso(cam, CAM_POSE, facing_camera_user(0.1, 1.8), g, np.random.default_rng(2))
    b = render_torso(cam, CAM_POSE, facing_camera_user(0.1, 1.8), g, np.random.default_rng(2))
    assert np.array_equal(a.columns, b.columns)
    assert np.array_equal(a.depths, b.depths)
