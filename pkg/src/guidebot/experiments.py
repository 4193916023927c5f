"""Canned experiment definitions shared by the scripts and the test suite:
the global-localization trial and the robot-only ablation baseline.
"""
from __future__ import annotations

import math
import os

import numpy as np

from .config import LidarConfig, MclConfig
from .geometry import Pose2D, Twist2D
from .grid import FREE, OCCUPIED, OccupancyGrid
from .localization import estimate_pose, init_uniform, mcl_step
from .mapping import build_likelihood_field
from .world import cast_lidar, step_robot

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "scenarios")

# Robot-only baseline: no user polygon, inflation sized to the robot body,
# and no user monitoring (the baseline ignores the user entirely).
ABLATION_OVERRIDES = {
    "harness": {
        "user_footprint_enabled": False,
        "inflation_radius": 0.35,
        "lost_user_abort": 1e9,
    }
}


def localization_room() -> OccupancyGrid:
    """A 10 m x 10 m storage room whose free space is an irregular set of
    chambers: a hall with a diagonal cut and a post, a chamfered annex,
    and a nook.  Every pose in it has a globally distinctive scan."""
    g = OccupancyGrid(50, 50, 0.2, Pose2D(0.0, 0.0, 0.0))
    g.cells[:, :] = OCCUPIED
    g.cells[6:44, 8:22] = FREE        # main hall
    g.cells[24:38, 22:40] = FREE      # north annex
    g.cells[6:16, 22:30] = FREE       # west nook
    for i in range(10):
        g.cells[34 + i : 44, 8 + i] = OCCUPIED   # diagonal cut, hall SE
    g.cells[18:21, 14:18] = OCCUPIED             # post in the hall
    for i in range(9):
        g.cells[29 + i : 38, 39 - i] = OCCUPIED  # chamfered annex corner
    return g


def localization_trajectory() -> tuple[Pose2D, list[Twist2D], float]:
    """Scripted 50-step tour: hall leg, turn into the annex, look-around."""
    start = Pose2D(1.6, 2.4, 0.0)
    cmds = (
        [Twist2D(0.4, 0.0)] * 20
        + [Twist2D(0.0, 1.0472)] * 3
        + [Twist2D(0.4, 0.0)] * 13
        + [Twist2D(0.0, 0.9)] * 8
        + [Twist2D(0.0, 0.0)] * 6
    )
    return start, cmds, 0.5


LOCALIZATION_LIDAR = LidarConfig(
    n_beams=90, angle_min=-math.pi, angle_max=math.pi, max_range=4.5,
    noise_sigma=0.01,
)

LOCALIZATION_MCL = MclConfig(
    n_particles=500,
    sigma_hit=0.35,
    p_rand=0.05,
    n_weight_beams=40,
    alphas=(0.1, 0.1, 0.3, 0.1),
)


def run_localization_trial(seed: int, n_steps: int = 50) -> float:
    """One global-localization trial; returns the final position error (m)."""
    room = localization_room()
    field = build_likelihood_field(room, LOCALIZATION_MCL.sigma_hit, LOCALIZATION_MCL.p_rand)
    start, cmds, dt = localization_trajectory()
    rng = np.random.default_rng(seed)
    ps = init_uniform(room, LOCALIZATION_MCL, rng)
    pose = start
    for cmd in cmds[:n_steps]:
        new_pose = step_robot(pose, cmd, dt)
        delta = new_pose.relative_to(pose)
        pose = new_pose
        scan = cast_lidar(room, pose, LOCALIZATION_LIDAR, rng)
        ps, _ = mcl_step(ps, delta, scan, field, room, LOCALIZATION_MCL, rng)
    est = estimate_pose(ps)
    return math.hypot(est.x - pose.x, est.y - pose.y)


def scenario_path(name: str) -> str:
    """Path of a bundled scenario file (corridor, atrium, cluttered)."""
    return os.path.abspath(os.path.join(SCENARIO_DIR, f"{name}.json"))
