"""Ground-truth world: kinematics, user-follow behavior, and sensor models.

All stochastic operations take an explicit numpy Generator; identical
generator state gives bit-identical outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._dda import cast_rays
from .config import CameraConfig, LidarConfig, RobotConfig, UserFollowConfig
from .geometry import Pose2D, Twist2D, wrap_angle
from .grid import FREE, OccupancyGrid

EPS_OMEGA = 1e-6


class SensorInsideObstacle(ValueError):
    """Sensor pose is not on a free cell."""


@dataclass(frozen=True)
class UserState:
    """Ground-truth user: torso center pose (theta = facing) and width."""

    pose: Pose2D
    torso_width: float = 0.45

    def __post_init__(self):
        if self.torso_width <= 0:
            raise ValueError("torso_width must be positive")


@dataclass(frozen=True)
class LidarScan:
    """One sweep of range returns; ranges[k] pairs with spec.beam_angles()[k]."""

    n_beams: int
    angle_min: float
    angle_max: float
    max_range: float
    ranges: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.ranges, dtype=float)
        object.__setattr__(self, "ranges", r)
        if len(r) != self.n_beams:
            raise ValueError("ranges length must equal n_beams")
        if len(r) and (r.min() <= 0.0 or r.max() > self.max_range + 1e-12):
            raise ValueError("ranges must lie in (0, max_range]")

    def beam_angles(self) -> np.ndarray:
        return self.angle_min + (self.angle_max - self.angle_min) * np.arange(
            self.n_beams
        ) / self.n_beams


@dataclass(frozen=True)
class TorsoObservation:
    """Per-column depth of the visible torso plate.

    `columns` are strictly increasing pixel indices; `depths` are the
    matching distances along the camera's optical axis.  Both may be empty
    when the user is out of view.
    """

    columns: np.ndarray
    depths: np.ndarray
    camera: CameraConfig

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=int)
        deps = np.asarray(self.depths, dtype=float)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "depths", deps)
        if len(cols) != len(deps):
            raise ValueError("columns and depths must pair up")
        if len(cols):
            if np.any(np.diff(cols) <= 0):
                raise ValueError("pixel columns must be strictly increasing")
            if deps.min() <= 0.0 or deps.max() > self.camera.max_depth + 1e-12:
                raise ValueError("depths must lie in (0, max_depth]")

    def __len__(self) -> int:
        return len(self.columns)


def step_robot(pose: Pose2D, cmd: Twist2D, dt: float) -> Pose2D:
    """Exact unicycle arc integration over one step.

    Below EPS_OMEGA the translation follows the chord heading
    theta + omega*dt/2, which keeps the step exactly reversible.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    v, w = cmd.v, cmd.omega
    th = pose.theta
    if abs(w) < EPS_OMEGA:
        mid = th + 0.5 * w * dt
        return Pose2D(
            pose.x + v * dt * math.cos(mid),
            pose.y + v * dt * math.sin(mid),
            th + w * dt,
        )
    th1 = th + w * dt
    r = v / w
    return Pose2D(
        pose.x + r * (math.sin(th1) - math.sin(th)),
        pose.y - r * (math.cos(th1) - math.cos(th)),
        th1,
    )


def clamp_twist(cmd: Twist2D, cfg: RobotConfig) -> tuple[Twist2D, bool]:
    """Clamp a command to the robot's absolute limits; flags if it changed."""
    v = min(cfg.v_max, max(cfg.v_min, cmd.v))
    w = min(cfg.omega_max, max(-cfg.omega_max, cmd.omega))
    return Twist2D(v, w), (v != cmd.v or w != cmd.omega)


def rate_limit_twist(
    cmd: Twist2D, current: Twist2D, cfg: RobotConfig, dt: float
) -> tuple[Twist2D, bool]:
    """Shape a command to the acceleration envelope reachable from the
    currently executed twist within one tick.

    Commands sampled from the dynamic window pass through unchanged (the
    window uses the same bounds); only out-of-envelope requests such as
    the planner's stop-and-rotate recovery get ramped.
    """
    v = min(current.v + cfg.a_max * dt, max(current.v - cfg.a_max * dt, cmd.v))
    w = min(current.omega + cfg.alpha_max * dt,
            max(current.omega - cfg.alpha_max * dt, cmd.omega))
    return Twist2D(v, w), (v != cmd.v or w != cmd.omega)


def anchor_point(robot_pose: Pose2D, cfg: RobotConfig) -> tuple[float, float]:
    """Grip-point position in the map frame."""
    return robot_pose.transform_point(*cfg.anchor_offset)


def step_user(
    user: UserState,
    robot_pose: Pose2D,
    robot_cfg: RobotConfig,
    follow_cfg: UserFollowConfig,
    dt: float,
    rng: np.random.Generator | None = None,
) -> UserState:
    """Relax the user toward the grip anchor with a first-order lag.

    Facing relaxes toward the direction of this step's own motion, or
    toward the robot heading when the step is (numerically) stationary.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    ax, ay = anchor_point(robot_pose, robot_cfg)
    decay = math.exp(-dt / follow_cfg.tau)
    nx = ax + (user.pose.x - ax) * decay
    ny = ay + (user.pose.y - ay) * decay
    if rng is not None and follow_cfg.noise_sigma > 0:
        nx += follow_cfg.noise_sigma * rng.standard_normal()
        ny += follow_cfg.noise_sigma * rng.standard_normal()
    dx, dy = nx - user.pose.x, ny - user.pose.y
    if math.hypot(dx, dy) < 1e-9:
        target = robot_pose.theta
    else:
        target = math.atan2(dy, dx)
    nth = user.pose.theta + (1.0 - decay) * wrap_angle(target - user.pose.theta)
    return UserState(Pose2D(nx, ny, nth), user.torso_width)


def raycast(
    grid: OccupancyGrid,
    ox: float,
    oy: float,
    angles: np.ndarray,
    caps,
    force_numpy: bool = False,
) -> np.ndarray:
    """Exact DDA raycast of many beams at once.

    Returns, per beam, the distance to the boundary of the first non-free
    cell (out-of-bounds counts as non-free), capped at `caps` (scalar or
    per-beam array).  The start cell itself is not tested.
    """
    res = grid.resolution
    gx = (ox - grid.origin.x) / res
    gy = (oy - grid.origin.y) / res
    return cast_rays(
        grid.cells, grid.width, grid.height, res, gx, gy, angles, caps,
        force_numpy=force_numpy,
    )


def cast_lidar(
    grid: OccupancyGrid,
    sensor_pose: Pose2D,
    spec: LidarConfig,
    rng: np.random.Generator | None = None,
) -> LidarScan:
    """Range scan by grid traversal, optionally with Gaussian range noise."""
    ix, iy = grid.world_to_cell(sensor_pose.x, sensor_pose.y)
    if grid.cell_state(ix, iy) != FREE:
        raise SensorInsideObstacle(f"sensor cell ({ix}, {iy}) is not free")
    angles = sensor_pose.theta + spec.beam_angles()
    ranges = raycast(grid, sensor_pose.x, sensor_pose.y, angles, spec.max_range)
    if rng is not None and spec.noise_sigma > 0:
        ranges = ranges + spec.noise_sigma * rng.standard_normal(spec.n_beams)
        ranges = np.clip(ranges, 1e-9, spec.max_range)
    return LidarScan(spec.n_beams, spec.angle_min, spec.angle_max, spec.max_range, ranges)


def torso_segment(user: UserState) -> tuple[np.ndarray, np.ndarray]:
    """Map-frame endpoints of the flat torso plate (perpendicular to facing)."""
    c = np.array([user.pose.x, user.pose.y])
    lateral = np.array([-math.sin(user.pose.theta), math.cos(user.pose.theta)])
    half = 0.5 * user.torso_width
    return c - half * lateral, c + half * lateral


def render_torso(
    camera: CameraConfig,
    cam_pose: Pose2D,
    user: UserState,
    grid: OccupancyGrid,
    rng: np.random.Generator | None = None,
) -> TorsoObservation:
    """Project the torso plate onto the camera scanline.

    A column is emitted when its ray hits the plate in front of the camera,
    within max_depth, and no occupied cell sits on the ray closer than the
    plate.  An empty observation is a valid output.
    """
    p0, p1 = torso_segment(user)
    x0, y0 = cam_pose.inverse_transform_point(p0[0], p0[1])
    x1, y1 = cam_pose.inverse_transform_point(p1[0], p1[1])
    w = camera.image_width
    f = camera.focal_px
    s = (np.arange(w) + 0.5 - w / 2.0) / f
    dx, dy = x1 - x0, y1 - y0
    denom = dx - s * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (s * y0 - x0) / denom
        depth = y0 + q * dy
    valid = (np.abs(denom) > 1e-12) & (q >= 0.0) & (q <= 1.0)
    valid &= np.isfinite(depth) & (depth > 1e-9) & (depth <= camera.max_depth)
    cols = np.nonzero(valid)[0]
    if len(cols) == 0:
        return TorsoObservation(np.empty(0, int), np.empty(0), camera)
    depths = depth[cols]
    s_hit = s[cols]
    ray_len = depths * np.sqrt(1.0 + s_hit * s_hit)
    # Ray of column u points along (s_u, 1) in the camera frame.
    ray_angles = cam_pose.theta + np.arctan2(1.0, s_hit)
    obstacle_t = raycast(grid, cam_pose.x, cam_pose.y, ray_angles, ray_len)
    visible = obstacle_t >= ray_len - 1e-9
    cols = cols[visible]
    depths = depths[visible]
    if rng is not None and camera.depth_noise_sigma > 0:
        depths = depths + camera.depth_noise_sigma * rng.standard_normal(len(depths))
        depths = np.clip(depths, 1e-9, camera.max_depth)
    return TorsoObservation(cols, depths, camera)
