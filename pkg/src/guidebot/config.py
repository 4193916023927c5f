"""Dataclass configuration for every subsystem.

Defaults model a small differential-drive guide robot with a rear-facing
depth camera aimed at the person holding its grip bar, which sits behind
and to the right of the base.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .geometry import Pose2D, is_convex, point_in_polygon, wrap_angle

# Grip point of the hand-hold in the robot frame (x forward, y left):
# behind the base and to its right.
DEFAULT_ANCHOR = (-0.55, -0.35)


def camera_aimed_at(target_x: float, target_y: float) -> Pose2D:
    """Extrinsic pose of a camera at the robot origin whose optical axis
    points at a robot-frame target.

    The camera observation frame is (x = image-right, y = forward), so the
    extrinsic rotation is the bearing to the target minus pi/2.
    """
    bearing = math.atan2(target_y, target_x)
    return Pose2D(0.0, 0.0, wrap_angle(bearing - math.pi / 2.0))


def _default_body() -> np.ndarray:
    # 36 cm square base, origin at the center.
    h = 0.18
    return np.array([[-h, -h], [h, -h], [h, h], [-h, h]])


@dataclass
class RobotConfig:
    """Kinematic limits, body shape, and sensor mounts."""

    v_max: float = 0.6
    v_min: float = 0.0
    omega_max: float = 1.0
    a_max: float = 0.2           # keeps worst-case jerk 2*a_max/dt under bound
    alpha_max: float = 1.2
    body_polygon: np.ndarray = field(default_factory=_default_body)
    camera_extrinsics: Pose2D = field(
        default_factory=lambda: camera_aimed_at(*DEFAULT_ANCHOR)
    )
    lidar_extrinsics: Pose2D = field(default_factory=lambda: Pose2D(0.0, 0.0, 0.0))
    anchor_offset: tuple[float, float] = DEFAULT_ANCHOR

    def __post_init__(self):
        if not (self.v_min <= 0.0 <= self.v_max):
            raise ValueError("require v_min <= 0 <= v_max")
        if self.a_max <= 0 or self.alpha_max <= 0:
            raise ValueError("acceleration limits must be positive")
        self.body_polygon = np.asarray(self.body_polygon, dtype=float)
        if not is_convex(self.body_polygon):
            raise ValueError("body_polygon must be convex")
        if not point_in_polygon(0.0, 0.0, self.body_polygon):
            raise ValueError("body_polygon must contain the origin")


@dataclass
class CameraConfig:
    """Pinhole depth camera over one scanline."""

    image_width: int = 320
    hfov: float = 1.5
    max_depth: float = 3.0
    depth_noise_sigma: float = 0.01

    def __post_init__(self):
        if self.image_width < 2:
            raise ValueError("image_width must be >= 2")
        if not (0.0 < self.hfov < math.pi):
            raise ValueError("hfov must be in (0, pi)")

    @property
    def focal_px(self) -> float:
        return self.image_width / (2.0 * math.tan(self.hfov / 2.0))


@dataclass
class LidarConfig:
    """Planar range scanner.  Beam k points at
    angle_min + k * (angle_max - angle_min) / n_beams (endpoint exclusive)."""

    n_beams: int = 180
    angle_min: float = -math.pi
    angle_max: float = math.pi
    max_range: float = 6.0
    noise_sigma: float = 0.01

    def __post_init__(self):
        if self.n_beams < 1:
            raise ValueError("n_beams must be >= 1")
        if self.angle_max <= self.angle_min:
            raise ValueError("angle_max must exceed angle_min")
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")

    def beam_angles(self) -> np.ndarray:
        return self.angle_min + (self.angle_max - self.angle_min) * np.arange(
            self.n_beams
        ) / self.n_beams


@dataclass
class UserFollowConfig:
    """First-order lag of the user toward the grip anchor."""

    tau: float = 0.8
    noise_sigma: float = 0.03
    torso_width: float = 0.45

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.torso_width <= 0:
            raise ValueError("torso_width must be positive")


@dataclass
class ReachBox:
    """User reachable-space rectangle in the user frame.

    +y points from the torso plane toward the user's back; the default box
    is centered slightly behind the plane to cover the body.
    """

    depth: float = 0.7
    width: float = 0.7
    center_offset: tuple[float, float] = (0.0, 0.1)

    def __post_init__(self):
        if self.depth <= 0 or self.width <= 0:
            raise ValueError("ReachBox dimensions must be positive")


@dataclass
class TrackerConfig:
    """Temporal smoothing of user estimates."""

    smoothing: float = 0.6     # blend weight of the newest estimate
    t_hold: float = 1.0        # seconds to coast on the last estimate
    k_min: int = 5             # minimum torso columns for a detection

    def __post_init__(self):
        if not (0.0 < self.smoothing <= 1.0):
            raise ValueError("smoothing must be in (0, 1]")
        if self.t_hold < 0:
            raise ValueError("t_hold must be nonnegative")


@dataclass
class MappingConfig:
    """Log-odds occupancy update constants."""

    l_occ: float = 0.85
    l_free: float = -0.4
    l_clamp: float = 5.0


@dataclass
class MclConfig:
    """Augmented Monte Carlo localization parameters."""

    n_particles: int = 300
    alphas: tuple[float, float, float, float] = (0.01, 0.01, 0.02, 0.01)
    sigma_hit: float = 0.2
    p_rand: float = 0.05
    n_weight_beams: int = 40
    alpha_slow: float = 0.001
    alpha_fast: float = 0.1
    init_sigma_xy: float = 0.1
    init_sigma_theta: float = 0.1

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError("need at least 2 particles")
        if not (0.0 < self.p_rand < 1.0):
            raise ValueError("p_rand must be in (0, 1)")


@dataclass
class DwaConfig:
    """Dynamic-window sampling and objective weights.

    Velocity/acceleration limits mirror RobotConfig so planning stays a
    pure function of its arguments.
    """

    alpha: float = 0.8         # heading
    beta: float = 0.1          # clearance
    gamma: float = 0.1         # velocity
    v_samples: int = 5
    omega_samples: int = 9
    horizon: float = 2.0
    dt_rollout: float = 0.1
    v_max: float = 0.6
    v_min: float = 0.0
    omega_max: float = 1.0
    a_max: float = 0.2
    alpha_max: float = 1.2
    lookahead: float = 1.0
    recover_omega: float = 0.4

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.gamma < 0:
            raise ValueError("objective weights must be nonnegative")
        if self.alpha + self.beta + self.gamma <= 0:
            raise ValueError("objective weights must not all be zero")
        if self.v_samples < 2 or self.omega_samples < 2:
            raise ValueError("need at least 2 samples per axis")
        if not (self.horizon >= self.dt_rollout > 0):
            raise ValueError("require horizon >= dt_rollout > 0")

    @classmethod
    def from_robot(cls, robot: RobotConfig, **overrides) -> "DwaConfig":
        base = dict(
            v_max=robot.v_max,
            v_min=robot.v_min,
            omega_max=robot.omega_max,
            a_max=robot.a_max,
            alpha_max=robot.alpha_max,
        )
        base.update(overrides)
        return cls(**base)


@dataclass
class DescribeConfig:
    """Periodic scene description."""

    period: float = 10.0
    describe_range: float = 5.0
    max_items: int = 3
    hfov: float = 1.5

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("period must be positive")
        if self.describe_range <= 0 or self.max_items < 1:
            raise ValueError("invalid describe parameters")


@dataclass
class HarnessConfig:
    """Tick loop wiring."""

    dt: float = 0.1
    goal_tolerance: float = 0.4
    inflation_radius: float = 1.1
    footprint_padding: float = 0.12
    user_footprint_enabled: bool = True
    lost_box_scale: float = 1.5
    lost_user_abort: float = 3.0
    replan_stray: float = 0.5
    jerk_bound: float = 5.0
    mapping_stride_m: float = 1.0
    mapping_beams: int = 360
    odom_alpha_trans: float = 0.02
    odom_alpha_rot: float = 0.05


def apply_overrides(cfg, overrides: dict):
    """Return a copy of a config dataclass with field overrides applied."""
    valid = {f.name for f in fields(cfg)}
    unknown = set(overrides) - valid
    if unknown:
        raise ValueError(f"unknown {type(cfg).__name__} fields: {sorted(unknown)}")
    kwargs = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    kwargs.update(overrides)
    return type(cfg)(**kwargs)
