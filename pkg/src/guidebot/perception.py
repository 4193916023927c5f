"""Reconstruct the user's planar pose from torso depth columns and build the
reachable-space rectangle in the robot frame.

Camera-frame estimate coordinates: x lateral (image-right positive),
y distance along the optical axis, phi the facing deviation from looking
straight back at the camera (positive when the user's right side is
farther away).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ReachBox, TrackerConfig
from .geometry import Pose2D, polygon_area, wrap_angle
from .world import TorsoObservation


class NoUserDetected(ValueError):
    """Too few torso columns to form an estimate."""


class DegenerateObservation(ValueError):
    """Torso columns span fewer than 2 pixels."""


class UserLost(RuntimeError):
    """No detection for longer than the tracker hold time."""


@dataclass(frozen=True)
class UserEstimate:
    """Smoothed user pose in the camera frame plus its boundary polygon
    already expressed in the robot frame."""

    x_cam: float
    y_cam: float
    phi: float
    boundary_robot: np.ndarray
    timestamp: float

    def __post_init__(self):
        if self.y_cam <= 0:
            raise ValueError("y_cam must be positive")
        if not (-math.pi / 2 < self.phi < math.pi / 2):
            raise ValueError("phi must lie in (-pi/2, pi/2)")
        b = np.asarray(self.boundary_robot, dtype=float)
        object.__setattr__(self, "boundary_robot", b)
        if b.shape != (4, 2) or polygon_area(b) <= 0:
            raise ValueError("boundary must be a CCW quadrilateral with area")


def estimate_user_pose(obs: TorsoObservation, k_min: int = 5) -> tuple[float, float, float]:
    """(x_cam, y_cam, phi) from one torso observation.

    y is the median depth over the middle 80% of columns; phi comes from
    the depth slope between the outermost-20% column windows, measured
    against their metric lateral separation; x is the depth-weighted
    column centroid reprojected at y.
    """
    k = len(obs)
    if k < k_min:
        raise NoUserDetected(f"{k} columns < k_min={k_min}")
    cols = obs.columns
    depths = obs.depths
    if cols[-1] - cols[0] < 2:
        raise DegenerateObservation("pixel span below 2 columns")

    cam = obs.camera
    f = cam.focal_px
    u = cols + 0.5 - cam.image_width / 2.0  # pixel-center offsets from axis
    trim = int(0.1 * k)
    y_cam = float(np.median(depths[trim : k - trim]))

    m = max(1, int(0.2 * k))
    lat = u * depths / f  # exact lateral coordinate of each column's hit
    d_l = float(np.mean(depths[:m]))
    d_r = float(np.mean(depths[k - m :]))
    x_l = float(np.mean(lat[:m]))
    x_r = float(np.mean(lat[k - m :]))
    if x_r - x_l <= 1e-9:
        # Grazing view: lateral extent collapsed, facing unrecoverable.
        raise DegenerateObservation("torso seen edge-on")
    phi = math.atan2(d_r - d_l, x_r - x_l)

    u_centroid = float(np.sum(u * depths) / np.sum(depths))
    x_cam = u_centroid * y_cam / f
    return x_cam, y_cam, phi


def user_boundary_polygon(
    est: tuple[float, float, float], box: ReachBox, extrinsics: Pose2D
) -> np.ndarray:
    """Reach-box corners in the robot frame (CCW) via
    T_robot<-cam . T_cam<-user applied to the box corners."""
    x_cam, y_cam, phi = est
    t_cam_user = Pose2D(x_cam, y_cam, phi).matrix()
    t_robot_cam = extrinsics.matrix()
    m = t_robot_cam @ t_cam_user
    ox, oy = box.center_offset
    hw, hd = 0.5 * box.width, 0.5 * box.depth
    corners = np.array(
        [
            [ox - hw, oy - hd, 1.0],
            [ox + hw, oy - hd, 1.0],
            [ox + hw, oy + hd, 1.0],
            [ox - hw, oy + hd, 1.0],
        ]
    )
    return (corners @ m.T)[:, :2]


def build_estimate(
    est: tuple[float, float, float],
    box: ReachBox,
    extrinsics: Pose2D,
    timestamp: float,
) -> UserEstimate:
    boundary = user_boundary_polygon(est, box, extrinsics)
    return UserEstimate(est[0], est[1], est[2], boundary, timestamp)


def track_user(
    prev: UserEstimate | None,
    new: tuple[float, float, float] | None,
    now: float,
    box: ReachBox,
    extrinsics: Pose2D,
    cfg: TrackerConfig,
) -> UserEstimate:
    """Exponentially smooth estimates; coast on the last one for up to
    t_hold seconds, then raise UserLost."""
    if new is None:
        if prev is not None and now - prev.timestamp <= cfg.t_hold:
            return prev
        raise UserLost(f"no detection within {cfg.t_hold} s")
    if prev is None:
        return build_estimate(new, box, extrinsics, now)
    lam = cfg.smoothing
    x = lam * new[0] + (1.0 - lam) * prev.x_cam
    y = lam * new[1] + (1.0 - lam) * prev.y_cam
    phi = prev.phi + lam * wrap_angle(new[2] - prev.phi)
    return build_estimate((x, y, phi), box, extrinsics, now)
