"""Augmented Monte Carlo localization over a likelihood field.

Random particle injection follows the w_fast/w_slow average-likelihood
heuristic; resampling is low-variance (systematic).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import MclConfig
from .geometry import Pose2D, wrap_angle
from .grid import FREE, OccupancyGrid
from .mapping import LikelihoodField
from .world import LidarScan


class DegenerateBelief(RuntimeError):
    """All particle weights underflowed; the filter was reinitialized."""


@dataclass(frozen=True)
class ParticleSet:
    """Pose hypotheses (N, 3 array of x, y, theta) with normalized weights."""

    poses: np.ndarray
    weights: np.ndarray
    w_slow: float = 0.0
    w_fast: float = 0.0

    def __post_init__(self):
        poses = np.asarray(self.poses, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "poses", poses)
        object.__setattr__(self, "weights", weights)
        if poses.ndim != 2 or poses.shape[1] != 3 or len(poses) < 2:
            raise ValueError("poses must be an (N >= 2, 3) array")
        if weights.shape != (len(poses),):
            raise ValueError("weights must pair up with poses")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")

    def __len__(self) -> int:
        return len(self.poses)


def init_gaussian(
    pose: Pose2D, cfg: MclConfig, rng: np.random.Generator
) -> ParticleSet:
    """Particles around a known start pose."""
    n = cfg.n_particles
    poses = np.empty((n, 3))
    poses[:, 0] = pose.x + cfg.init_sigma_xy * rng.standard_normal(n)
    poses[:, 1] = pose.y + cfg.init_sigma_xy * rng.standard_normal(n)
    poses[:, 2] = pose.theta + cfg.init_sigma_theta * rng.standard_normal(n)
    return ParticleSet(poses, np.full(n, 1.0 / n))


def _uniform_free_poses(
    map_grid: OccupancyGrid, n: int, rng: np.random.Generator
) -> np.ndarray:
    free = np.argwhere(map_grid.cells == FREE)
    if len(free) == 0:
        raise ValueError("map has no free cells to sample")
    idx = rng.integers(0, len(free), size=n)
    jitter = rng.random((n, 2))
    res = map_grid.resolution
    poses = np.empty((n, 3))
    poses[:, 0] = map_grid.origin.x + (free[idx, 0] + jitter[:, 0]) * res
    poses[:, 1] = map_grid.origin.y + (free[idx, 1] + jitter[:, 1]) * res
    poses[:, 2] = rng.uniform(-math.pi, math.pi, size=n)
    return poses


def init_uniform(
    map_grid: OccupancyGrid, cfg: MclConfig, rng: np.random.Generator
) -> ParticleSet:
    """Global-localization start: uniform over free cells.

    w_slow starts optimistic (a good-match per-beam likelihood) so random
    injection stays active until the filter actually finds poses that
    match the scans well, then tapers off as w_fast catches up.
    """
    n = cfg.n_particles
    return ParticleSet(
        _uniform_free_poses(map_grid, n, rng),
        np.full(n, 1.0 / n),
        w_slow=0.82,
        w_fast=0.0,
    )


def sample_motion(
    poses: np.ndarray,
    odom_delta: Pose2D,
    alphas: tuple[float, float, float, float],
    rng: np.random.Generator | None,
) -> np.ndarray:
    """Odometry motion model (rot1, trans, rot2 decomposition with the four
    alpha noise coefficients)."""
    dx, dy, dth = odom_delta.x, odom_delta.y, odom_delta.theta
    trans = math.hypot(dx, dy)
    rot1 = math.atan2(dy, dx) if trans > 1e-12 else 0.0
    rot2 = wrap_angle(dth - rot1)
    a1, a2, a3, a4 = alphas
    n = len(poses)
    s_rot1 = math.sqrt(a1 * rot1 * rot1 + a2 * trans * trans)
    s_trans = math.sqrt(a3 * trans * trans + a4 * (rot1 * rot1 + rot2 * rot2))
    s_rot2 = math.sqrt(a1 * rot2 * rot2 + a2 * trans * trans)
    if rng is None:
        r1 = np.full(n, rot1)
        tr = np.full(n, trans)
        r2 = np.full(n, rot2)
    else:
        r1 = rot1 + s_rot1 * rng.standard_normal(n)
        tr = trans + s_trans * rng.standard_normal(n)
        r2 = rot2 + s_rot2 * rng.standard_normal(n)
    heading = poses[:, 2] + r1
    out = np.empty_like(poses)
    out[:, 0] = poses[:, 0] + tr * np.cos(heading)
    out[:, 1] = poses[:, 1] + tr * np.sin(heading)
    out[:, 2] = np.arctan2(np.sin(heading + r2), np.cos(heading + r2))
    return out


def scan_weights(
    poses: np.ndarray,
    scan: LidarScan,
    field: LikelihoodField,
    n_beams: int,
    sensor_offset: Pose2D | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-particle likelihoods from a decimated beam subset evaluated at
    beam endpoints (max-range beams are skipped).

    Returns (product likelihood, per-beam geometric mean).  The geometric
    mean is the beam-count-invariant quality statistic that feeds the
    w_slow / w_fast injection heuristic.
    """
    idx = np.unique(np.linspace(0, scan.n_beams - 1, n_beams).astype(int))
    ranges = scan.ranges[idx]
    beam_angles = scan.beam_angles()[idx]
    use = ranges < scan.max_range - 1e-12
    ranges = ranges[use]
    beam_angles = beam_angles[use]
    n = len(poses)
    if len(ranges) == 0:
        return np.ones(n), np.ones(n)
    if sensor_offset is None:
        sx = poses[:, 0]
        sy = poses[:, 1]
        sth = poses[:, 2]
    else:
        c = np.cos(poses[:, 2])
        s = np.sin(poses[:, 2])
        sx = poses[:, 0] + c * sensor_offset.x - s * sensor_offset.y
        sy = poses[:, 1] + s * sensor_offset.x + c * sensor_offset.y
        sth = poses[:, 2] + sensor_offset.theta
    ang = sth[:, None] + beam_angles[None, :]
    ex = sx[:, None] + ranges[None, :] * np.cos(ang)
    ey = sy[:, None] + ranges[None, :] * np.sin(ang)
    vals = field.values_at(ex, ey)
    prod = np.prod(vals, axis=1)
    geo = prod ** (1.0 / len(ranges))
    return prod, geo


def low_variance_resample(
    poses: np.ndarray, weights: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Systematic resampling; expected copies of particle i = N * w_i."""
    n = len(weights)
    positions = (rng.random() + np.arange(n)) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    idx = np.searchsorted(cumulative, positions, side="right")
    return poses[np.minimum(idx, n - 1)]


def effective_sample_size(weights: np.ndarray) -> float:
    return 1.0 / float(np.sum(weights * weights))


def mcl_step(
    ps: ParticleSet,
    odom_delta: Pose2D,
    scan: LidarScan | None,
    field: LikelihoodField | None,
    map_grid: OccupancyGrid,
    cfg: MclConfig,
    rng: np.random.Generator | None,
    sensor_offset: Pose2D | None = None,
) -> tuple[ParticleSet, list[str]]:
    """One predict / weight / resample cycle.

    Returns the new particle set and a list of event tags
    ("degenerate_belief" when all weights underflowed and the belief was
    reinitialized uniformly; "injected" when random particles were added).
    """
    events: list[str] = []
    poses = sample_motion(ps.poses, odom_delta, cfg.alphas, rng)
    weights = ps.weights.copy()
    w_slow, w_fast = ps.w_slow, ps.w_fast

    if scan is not None and field is not None:
        like, geo = scan_weights(poses, scan, field, cfg.n_weight_beams, sensor_offset)
        # Likelihood-field gating: poses inside occupied or unknown cells
        # explain no scan, however well their projected endpoints fit.
        res = map_grid.resolution
        ix = np.floor((poses[:, 0] - map_grid.origin.x) / res).astype(int)
        iy = np.floor((poses[:, 1] - map_grid.origin.y) / res).astype(int)
        inside = (
            (ix >= 0) & (ix < map_grid.width) & (iy >= 0) & (iy < map_grid.height)
        )
        free = np.zeros(len(poses), dtype=bool)
        free[inside] = map_grid.cells[ix[inside], iy[inside]] == FREE
        like = np.where(free, like, 0.0)
        raw = weights * like
        total = float(raw.sum())
        w_avg = float(geo.mean())
        w_slow = w_slow + cfg.alpha_slow * (w_avg - w_slow) if w_slow > 0 else w_avg
        w_fast = w_fast + cfg.alpha_fast * (w_avg - w_fast) if w_fast > 0 else w_avg
        if total <= 0.0 or not math.isfinite(total):
            events.append("degenerate_belief")
            if rng is None:
                raise DegenerateBelief("all weights underflowed with no rng to recover")
            poses = _uniform_free_poses(map_grid, len(ps), rng)
            weights = np.full(len(ps), 1.0 / len(ps))
            return ParticleSet(poses, weights, w_slow, w_fast), events
        weights = raw / total
    else:
        total = float(weights.sum())
        weights = weights / total

    if effective_sample_size(weights) < len(ps) / 2.0 and rng is not None:
        poses = low_variance_resample(poses, weights, rng)
        p_inject = 0.0
        if w_slow > 0.0:
            p_inject = max(0.0, 1.0 - w_fast / w_slow)
        if p_inject > 0.0:
            mask = rng.random(len(ps)) < p_inject
            k = int(mask.sum())
            if k:
                poses[mask] = _uniform_free_poses(map_grid, k, rng)
                events.append("injected")
        weights = np.full(len(ps), 1.0 / len(ps))

    return ParticleSet(poses, weights, w_slow, w_fast), events


def estimate_pose(ps: ParticleSet) -> Pose2D:
    """Weighted mean position with a circular weighted mean heading."""
    w = ps.weights
    x = float(np.dot(w, ps.poses[:, 0]))
    y = float(np.dot(w, ps.poses[:, 1]))
    sin_m = float(np.dot(w, np.sin(ps.poses[:, 2])))
    cos_m = float(np.dot(w, np.cos(ps.poses[:, 2])))
    return Pose2D(x, y, math.atan2(sin_m, cos_m))
