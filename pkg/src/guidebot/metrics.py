"""Run metrics: success, clearances, collisions, smoothness, localization.

Collision semantics (ground truth): a tick collides when any logged
footprint polygon overlaps an occupied cell, or the true user point lies
inside an occupied cell's extent.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial import cKDTree

from .config import HarnessConfig
from .geometry import point_box_distance, polygon_boundary_samples
from .grid import OCCUPIED, OccupancyGrid
from .planning import CompositeFootprint, footprint_collides, inflate
from .geometry import Pose2D
from .trace import TraceRecord


@dataclass(frozen=True)
class RunMetrics:
    status: str
    success: bool
    time_to_goal: float | None
    path_length: float
    min_clearance_robot: float | None
    min_clearance_user: float | None
    collision_count: int
    max_linear_jerk: float
    max_angular_accel: float
    description_count: int
    localization_rmse: float

    def to_json_dict(self) -> dict:
        return asdict(self)


class _ObstacleIndex:
    """KD-tree over occupied cell centers for clearance queries."""

    def __init__(self, grid: OccupancyGrid):
        self.grid = grid
        occ = np.argwhere(grid.cells == OCCUPIED)
        self.cells = occ
        if len(occ):
            centers = (occ + 0.5) * grid.resolution
            centers[:, 0] += grid.origin.x
            centers[:, 1] += grid.origin.y
            self.tree = cKDTree(centers)
        else:
            self.tree = None

    def point_clearance(self, x: float, y: float, k: int = 4) -> float | None:
        if self.tree is None:
            return None
        k = min(k, len(self.cells))
        dists, idx = self.tree.query([x, y], k=k)
        idx = np.atleast_1d(idx)
        best = math.inf
        for i in idx:
            box = self.grid.cell_box(int(self.cells[i, 0]), int(self.cells[i, 1]))
            best = min(best, point_box_distance(x, y, *box))
        return best

    def polygon_clearance(self, verts: np.ndarray) -> float | None:
        """Minimum distance from the polygon boundary to any occupied cell
        box, evaluated over boundary samples and nearest candidate boxes."""
        if self.tree is None:
            return None
        samples = polygon_boundary_samples(verts, self.grid.resolution / 2.0)
        k = min(4, len(self.cells))
        _, idx = self.tree.query(samples, k=k)
        best = math.inf
        for i in np.unique(idx):
            box = self.grid.cell_box(int(self.cells[i, 0]), int(self.cells[i, 1]))
            dx = np.maximum(np.maximum(box[0] - samples[:, 0], 0.0), samples[:, 0] - box[2])
            dy = np.maximum(np.maximum(box[1] - samples[:, 1], 0.0), samples[:, 1] - box[3])
            best = min(best, float(np.min(np.hypot(dx, dy))))
        return best


def compute_metrics(
    records: list[TraceRecord],
    grid: OccupancyGrid,
    goal_xy: tuple[float, float] | None,
    cfg: HarnessConfig,
    status: str = "completed",
) -> RunMetrics:
    if not records:
        raise ValueError("trace must be nonempty")
    index = _ObstacleIndex(grid)
    gt_cm = inflate(grid, 0.0, unknown_is_lethal=False)
    identity = Pose2D(0.0, 0.0, 0.0)

    time_to_goal = None
    path_length = 0.0
    min_cl_robot: float | None = None
    min_cl_user: float | None = None
    collisions = 0
    descriptions = 0
    sq_err = 0.0

    prev = None
    for rec in records:
        if prev is not None:
            path_length += math.hypot(rec.robot.x - prev.x, rec.robot.y - prev.y)
        prev = rec.robot
        if goal_xy is not None and time_to_goal is None:
            if math.hypot(rec.robot.x - goal_xy[0], rec.robot.y - goal_xy[1]) <= cfg.goal_tolerance:
                time_to_goal = rec.t
        collided = False
        if rec.footprint:
            fp = CompositeFootprint(rec.footprint)
            if footprint_collides(gt_cm, identity, fp):
                collided = True
            cl = index.polygon_clearance(rec.footprint[0])
            if cl is not None:
                min_cl_robot = cl if min_cl_robot is None else min(min_cl_robot, cl)
        ucell = grid.world_to_cell(rec.user.x, rec.user.y)
        if grid.cell_state(*ucell) == OCCUPIED:
            collided = True
        ucl = index.point_clearance(rec.user.x, rec.user.y)
        if ucl is not None:
            min_cl_user = ucl if min_cl_user is None else min(min_cl_user, ucl)
        if collided:
            collisions += 1
        descriptions += sum(1 for e in rec.events if e.get("type") == "description")
        sq_err += (rec.mcl.x - rec.robot.x) ** 2 + (rec.mcl.y - rec.robot.y) ** 2

    dt_vals = [records[1].t - records[0].t] if len(records) > 1 else [cfg.dt]
    dt = dt_vals[0] if dt_vals[0] > 0 else cfg.dt
    v = np.array([0.0] + [r.cmd.v for r in records])
    w = np.array([0.0] + [r.cmd.omega for r in records])
    acc = np.diff(v) / dt
    ang_acc = np.diff(w) / dt
    jerk = np.diff(acc) / dt if len(acc) > 1 else np.zeros(1)
    max_jerk = float(np.max(np.abs(jerk))) if len(jerk) else 0.0
    max_ang_acc = float(np.max(np.abs(ang_acc))) if len(ang_acc) else 0.0

    rmse = math.sqrt(sq_err / len(records))
    success = time_to_goal is not None and collisions == 0
    return RunMetrics(
        status=status,
        success=success,
        time_to_goal=time_to_goal,
        path_length=path_length,
        min_clearance_robot=min_cl_robot,
        min_clearance_user=min_cl_user,
        collision_count=collisions,
        max_linear_jerk=max_jerk,
        max_angular_accel=max_ang_acc,
        description_count=descriptions,
        localization_rmse=rmse,
    )


def clearance_violation_ticks(
    records: list[TraceRecord], grid: OccupancyGrid, threshold: float = 0.1
) -> int:
    """Number of ticks whose true-user clearance falls below `threshold`."""
    index = _ObstacleIndex(grid)
    count = 0
    for rec in records:
        cl = index.point_clearance(rec.user.x, rec.user.y)
        if cl is not None and cl < threshold:
            count += 1
    return count
