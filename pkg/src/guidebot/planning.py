"""Global A* on an inflated costmap and DWA local planning whose collision
boundary is the robot body plus the user's reachable-space rectangle.

Path costs are kept as exact (straight, diagonal) integer unit pairs whose
value is a + b*sqrt(2); this makes optimal-cost comparisons exact.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt

from ._rollout import HAVE_NUMBA, pack_footprint, rollout_kernel
from .config import DwaConfig
from .geometry import (
    Pose2D,
    Twist2D,
    is_convex,
    polygon_area,
    polygon_overlaps_box,
    transform_polygon,
    wrap_angle,
)
from .grid import OCCUPIED, UNKNOWN, OccupancyGrid
from .world import step_robot

SQRT2 = math.sqrt(2.0)
INFLATED_COST = 50
_HALF_DIAG_FACTOR = math.sqrt(2.0) / 2.0


class StartBlocked(ValueError):
    pass


class GoalBlocked(ValueError):
    pass


class NoPath(RuntimeError):
    pass


@dataclass(frozen=True)
class Costmap:
    """Lethal / inflated / free cells with integer traversal costs and a
    precomputed distance field to the nearest lethal cell center."""

    width: int
    height: int
    resolution: float
    origin: Pose2D
    lethal: np.ndarray
    inflated: np.ndarray
    cost_units: np.ndarray      # 0 on lethal cells, else 1 or INFLATED_COST
    lethal_dist: np.ndarray     # meters, +inf when no lethal cell exists

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin.x) / self.resolution)),
            int(math.floor((y - self.origin.y) / self.resolution)),
        )

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def is_lethal(self, ix: int, iy: int) -> bool:
        if not self.in_bounds(ix, iy):
            return True
        return bool(self.lethal[ix, iy])

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin.x + (ix + 0.5) * self.resolution,
            self.origin.y + (iy + 0.5) * self.resolution,
        )

    def cell_box(self, ix: int, iy: int) -> tuple[float, float, float, float]:
        x0 = self.origin.x + ix * self.resolution
        y0 = self.origin.y + iy * self.resolution
        return (x0, y0, x0 + self.resolution, y0 + self.resolution)

    @property
    def x_min(self) -> float:
        return self.origin.x

    @property
    def y_min(self) -> float:
        return self.origin.y

    @property
    def x_max(self) -> float:
        return self.origin.x + self.width * self.resolution

    @property
    def y_max(self) -> float:
        return self.origin.y + self.height * self.resolution


def inflate(
    map_grid: OccupancyGrid, radius: float, unknown_is_lethal: bool = True
) -> Costmap:
    """Mark occupied cells lethal and cells within `radius` of one inflated.

    Unknown cells default to lethal (untraversable) for safety.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    lethal = map_grid.cells == OCCUPIED
    if unknown_is_lethal:
        lethal = lethal | (map_grid.cells == UNKNOWN)
    if lethal.any():
        dist = distance_transform_edt(~lethal, sampling=map_grid.resolution)
    else:
        dist = np.full(lethal.shape, np.inf)
    inflated = (dist <= radius) & ~lethal
    cost_units = np.ones(lethal.shape, dtype=np.int64)
    cost_units[inflated] = INFLATED_COST
    cost_units[lethal] = 0
    return Costmap(
        map_grid.width,
        map_grid.height,
        map_grid.resolution,
        map_grid.origin,
        lethal,
        inflated,
        cost_units,
        dist,
    )


@dataclass(frozen=True)
class GlobalPath:
    """Cell-center waypoints of an 8-connected grid path."""

    waypoints: np.ndarray
    cells: tuple[tuple[int, int], ...]
    cost_straight: int
    cost_diag: int

    @property
    def total_cost(self) -> float:
        return self.cost_straight + self.cost_diag * SQRT2


_NEIGHBORS = (
    (1, 0, False), (-1, 0, False), (0, 1, False), (0, -1, False),
    (1, 1, True), (1, -1, True), (-1, 1, True), (-1, -1, True),
)


def _octile(ax: int, ay: int, bx: int, by: int) -> float:
    dx, dy = abs(ax - bx), abs(ay - by)
    lo = min(dx, dy)
    return lo * SQRT2 + (max(dx, dy) - lo)


def astar(cm: Costmap, start: Pose2D, goal: Pose2D) -> GlobalPath:
    """Minimum-cost 8-connected path; step cost is the entered cell's cost
    times 1 (straight) or sqrt2 (diagonal).  Octile heuristic; ties broken
    by smaller f, then smaller h, then row-major cell index."""
    s = cm.cell_of(start.x, start.y)
    g = cm.cell_of(goal.x, goal.y)
    if cm.is_lethal(*s):
        raise StartBlocked(f"start cell {s} is lethal or out of bounds")
    if cm.is_lethal(*g):
        raise GoalBlocked(f"goal cell {g} is lethal or out of bounds")
    return _grid_search(cm, s, g, heuristic=True)


def _grid_search(
    cm: Costmap, s: tuple[int, int], g: tuple[int, int], heuristic: bool
) -> GlobalPath:
    w, h = cm.width, cm.height
    cost_units = cm.cost_units
    ga = np.full((w, h), -1, dtype=np.int64)   # straight units, -1 = unvisited
    gb = np.zeros((w, h), dtype=np.int64)      # diagonal units
    parent = np.full((w, h), -1, dtype=np.int64)
    closed = np.zeros((w, h), dtype=bool)
    ga[s] = 0
    gb[s] = 0
    h0 = _octile(*s, *g) if heuristic else 0.0
    open_heap = [(h0, h0, s[1] * w + s[0], 0, 0, s)]
    while open_heap:
        f, _, _, a, b, cell = heapq.heappop(open_heap)
        if closed[cell]:
            continue
        if ga[cell] != a or gb[cell] != b:
            continue  # stale entry
        closed[cell] = True
        if cell == g:
            return _reconstruct(cm, parent, s, g, a, b)
        cx, cy = cell
        for dx, dy, diag in _NEIGHBORS:
            nx, ny = cx + dx, cy + dy
            if not (0 <= nx < w and 0 <= ny < h):
                continue
            cu = cost_units[nx, ny]
            if cu == 0 or closed[nx, ny]:
                continue
            na = a + (0 if diag else cu)
            nb = b + (cu if diag else 0)
            if ga[nx, ny] >= 0:
                if na + nb * SQRT2 >= ga[nx, ny] + gb[nx, ny] * SQRT2:
                    continue
            ga[nx, ny] = na
            gb[nx, ny] = nb
            parent[nx, ny] = cy * w + cx
            gval = na + nb * SQRT2
            hn = _octile(nx, ny, *g) if heuristic else 0.0
            heapq.heappush(
                open_heap, (gval + hn, hn, ny * w + nx, na, nb, (nx, ny))
            )
    raise NoPath(f"no path from {s} to {g}")


def _reconstruct(cm: Costmap, parent, s, g, a: int, b: int) -> GlobalPath:
    cells = [g]
    cur = g
    w = cm.width
    while cur != s:
        p = int(parent[cur])
        cur = (p % w, p // w)
        cells.append(cur)
    cells.reverse()
    waypoints = np.array([cm.cell_center(ix, iy) for ix, iy in cells])
    return GlobalPath(waypoints, tuple(cells), a, b)


@dataclass(frozen=True)
class CompositeFootprint:
    """Collision polygons in the robot frame: body first, then the user's
    boundary rectangle when one is present."""

    polygons: tuple[np.ndarray, ...]

    def __post_init__(self):
        polys = tuple(np.asarray(p, dtype=float) for p in self.polygons)
        object.__setattr__(self, "polygons", polys)
        if not 1 <= len(polys) <= 2:
            raise ValueError("footprint holds one or two polygons")
        for p in polys:
            if len(p) < 3 or not is_convex(p) or polygon_area(p) <= 0:
                raise ValueError("each polygon must be convex, CCW, with area")
        object.__setattr__(self, "_refs", tuple(p.mean(axis=0) for p in polys))
        r_out = []
        r_in = []
        for p, ref in zip(polys, self._refs):
            d = p - ref
            r_out.append(float(np.max(np.hypot(d[:, 0], d[:, 1]))))
            r_in.append(_inradius(p, ref))
        object.__setattr__(self, "_r_out", tuple(r_out))
        object.__setattr__(self, "_r_in", tuple(r_in))


def _inradius(poly: np.ndarray, ref: np.ndarray) -> float:
    best = math.inf
    n = len(poly)
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        L = math.hypot(ex, ey)
        if L <= 0:
            return 0.0
        best = min(best, abs((ref[0] - ax) * ey - (ref[1] - ay) * ex) / L)
    return best


def merge_footprint(
    robot_poly: np.ndarray,
    user_boundary: np.ndarray | None,
    lost_fallback: np.ndarray | None = None,
) -> CompositeFootprint:
    """Robot polygon plus the live user boundary; when the user is lost the
    caller passes a conservative fallback box instead."""
    if user_boundary is not None:
        return CompositeFootprint((robot_poly, user_boundary))
    if lost_fallback is not None:
        return CompositeFootprint((robot_poly, lost_fallback))
    return CompositeFootprint((robot_poly,))


def default_user_box(
    anchor_offset: tuple[float, float], depth: float, width: float, scale: float = 1.5
) -> np.ndarray:
    """Conservative axis-aligned box at the grip anchor, for lost-user mode."""
    hw = 0.5 * width * scale
    hd = 0.5 * depth * scale
    ax, ay = anchor_offset
    return np.array(
        [[ax - hd, ay - hw], [ax + hd, ay - hw], [ax + hd, ay + hw], [ax - hd, ay + hw]]
    )


def footprint_collides(cm: Costmap, pose: Pose2D, fp: CompositeFootprint) -> bool:
    """Exact overlap test of every footprint polygon against lethal cells
    (out-of-map area counts as lethal)."""
    halfdiag = cm.resolution * _HALF_DIAG_FACTOR
    for poly, ref, r_out, r_in in zip(fp.polygons, fp._refs, fp._r_out, fp._r_in):
        rx, ry = pose.transform_point(ref[0], ref[1])
        ix, iy = cm.cell_of(rx, ry)
        if cm.in_bounds(ix, iy):
            border = min(rx - cm.x_min, cm.x_max - rx, ry - cm.y_min, cm.y_max - ry)
            d = float(cm.lethal_dist[ix, iy])
            if d - halfdiag > r_out + halfdiag and border > r_out:
                continue
            if d + halfdiag < r_in:
                return True
        verts = transform_polygon(poly, pose)
        if _polygon_hits_lethal(cm, verts):
            return True
    return False


def _polygon_hits_lethal(cm: Costmap, verts: np.ndarray) -> bool:
    xmin, ymin = verts.min(axis=0)
    xmax, ymax = verts.max(axis=0)
    if xmin < cm.x_min or ymin < cm.y_min or xmax > cm.x_max or ymax > cm.y_max:
        return True
    res = cm.resolution
    ix0 = max(0, int(math.floor((xmin - cm.origin.x) / res)))
    iy0 = max(0, int(math.floor((ymin - cm.origin.y) / res)))
    ix1 = min(cm.width - 1, int(math.floor((xmax - cm.origin.x) / res)))
    iy1 = min(cm.height - 1, int(math.floor((ymax - cm.origin.y) / res)))
    block = cm.lethal[ix0 : ix1 + 1, iy0 : iy1 + 1]
    if not block.any():
        return False
    for di, dj in np.argwhere(block):
        ix, iy = ix0 + int(di), iy0 + int(dj)
        if polygon_overlaps_box(verts, *cm.cell_box(ix, iy)):
            return True
    return False


def dynamic_window(
    current: Twist2D, cfg: DwaConfig, dt_cmd: float
) -> tuple[float, float, float, float]:
    """(v_lo, v_hi, w_lo, w_hi): velocities reachable within one
    acceleration-limited command interval, clipped to absolute limits."""
    if dt_cmd <= 0:
        raise ValueError("dt_cmd must be positive")
    v_lo = max(cfg.v_min, current.v - cfg.a_max * dt_cmd)
    v_hi = min(cfg.v_max, current.v + cfg.a_max * dt_cmd)
    w_lo = max(-cfg.omega_max, current.omega - cfg.alpha_max * dt_cmd)
    w_hi = min(cfg.omega_max, current.omega + cfg.alpha_max * dt_cmd)
    return v_lo, v_hi, w_lo, w_hi


def rollout_collision(
    cm: Costmap,
    pose: Pose2D,
    cmd: Twist2D,
    fp: CompositeFootprint,
    cfg: DwaConfig,
    force_python: bool = False,
) -> float | None:
    """First collision time along the command's arc, sampled every
    dt_rollout up to the horizon; None when clear.

    The start pose itself is not tested: a pre-existing contact is not the
    candidate command's fault, and scoring escapes from it higher is what
    lets the planner unstick.
    """
    steps = int(round(cfg.horizon / cfg.dt_rollout))
    if HAVE_NUMBA and not force_python:
        verts, offs, refs, r_out, r_in = pack_footprint(fp)
        k = rollout_kernel(
            cm.lethal, cm.lethal_dist, cm.resolution, cm.origin.x, cm.origin.y,
            cm.width, cm.height, pose.x, pose.y, pose.theta, cmd.v, cmd.omega,
            cfg.dt_rollout, steps, verts, offs, refs, r_out, r_in,
            np.empty_like(verts),
        )
        return k * cfg.dt_rollout if k else None
    p = pose
    for k in range(1, steps + 1):
        p = step_robot(p, cmd, cfg.dt_rollout)
        if footprint_collides(cm, p, fp):
            return k * cfg.dt_rollout
    return None


def pursuit_waypoint(
    path_waypoints: np.ndarray, pose: Pose2D, lookahead: float
) -> tuple[float, float]:
    """Farthest along-path waypoint within the lookahead disk; nearest
    waypoint when the robot has strayed outside it."""
    dx = path_waypoints[:, 0] - pose.x
    dy = path_waypoints[:, 1] - pose.y
    d = np.hypot(dx, dy)
    inside = np.nonzero(d <= lookahead)[0]
    if len(inside):
        i = int(inside[-1])
    else:
        i = int(np.argmin(d))
    return float(path_waypoints[i, 0]), float(path_waypoints[i, 1])


def _heading_score(end: Pose2D, wp: tuple[float, float]) -> float:
    bearing = math.atan2(wp[1] - end.y, wp[0] - end.x)
    return 1.0 - abs(wrap_angle(bearing - end.theta)) / math.pi


def _normalize(values: list[float]) -> list[float]:
    lo, hi = min(values), max(values)
    span = hi - lo
    if span <= 0.0:
        return [0.0 for _ in values]
    return [(v - lo) / span for v in values]


def dwa_plan(
    pose: Pose2D,
    current: Twist2D,
    path_waypoints,
    cm: Costmap,
    fp: CompositeFootprint,
    cfg: DwaConfig,
    dt_cmd: float = 0.1,
) -> Twist2D:
    """Best admissible window sample under the normalized
    alpha*heading + beta*clearance + gamma*velocity objective.

    A command is admissible when its braking distance v^2 / (2 a_max) fits
    inside the arc distance to its first collision.  Ties prefer smaller
    |omega|, then smaller v.  With nothing admissible, rotate in place
    toward the pursuit waypoint.
    """
    cmd, _ = dwa_plan_info(pose, current, path_waypoints, cm, fp, cfg, dt_cmd)
    return cmd


def dwa_plan_info(
    pose: Pose2D,
    current: Twist2D,
    path_waypoints,
    cm: Costmap,
    fp: CompositeFootprint,
    cfg: DwaConfig,
    dt_cmd: float = 0.1,
) -> tuple[Twist2D, dict]:
    """dwa_plan plus diagnostics: admissible sample count and recovery flag."""
    if isinstance(path_waypoints, GlobalPath):
        path_waypoints = path_waypoints.waypoints
    if len(path_waypoints) == 0:
        raise ValueError("path must be nonempty")
    wp = pursuit_waypoint(path_waypoints, pose, cfg.lookahead)
    v_lo, v_hi, w_lo, w_hi = dynamic_window(current, cfg, dt_cmd)
    v_vals = [float(v) for v in np.linspace(v_lo, v_hi, cfg.v_samples)]
    w_vals = [float(w) for w in np.linspace(w_lo, w_hi, cfg.omega_samples)]

    cands: list[tuple[float, float, float, float, float]] = []
    for v in v_vals:
        for w in w_vals:
            cmd = Twist2D(v, w)
            ttc = rollout_collision(cm, pose, cmd, fp, cfg)
            if ttc is None:
                dist = math.inf
                clearance = 1.0
            else:
                dist = abs(v) * ttc
                clearance = min(ttc, cfg.horizon) / cfg.horizon
            if v * v / (2.0 * cfg.a_max) > dist:
                continue
            end = step_robot(pose, cmd, cfg.horizon)
            cands.append((v, w, _heading_score(end, wp), clearance, v))

    if not cands:
        err = wrap_angle(math.atan2(wp[1] - pose.y, wp[0] - pose.x) - pose.theta)
        omega = math.copysign(cfg.recover_omega, err) if err != 0 else cfg.recover_omega
        # Rotation in place toward the waypoint, unless even that sweeps the
        # footprint into a wall; then try the other way, else hold still.
        for cand in (Twist2D(0.0, omega), Twist2D(0.0, -omega)):
            if rollout_collision(cm, pose, cand, fp, cfg) is None:
                return cand, {"admissible": 0, "recovery": True}
        return Twist2D(0.0, 0.0), {"admissible": 0, "recovery": True}

    hn = _normalize([c[2] for c in cands])
    cn = _normalize([c[3] for c in cands])
    vn = _normalize([c[4] for c in cands])
    best = None
    best_key = None
    for i, (v, w, _, _, _) in enumerate(cands):
        score = cfg.alpha * hn[i] + cfg.beta * cn[i] + cfg.gamma * vn[i]
        key = (-score, abs(w), v)
        if best_key is None or key < best_key:
            best_key = key
            best = Twist2D(v, w)
    return best, {"admissible": len(cands), "recovery": False}
