"""Log-odds occupancy mapping from scans at known poses, and the
precomputed measurement-likelihood field used by the particle filter.

Mapping at ground-truth poses is the simulation's stand-in for a full
SLAM front end; it runs before navigation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import distance_transform_edt

from .config import MappingConfig
from .geometry import Pose2D
from .grid import FREE, OCCUPIED, UNKNOWN, OccupancyGrid
from .world import LidarScan


class NoObstacles(ValueError):
    """Likelihood field requested for a map without occupied cells."""


@dataclass
class LogOddsGrid:
    """Occupancy belief as clamped per-cell log-odds (0 = unknown)."""

    width: int
    height: int
    resolution: float
    origin: Pose2D = field(default_factory=lambda: Pose2D(0.0, 0.0, 0.0))
    cells: np.ndarray | None = None
    clamp: float = 5.0

    def __post_init__(self):
        if self.cells is None:
            self.cells = np.zeros((self.width, self.height))
        else:
            self.cells = np.asarray(self.cells, dtype=float)

    @classmethod
    def like(cls, grid: OccupancyGrid, clamp: float = 5.0) -> "LogOddsGrid":
        return cls(grid.width, grid.height, grid.resolution, grid.origin, clamp=clamp)

    def threshold(self) -> OccupancyGrid:
        """Ternary grid: positive log-odds occupied, negative free, zero unknown."""
        cells = np.full((self.width, self.height), UNKNOWN, dtype=np.int8)
        cells[self.cells > 0] = OCCUPIED
        cells[self.cells < 0] = FREE
        return OccupancyGrid(self.width, self.height, self.resolution, self.origin, cells)

    def copy(self) -> "LogOddsGrid":
        return LogOddsGrid(
            self.width, self.height, self.resolution, self.origin,
            self.cells.copy(), self.clamp,
        )


def _ray_cells(
    grid: LogOddsGrid, ox: float, oy: float, angle: float, dist: float
) -> list[tuple[int, int]]:
    """Cells entered by a ray over (0, dist], in order, clipped to bounds."""
    res = grid.resolution
    gx = (ox - grid.origin.x) / res
    gy = (oy - grid.origin.y) / res
    ix, iy = int(math.floor(gx)), int(math.floor(gy))
    dx, dy = math.cos(angle), math.sin(angle)
    step_x = 1 if dx >= 0 else -1
    step_y = 1 if dy >= 0 else -1
    tdx = res / abs(dx) if dx != 0 else math.inf
    tdy = res / abs(dy) if dy != 0 else math.inf
    fx = gx - math.floor(gx)
    fy = gy - math.floor(gy)
    tmx = (1.0 - fx) * tdx if dx >= 0 else fx * tdx
    tmy = (1.0 - fy) * tdy if dy >= 0 else fy * tdy
    out: list[tuple[int, int]] = []
    t = 0.0
    while True:
        if tmx <= tmy:
            t = tmx
            tmx += tdx
            ix += step_x
        else:
            t = tmy
            tmy += tdy
            iy += step_y
        if t > dist:
            break
        if 0 <= ix < grid.width and 0 <= iy < grid.height:
            out.append((ix, iy))
        else:
            break
    return out


def update_map(
    grid: LogOddsGrid, pose: Pose2D, scan: LidarScan, cfg: MappingConfig | None = None
) -> LogOddsGrid:
    """One scan's Bayesian update from a known sensor pose.

    Cells crossed before a beam's endpoint accumulate l_free; the endpoint
    cell accumulates l_occ unless the beam returned max_range (no hit).
    Returns a new grid; the input is unchanged.
    """
    cfg = cfg or MappingConfig()
    out = grid.copy()
    cells = out.cells
    angles = pose.theta + scan.beam_angles()
    # Nudge hit endpoints past the cell boundary the ray stopped on.
    nudge = 1e-3 * grid.resolution
    for k in range(scan.n_beams):
        r = float(scan.ranges[k])
        hit = r < scan.max_range - 1e-12
        path = _ray_cells(grid, pose.x, pose.y, float(angles[k]), r + (nudge if hit else 0.0))
        if not path:
            continue
        free_cells = path[:-1] if hit else path
        for c in free_cells:
            cells[c] += cfg.l_free
        if hit:
            cells[path[-1]] += cfg.l_occ
    np.clip(cells, -grid.clamp, grid.clamp, out=cells)
    return out


def grid_cell(grid, x: float, y: float) -> tuple[int, int]:
    res = grid.resolution
    return (
        int(math.floor((x - grid.origin.x) / res)),
        int(math.floor((y - grid.origin.y) / res)),
    )


@dataclass(frozen=True)
class LikelihoodField:
    """p(beam endpoint | map) per cell, from distance to the nearest obstacle."""

    width: int
    height: int
    resolution: float
    origin: Pose2D
    values: np.ndarray
    p_rand: float

    def value_at(self, x: float, y: float) -> float:
        ix, iy = grid_cell(self, x, y)
        if 0 <= ix < self.width and 0 <= iy < self.height:
            return float(self.values[ix, iy])
        return self.p_rand

    def values_at(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Vectorized lookup; out-of-map points get the random floor."""
        res = self.resolution
        ix = np.floor((xs - self.origin.x) / res).astype(int)
        iy = np.floor((ys - self.origin.y) / res).astype(int)
        inside = (ix >= 0) & (ix < self.width) & (iy >= 0) & (iy < self.height)
        out = np.full(np.shape(xs), self.p_rand)
        out[inside] = self.values[ix[inside], iy[inside]]
        return out


def obstacle_distances(map_grid: OccupancyGrid) -> np.ndarray:
    """Exact Euclidean distance (meters) from each cell center to the
    nearest occupied cell center."""
    occ = map_grid.occupied_mask()
    if not occ.any():
        raise NoObstacles("map has no occupied cells")
    return distance_transform_edt(~occ, sampling=map_grid.resolution)


def build_likelihood_field(
    map_grid: OccupancyGrid, sigma_hit: float, p_rand: float
) -> LikelihoodField:
    """Gaussian-of-distance likelihood with a uniform floor; values in (0, 1]."""
    d = obstacle_distances(map_grid)
    values = (1.0 - p_rand) * np.exp(-0.5 * (d / sigma_hit) ** 2) + p_rand
    return LikelihoodField(
        map_grid.width,
        map_grid.height,
        map_grid.resolution,
        map_grid.origin,
        values,
        p_rand,
    )
