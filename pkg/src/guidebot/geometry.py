"""Planar poses, twists, and convex-polygon primitives.

Frame conventions used throughout the package:

* Map and robot frames are standard right-handed 2D frames: x forward at
  theta = 0, theta counterclockwise, normalized to (-pi, pi].
* The camera observation frame is (x = image-right, y = optical-forward);
  it is still an ordinary 2D frame, so the same pose/transform algebra
  applies.  The camera extrinsic pose expresses that frame in the robot
  frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    t = math.fmod(theta, TWO_PI)
    if t <= -math.pi:
        t += TWO_PI
    elif t > math.pi:
        t -= TWO_PI
    return t


@dataclass(frozen=True)
class Pose2D:
    """Planar pose (x, y in meters, theta in radians, wrapped to (-pi, pi])."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def compose(self, other: "Pose2D") -> "Pose2D":
        """Pose of `other` expressed through this pose (this ∘ other)."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2D(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )

    def transform_point(self, px: float, py: float) -> tuple[float, float]:
        """Map a point from this pose's local frame into the parent frame."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return (self.x + c * px - s * py, self.y + s * px + c * py)

    def inverse_transform_point(self, px: float, py: float) -> tuple[float, float]:
        """Map a parent-frame point into this pose's local frame."""
        dx, dy = px - self.x, py - self.y
        c, s = math.cos(self.theta), math.sin(self.theta)
        return (c * dx + s * dy, -s * dx + c * dy)

    def relative_to(self, base: "Pose2D") -> "Pose2D":
        """This pose expressed in `base`'s frame (base^-1 ∘ self)."""
        lx, ly = base.inverse_transform_point(self.x, self.y)
        return Pose2D(lx, ly, self.theta - base.theta)

    def matrix(self) -> np.ndarray:
        """3x3 homogeneous transform of this pose."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s, self.x], [s, c, self.y], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class Twist2D:
    """Velocity command: linear v (m/s) along heading, angular omega (rad/s)."""

    v: float
    omega: float


def polygon_area(vertices: np.ndarray) -> float:
    """Signed area (positive for counterclockwise vertex order)."""
    x = vertices[:, 0]
    y = vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def is_convex(vertices: np.ndarray, tol: float = 1e-12) -> bool:
    """True for a convex polygon with nonzero area (either winding)."""
    n = len(vertices)
    if n < 3:
        return False
    if abs(polygon_area(vertices)) <= tol:
        return False
    sign = 0
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        cx, cy = vertices[(i + 2) % n]
        cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
        if abs(cross) <= tol:
            continue
        s = 1 if cross > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return sign != 0


def transform_polygon(vertices: np.ndarray, pose: Pose2D) -> np.ndarray:
    """Transform polygon vertices from `pose`'s local frame to its parent frame."""
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    rot = np.array([[c, -s], [s, c]])
    return vertices @ rot.T + np.array([pose.x, pose.y])


def point_in_polygon(px: float, py: float, vertices: np.ndarray) -> bool:
    """Point-in-convex-polygon test (boundary counts as inside)."""
    n = len(vertices)
    sign = 0
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        if abs(cross) <= 1e-12:
            continue
        s = 1 if cross > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return True


def polygon_overlaps_box(
    vertices: np.ndarray, bx0: float, by0: float, bx1: float, by1: float
) -> bool:
    """Exact convex-polygon vs axis-aligned-box overlap (separating axes).

    Touching boundaries (zero-area contact) count as non-overlapping.
    """
    px = vertices[:, 0]
    py = vertices[:, 1]
    if px.max() <= bx0 or px.min() >= bx1 or py.max() <= by0 or py.min() >= by1:
        return False
    cx, cy = 0.5 * (bx0 + bx1), 0.5 * (by0 + by1)
    hx, hy = 0.5 * (bx1 - bx0), 0.5 * (by1 - by0)
    n = len(vertices)
    for i in range(n):
        ax, ay = vertices[i]
        bx_, by_ = vertices[(i + 1) % n]
        # Edge normal axis; box projects to center +- (|nx|hx + |ny|hy).
        nx, ny = by_ - ay, ax - bx_
        proj = px * nx + py * ny
        box_c = cx * nx + cy * ny
        box_r = abs(nx) * hx + abs(ny) * hy
        if proj.max() <= box_c - box_r or proj.min() >= box_c + box_r:
            return False
    return True


def _point_segment_distance(
    px: float, py: float, ax: float, ay: float, bx: float, by: float
) -> float:
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    if L2 <= 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * vx + (py - ay) * vy) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * vx), py - (ay + t * vy))


def polygon_box_distance(
    vertices: np.ndarray, bx0: float, by0: float, bx1: float, by1: float
) -> float:
    """Euclidean distance between a convex polygon and an axis-aligned box.

    Zero when they overlap or touch.
    """
    if polygon_overlaps_box(vertices, bx0, by0, bx1, by1):
        return 0.0
    box = np.array([[bx0, by0], [bx1, by0], [bx1, by1], [bx0, by1]])
    best = math.inf
    n = len(vertices)
    for i in range(n):
        ax, ay = vertices[i]
        bx_, by_ = vertices[(i + 1) % n]
        for qx, qy in box:
            best = min(best, _point_segment_distance(qx, qy, ax, ay, bx_, by_))
    for j in range(4):
        qx, qy = box[j]
        rx, ry = box[(j + 1) % 4]
        for px, py in vertices:
            best = min(best, _point_segment_distance(px, py, qx, qy, rx, ry))
    return best


def point_box_distance(
    px: float, py: float, bx0: float, by0: float, bx1: float, by1: float
) -> float:
    """Distance from a point to an axis-aligned box (0 inside)."""
    dx = max(bx0 - px, 0.0, px - bx1)
    dy = max(by0 - py, 0.0, py - by1)
    return math.hypot(dx, dy)


def pad_polygon(vertices: np.ndarray, pad: float) -> np.ndarray:
    """Offset a convex CCW polygon outward by `pad` (mitered corners, so the
    result contains the true Minkowski offset)."""
    if pad == 0.0:
        return np.asarray(vertices, dtype=float)
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    normals = np.empty_like(v)
    for i in range(n):
        ex, ey = v[(i + 1) % n] - v[i]
        L = math.hypot(ex, ey)
        normals[i] = (ey / L, -ex / L)  # outward for CCW winding
    out = np.empty_like(v)
    for i in range(n):
        n_prev = normals[i - 1]
        n_next = normals[i]
        m = n_prev + n_next
        denom = 1.0 + float(np.dot(n_prev, n_next))
        out[i] = v[i] + pad * m / denom
    return out


def polygon_boundary_samples(vertices: np.ndarray, spacing: float) -> np.ndarray:
    """Points along the polygon boundary at most `spacing` apart
    (vertices included)."""
    pts = []
    n = len(vertices)
    for i in range(n):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        L = math.hypot(b[0] - a[0], b[1] - a[1])
        steps = max(1, int(math.ceil(L / spacing)))
        for k in range(steps):
            pts.append(a + (b - a) * (k / steps))
    return np.array(pts)
