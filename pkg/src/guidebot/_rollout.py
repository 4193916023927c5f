"""Jitted arc-rollout collision kernel.

Mirrors planning.rollout_collision's python path operation for operation
(chord/arc stepping, distance-field shortcut, separating-axis cell test)
so both give identical first-collision steps.
"""
from __future__ import annotations

import math

import numpy as np

from ._dda import HAVE_NUMBA, njit

_HALF_DIAG = math.sqrt(2.0) / 2.0
_EPS_OMEGA = 1e-6


@njit(cache=True)
def _poly_hits_box(verts, v0, v1, bx0, by0, bx1, by1):  # pragma: no cover
    pxmin = verts[v0, 0]
    pxmax = verts[v0, 0]
    pymin = verts[v0, 1]
    pymax = verts[v0, 1]
    for i in range(v0 + 1, v1):
        if verts[i, 0] < pxmin:
            pxmin = verts[i, 0]
        if verts[i, 0] > pxmax:
            pxmax = verts[i, 0]
        if verts[i, 1] < pymin:
            pymin = verts[i, 1]
        if verts[i, 1] > pymax:
            pymax = verts[i, 1]
    if pxmax <= bx0 or pxmin >= bx1 or pymax <= by0 or pymin >= by1:
        return False
    cx = 0.5 * (bx0 + bx1)
    cy = 0.5 * (by0 + by1)
    hx = 0.5 * (bx1 - bx0)
    hy = 0.5 * (by1 - by0)
    n = v1 - v0
    for i in range(n):
        ax = verts[v0 + i, 0]
        ay = verts[v0 + i, 1]
        bx_ = verts[v0 + (i + 1) % n, 0]
        by_ = verts[v0 + (i + 1) % n, 1]
        nx = by_ - ay
        ny = ax - bx_
        pmin = math.inf
        pmax = -math.inf
        for j in range(v0, v1):
            pr = verts[j, 0] * nx + verts[j, 1] * ny
            if pr < pmin:
                pmin = pr
            if pr > pmax:
                pmax = pr
        box_c = cx * nx + cy * ny
        box_r = abs(nx) * hx + abs(ny) * hy
        if pmax <= box_c - box_r or pmin >= box_c + box_r:
            return False
    return True


@njit(cache=True)
def rollout_kernel(  # pragma: no cover
    lethal,
    lethal_dist,
    res,
    orx,
    ory,
    w,
    h,
    px,
    py,
    pth,
    v,
    om,
    dt,
    steps,
    verts_local,
    offs,
    refs,
    r_out,
    r_in,
    verts_buf,
):
    halfdiag = res * _HALF_DIAG
    x = px
    y = py
    th = pth
    npolys = len(offs) - 1
    x_min = orx
    y_min = ory
    x_max = orx + w * res
    y_max = ory + h * res
    for k in range(1, steps + 1):
        # advance one exact arc / chord step
        if abs(om) < _EPS_OMEGA:
            mid = th + 0.5 * om * dt
            x = x + v * dt * math.cos(mid)
            y = y + v * dt * math.sin(mid)
            th = th + om * dt
        else:
            th1 = th + om * dt
            r = v / om
            x = x + r * (math.sin(th1) - math.sin(th))
            y = y - r * (math.cos(th1) - math.cos(th))
            th = th1
        c = math.cos(th)
        s = math.sin(th)
        for p in range(npolys):
            v0 = offs[p]
            v1 = offs[p + 1]
            rx = x + c * refs[p, 0] - s * refs[p, 1]
            ry = y + s * refs[p, 0] + c * refs[p, 1]
            ix = int(math.floor((rx - orx) / res))
            iy = int(math.floor((ry - ory) / res))
            if 0 <= ix < w and 0 <= iy < h:
                border = min(rx - x_min, x_max - rx, ry - y_min, y_max - ry)
                d = lethal_dist[ix, iy]
                if d - halfdiag > r_out[p] + halfdiag and border > r_out[p]:
                    continue
                if d + halfdiag < r_in[p]:
                    return k
            bxmin = math.inf
            bymin = math.inf
            bxmax = -math.inf
            bymax = -math.inf
            for j in range(v0, v1):
                vx = x + c * verts_local[j, 0] - s * verts_local[j, 1]
                vy = y + s * verts_local[j, 0] + c * verts_local[j, 1]
                verts_buf[j, 0] = vx
                verts_buf[j, 1] = vy
                if vx < bxmin:
                    bxmin = vx
                if vx > bxmax:
                    bxmax = vx
                if vy < bymin:
                    bymin = vy
                if vy > bymax:
                    bymax = vy
            if bxmin < x_min or bymin < y_min or bxmax > x_max or bymax > y_max:
                return k
            ix0 = int(math.floor((bxmin - orx) / res))
            iy0 = int(math.floor((bymin - ory) / res))
            ix1 = int(math.floor((bxmax - orx) / res))
            iy1 = int(math.floor((bymax - ory) / res))
            if ix0 < 0:
                ix0 = 0
            if iy0 < 0:
                iy0 = 0
            if ix1 > w - 1:
                ix1 = w - 1
            if iy1 > h - 1:
                iy1 = h - 1
            hit = False
            for ci in range(ix0, ix1 + 1):
                for cj in range(iy0, iy1 + 1):
                    if not lethal[ci, cj]:
                        continue
                    bx0 = orx + ci * res
                    by0 = ory + cj * res
                    if _poly_hits_box(
                        verts_buf, v0, v1, bx0, by0, bx0 + res, by0 + res
                    ):
                        hit = True
                        break
                if hit:
                    break
            if hit:
                return k
    return 0


def pack_footprint(fp) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Flatten a CompositeFootprint into kernel arrays (cached on the instance)."""
    packed = getattr(fp, "_packed", None)
    if packed is None:
        verts = np.concatenate(fp.polygons, axis=0).astype(np.float64)
        offs = np.zeros(len(fp.polygons) + 1, dtype=np.int64)
        for i, p in enumerate(fp.polygons):
            offs[i + 1] = offs[i] + len(p)
        refs = np.asarray(fp._refs, dtype=np.float64)
        r_out = np.asarray(fp._r_out, dtype=np.float64)
        r_in = np.asarray(fp._r_in, dtype=np.float64)
        packed = (verts, offs, refs, r_out, r_in)
        object.__setattr__(fp, "_packed", packed)
    return packed


__all__ = ["HAVE_NUMBA", "rollout_kernel", "pack_footprint"]
