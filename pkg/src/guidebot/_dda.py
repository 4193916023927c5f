"""Exact grid raycasting core (DDA cell walking).

One scalar algorithm, two executions: a numba-jitted kernel when numba is
importable, and a lockstep numpy fallback.  Both produce bit-identical
ranges (same float operations, same x-first tie rule at corners).
"""
from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f

        return deco


@njit(cache=True)
def _dda_kernel(cells, w, h, res, gx, gy, dxs, dys, caps, out):  # pragma: no cover
    ix0 = int(math.floor(gx))
    iy0 = int(math.floor(gy))
    fx = gx - math.floor(gx)
    fy = gy - math.floor(gy)
    for i in range(len(dxs)):
        dx = dxs[i]
        dy = dys[i]
        cap = caps[i]
        ix = ix0
        iy = iy0
        sx = 1 if dx >= 0 else -1
        sy = 1 if dy >= 0 else -1
        tdx = res / abs(dx) if dx != 0.0 else math.inf
        tdy = res / abs(dy) if dy != 0.0 else math.inf
        tmx = (1.0 - fx) * tdx if dx >= 0 else fx * tdx
        tmy = (1.0 - fy) * tdy if dy >= 0 else fy * tdy
        r = cap
        while True:
            if tmx <= tmy:
                t = tmx
                tmx += tdx
                ix += sx
            else:
                t = tmy
                tmy += tdy
                iy += sy
            if t >= cap:
                break
            if ix < 0 or ix >= w or iy < 0 or iy >= h or cells[ix, iy] != 0:
                r = t
                break
        out[i] = r if r > 1e-9 else 1e-9
    return out


def _dda_numpy(cells, w, h, res, gx, gy, dxs, dys, caps):
    n = len(dxs)
    ix = np.full(n, int(math.floor(gx)))
    iy = np.full(n, int(math.floor(gy)))
    step_x = np.where(dxs >= 0, 1, -1)
    step_y = np.where(dys >= 0, 1, -1)
    with np.errstate(divide="ignore"):
        tdx = res / np.abs(dxs)
        tdy = res / np.abs(dys)
    fx = gx - math.floor(gx)
    fy = gy - math.floor(gy)
    tmx = np.where(dxs >= 0, 1.0 - fx, fx) * tdx
    tmy = np.where(dys >= 0, 1.0 - fy, fy) * tdy
    ranges = caps.copy()
    active = np.ones(n, dtype=bool)
    while active.any():
        move_x = tmx <= tmy
        adv_x = active & move_x
        adv_y = active & ~move_x
        t_new = np.where(move_x, tmx, tmy)
        ix = np.where(adv_x, ix + step_x, ix)
        iy = np.where(adv_y, iy + step_y, iy)
        tmx = np.where(adv_x, tmx + tdx, tmx)
        tmy = np.where(adv_y, tmy + tdy, tmy)
        capped = active & (t_new >= caps)
        active &= ~capped
        if not active.any():
            break
        oob = (ix < 0) | (ix >= w) | (iy < 0) | (iy >= h)
        cx = np.clip(ix, 0, w - 1)
        cy = np.clip(iy, 0, h - 1)
        hit = active & (oob | (cells[cx, cy] != 0))
        ranges[hit] = t_new[hit]
        active &= ~hit
    return np.maximum(ranges, 1e-9)


def cast_rays(cells, w, h, res, gx, gy, angles, caps, force_numpy: bool = False):
    """Per-ray distance to the first non-free cell boundary, capped.

    (gx, gy) is the ray origin in cell units; `caps` broadcasts per ray.
    """
    angles = np.asarray(angles, dtype=float)
    n = len(angles)
    caps = np.ascontiguousarray(np.broadcast_to(np.asarray(caps, dtype=float), (n,)))
    dxs = np.cos(angles)
    dys = np.sin(angles)
    if HAVE_NUMBA and not force_numpy:
        out = np.empty(n)
        return _dda_kernel(cells, w, h, res, gx, gy, dxs, dys, caps.copy(), out)
    return _dda_numpy(cells, w, h, res, gx, gy, dxs, dys, caps.copy())
