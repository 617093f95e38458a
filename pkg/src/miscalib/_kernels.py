"""Numba kernels for the per-pixel hot paths.

These mirror the array math in camera.py / rectify.py exactly (same
operation order, double precision, no fastmath) so results agree with the
plain numpy formulations to the last few ulps.  They exist because map
construction and resampling run tens of thousands of times during
rejection sampling.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def build_grid(width, height, fu, fv, uc, vc, k1, k2, k3, p1, p2):
    # The source coordinate is written as pixel + focal * displacement so
    # that zero distortion yields the identity grid exactly (no round trip
    # through normalized coordinates).
    grid = np.empty((height, width, 2))
    for j in range(height):
        ny = (j - vc) / fv
        ny2 = ny * ny
        for i in range(width):
            nx = (i - uc) / fu
            nx2 = nx * nx
            r2 = nx2 + ny2
            radial_m1 = r2 * (k1 + r2 * (k2 + r2 * k3))
            xy = nx * ny
            dx = nx * radial_m1 + 2.0 * p1 * xy + p2 * (r2 + 2.0 * nx2)
            dy = ny * radial_m1 + p1 * (r2 + 2.0 * ny2) + 2.0 * p2 * xy
            grid[j, i, 0] = i + fu * dx
            grid[j, i, 1] = j + fv * dy
    return grid


@numba.njit(cache=True)
def crop_rescale_grid(grid, x0, y0, w, h, out_w, out_h):
    in_h, in_w = grid.shape[0], grid.shape[1]
    out = np.empty((out_h, out_w, 2))
    sx = w / out_w
    sy = h / out_h
    for j in range(out_h):
        y = y0 + j * sy
        if y < 0.0:
            y = 0.0
        elif y > in_h - 1.0:
            y = in_h - 1.0
        iy = int(np.floor(y))
        if iy > in_h - 2:
            iy = in_h - 2
        fy = y - iy
        for i in range(out_w):
            x = x0 + i * sx
            if x < 0.0:
                x = 0.0
            elif x > in_w - 1.0:
                x = in_w - 1.0
            ix = int(np.floor(x))
            if ix > in_w - 2:
                ix = in_w - 2
            fx = x - ix
            for c in range(2):
                top = grid[iy, ix, c] * (1.0 - fx) + grid[iy, ix + 1, c] * fx
                bot = grid[iy + 1, ix, c] * (1.0 - fx) + grid[iy + 1, ix + 1, c] * fx
                out[j, i, c] = top * (1.0 - fy) + bot * fy
    return out


@numba.njit(cache=True)
def mean_displacement(grid_a, grid_b):
    h, w = grid_a.shape[0], grid_a.shape[1]
    total = 0.0
    for j in range(h):
        row = 0.0
        for i in range(w):
            dx = grid_a[j, i, 0] - grid_b[j, i, 0]
            dy = grid_a[j, i, 1] - grid_b[j, i, 1]
            row += np.sqrt(dx * dx + dy * dy)
        total += row
    return total / (h * w)


@numba.njit(cache=True)
def border_all_valid(mask, x0, y0, w, h):
    mh, mw = mask.shape
    nx = int(np.ceil(w)) + 1
    if nx < 2:
        nx = 2
    ny = int(np.ceil(h)) + 1
    if ny < 2:
        ny = 2
    for i in range(nx):
        x = x0 + w * i / (nx - 1)
        ix = int(np.rint(x))
        if ix < 0:
            ix = 0
        elif ix > mw - 1:
            ix = mw - 1
        for yy in (y0, y0 + h):
            iy = int(np.rint(yy))
            if iy < 0:
                iy = 0
            elif iy > mh - 1:
                iy = mh - 1
            if not mask[iy, ix]:
                return False
    for i in range(ny):
        y = y0 + h * i / (ny - 1)
        iy = int(np.rint(y))
        if iy < 0:
            iy = 0
        elif iy > mh - 1:
            iy = mh - 1
        for xx in (x0, x0 + w):
            ix = int(np.rint(xx))
            if ix < 0:
                ix = 0
            elif ix > mw - 1:
                ix = mw - 1
            if not mask[iy, ix]:
                return False
    return True


@numba.njit(cache=True)
def validity(grid, raw_w, raw_h):
    h, w = grid.shape[0], grid.shape[1]
    mask = np.empty((h, w), dtype=np.bool_)
    for j in range(h):
        for i in range(w):
            sx = grid[j, i, 0]
            sy = grid[j, i, 1]
            mask[j, i] = 0.0 <= sx <= raw_w - 1.0 and 0.0 <= sy <= raw_h - 1.0
    return mask
