# cython: language_level=3
"""Compiled kernels: scanline fill, component labeling, boundary tracing.

Mirrors `_kernels_py`; `svglab.kernels` picks whichever is available.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil

cnp.import_array()

BACKEND = "compiled"

cdef int[4] _VX = [1, 0, -1, 0]
cdef int[4] _VY = [0, 1, 0, -1]
cdef int[4] _AL_DX = [0, 0, -1, -1]
cdef int[4] _AL_DY = [-1, 0, 0, -1]
cdef int[4] _AR_DX = [0, -1, -1, 0]
cdef int[4] _AR_DY = [0, 0, -1, -1]


def fill_mask(double[::1] xs, double[::1] ys, long long[::1] starts,
              int width, int height, bint evenodd):
    """Scanline fill of a closed-polyline set, sampled at pixel centers."""
    acc_arr = np.zeros((height, width + 1), dtype=np.int32)
    cdef int[:, ::1] acc = acc_arr
    cdef Py_ssize_t p, e, lo, hi
    cdef double x1, y1, x2, y2, ylo, yhi, yc, xc, t
    cdef int wind, r, r0, r1, col

    for p in range(starts.shape[0] - 1):
        lo = starts[p]
        hi = starts[p + 1]
        for e in range(lo, hi - 1):
            x1 = xs[e]
            y1 = ys[e]
            x2 = xs[e + 1]
            y2 = ys[e + 1]
            if y1 == y2:
                continue
            if y2 > y1:
                wind = 1
                ylo = y1
                yhi = y2
            else:
                wind = -1
                ylo = y2
                yhi = y1
            r0 = <int>ceil(ylo - 0.5)
            r1 = <int>ceil(yhi - 0.5)
            if r0 < 0:
                r0 = 0
            if r1 > height:
                r1 = height
            for r in range(r0, r1):
                yc = r + 0.5
                t = (yc - y1) / (y2 - y1)
                xc = x1 + t * (x2 - x1)
                col = <int>ceil(xc - 0.5)
                if col < 0:
                    col = 0
                elif col > width:
                    col = width
                acc[r, col] += wind

    out_arr = np.empty((height, width), dtype=bool)
    cdef cnp.uint8_t[:, ::1] out = out_arr.view(np.uint8)
    cdef int running
    cdef Py_ssize_t x, y
    for y in range(height):
        running = 0
        for x in range(width):
            running += acc[y, x]
            if evenodd:
                out[y, x] = 1 if running % 2 != 0 else 0
            else:
                out[y, x] = 1 if running != 0 else 0
    return out_arr


def label_components(mask, int connectivity):
    """Label connected components of a boolean mask (4- or 8-connectivity)."""
    mask_arr = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] m = mask_arr
    cdef int h = mask_arr.shape[0]
    cdef int w = mask_arr.shape[1]
    labels_arr = np.zeros((h, w), dtype=np.int32)
    cdef int[:, ::1] labels = labels_arr
    stack_arr = np.empty((h * w, 2), dtype=np.int32)
    cdef int[:, ::1] stack = stack_arr
    cdef int[8] ndy = [0, 0, -1, 1, -1, -1, 1, 1]
    cdef int[8] ndx = [-1, 1, 0, 0, -1, 1, -1, 1]
    cdef int n_neigh = 8 if connectivity == 8 else 4
    cdef int current = 0
    cdef Py_ssize_t sy, sx, top
    cdef int y, x, ny, nx, k

    for sy in range(h):
        for sx in range(w):
            if m[sy, sx] == 0 or labels[sy, sx] != 0:
                continue
            current += 1
            top = 0
            stack[top, 0] = <int>sy
            stack[top, 1] = <int>sx
            top += 1
            labels[sy, sx] = current
            while top > 0:
                top -= 1
                y = stack[top, 0]
                x = stack[top, 1]
                for k in range(n_neigh):
                    ny = y + ndy[k]
                    nx = x + ndx[k]
                    if 0 <= ny < h and 0 <= nx < w and m[ny, nx] != 0 and labels[ny, nx] == 0:
                        labels[ny, nx] = current
                        stack[top, 0] = ny
                        stack[top, 1] = nx
                        top += 1
    return labels_arr, current


def trace_boundary(region, int start_x, int start_y, bint hole):
    """Crack-following boundary walk; see `_kernels_py.trace_boundary`."""
    region_arr = np.ascontiguousarray(region, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] m = region_arr
    cdef int h = region_arr.shape[0]
    cdef int w = region_arr.shape[1]
    cdef long long cap = 4 * <long long>np.count_nonzero(region_arr) + 8
    out_arr = np.empty((cap, 2), dtype=np.int32)
    cdef int[:, ::1] out = out_arr
    cdef int px, py, d, fx, fy, fd, qx, qy
    cdef long long n = 0

    if hole:
        px = start_x + 1
        py = start_y
        d = 2
    else:
        px = start_x
        py = start_y
        d = 0
    fx = px
    fy = py
    fd = d

    while True:
        out[n, 0] = px
        out[n, 1] = py
        n += 1
        px += _VX[d]
        py += _VY[d]
        qx = px + _AL_DX[d]
        qy = py + _AL_DY[d]
        if 0 <= qx < w and 0 <= qy < h and m[qy, qx] != 0:
            d = (d + 3) % 4
        else:
            qx = px + _AR_DX[d]
            qy = py + _AR_DY[d]
            if 0 <= qx < w and 0 <= qy < h and m[qy, qx] != 0:
                pass
            else:
                d = (d + 1) % 4
        if px == fx and py == fy and d == fd:
            break
    return out_arr[:n].copy()
