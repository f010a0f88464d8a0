"""Pure numpy/Python kernels: the fallback backend.

Same contract as the compiled `_kernels` extension; selected by
`svglab.kernels` when the extension is unavailable or disabled.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# crack-walk direction tables: E, S, W, N
_VX = (1, 0, -1, 0)
_VY = (0, 1, 0, -1)
_AL_DX = (0, 0, -1, -1)
_AL_DY = (-1, 0, 0, -1)
_AR_DX = (0, -1, -1, 0)
_AR_DY = (0, 0, -1, -1)


def fill_mask(xs: np.ndarray, ys: np.ndarray, starts: np.ndarray,
              width: int, height: int, evenodd: bool) -> np.ndarray:
    """Scanline fill of a closed-polyline set, sampled at pixel centers.

    xs/ys hold all vertices concatenated; starts[i]:starts[i+1] delimits
    polyline i (first vertex repeated at the end).  Returns a bool mask.
    """
    acc = np.zeros((height, width + 1), dtype=np.int32)
    x1_list, y1_list, x2_list, y2_list = [], [], [], []
    for p in range(len(starts) - 1):
        lo, hi = starts[p], starts[p + 1]
        if hi - lo < 2:
            continue
        x1_list.append(xs[lo:hi - 1])
        y1_list.append(ys[lo:hi - 1])
        x2_list.append(xs[lo + 1:hi])
        y2_list.append(ys[lo + 1:hi])
    if not x1_list:
        return np.zeros((height, width), dtype=bool)
    x1 = np.concatenate(x1_list)
    y1 = np.concatenate(y1_list)
    x2 = np.concatenate(x2_list)
    y2 = np.concatenate(y2_list)

    keep = y1 != y2
    x1, y1, x2, y2 = x1[keep], y1[keep], x2[keep], y2[keep]
    if len(x1) == 0:
        return np.zeros((height, width), dtype=bool)
    wind = np.where(y2 > y1, 1, -1).astype(np.int32)

    ylo = np.minimum(y1, y2)
    yhi = np.maximum(y1, y2)
    r0 = np.clip(np.ceil(ylo - 0.5), 0, height).astype(np.int64)
    r1 = np.clip(np.ceil(yhi - 0.5), 0, height).astype(np.int64)
    counts = np.maximum(r1 - r0, 0)
    total = int(counts.sum())
    if total == 0:
        return np.zeros((height, width), dtype=bool)

    edge_idx = np.repeat(np.arange(len(counts)), counts)
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    within = np.arange(total) - np.repeat(offsets, counts)
    rows = r0[edge_idx] + within
    yc = rows + 0.5
    t = (yc - y1[edge_idx]) / (y2[edge_idx] - y1[edge_idx])
    xc = x1[edge_idx] + t * (x2[edge_idx] - x1[edge_idx])
    cols = np.clip(np.ceil(xc - 0.5), 0, width).astype(np.int64)
    np.add.at(acc, (rows, cols), wind[edge_idx])

    winding = np.cumsum(acc, axis=1)[:, :width]
    if evenodd:
        return winding % 2 != 0
    return winding != 0


def label_components(mask: np.ndarray, connectivity: int) -> tuple[np.ndarray, int]:
    """Label connected components of a boolean mask (4- or 8-connectivity)."""
    try:
        from scipy import ndimage
    except ImportError:
        return _label_bfs(mask, connectivity)
    if connectivity == 8:
        structure = np.ones((3, 3), dtype=bool)
    else:
        structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
    labels, count = ndimage.label(mask, structure=structure)
    return labels.astype(np.int32), int(count)


def _label_bfs(mask: np.ndarray, connectivity: int) -> tuple[np.ndarray, int]:
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    if connectivity == 8:
        neigh = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    else:
        neigh = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    current = 0
    for sy in range(h):
        for sx in range(w):
            if not mask[sy, sx] or labels[sy, sx]:
                continue
            current += 1
            stack = [(sy, sx)]
            labels[sy, sx] = current
            while stack:
                y, x = stack.pop()
                for dy, dx in neigh:
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not labels[ny, nx]:
                        labels[ny, nx] = current
                        stack.append((ny, nx))
    return labels, current


def trace_boundary(region: np.ndarray, start_x: int, start_y: int, hole: bool) -> np.ndarray:
    """Crack-following boundary walk around one component.

    Keeps the region on the right-hand side, so outer boundaries come out
    with positive shoelace area and holes negative.  Stops when the first
    directed boundary edge is about to repeat (re-entering the start in the
    same direction).  Vertices are pixel-corner lattice points.
    """
    h, w = region.shape

    def fg(px: int, py: int) -> bool:
        return 0 <= px < w and 0 <= py < h and bool(region[py, px])

    if hole:
        px, py, d = start_x + 1, start_y, 2  # west along the crack above the hole
    else:
        px, py, d = start_x, start_y, 0  # east along the top edge

    first = (px, py, d)
    out = []
    while True:
        out.append((px, py))
        px += _VX[d]
        py += _VY[d]
        if fg(px + _AL_DX[d], py + _AL_DY[d]):
            d = (d + 3) % 4
        elif fg(px + _AR_DX[d], py + _AR_DY[d]):
            pass
        else:
            d = (d + 1) % 4
        if (px, py, d) == first:
            break
    return np.asarray(out, dtype=np.int32)
