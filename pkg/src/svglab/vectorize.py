"""Raster-to-SVG conversion.

Three stages: pixels become closed boundary contours, contours are condensed
to simplified polygons, and polygons are approximated by least-squares cubic
Beziers.  A segmentation-mask path converts externally produced masks (one
colored path set per mask) with the same machinery.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .core import (
    BLACK,
    WHITE,
    Close,
    Color,
    CubicTo,
    LineTo,
    MoveTo,
    Path,
    PathSegment,
    Rect,
    SvgDocument,
    document,
    flatten_cubic,
)
from .errors import (
    DegenerateContour,
    EmptyForeground,
    EmptyMaskSet,
    ShapeMismatch,
)
from .raster import RasterImage, read_raster, to_gray

# Arc-length window (px) over which turn angles are measured when deciding
# which vertices count as corners; raw crack contours turn 90 deg at every
# lattice step, so corners must be judged at feature scale, not step scale.
CORNER_WINDOW_PX = 3.0

# Least-squares cubic fitting stops refining once the worst point sits
# within this many pixels of the curve.
FIT_MAX_ERROR_PX = 1.0


@dataclass(frozen=True)
class VectorizeConfig:
    """Tracing hyperparameters (defaults follow the mask-conversion recipe)."""

    mode: str = "binary"
    binarize_threshold: float = 127.5
    color_precision_bits: int = 0
    corner_angle_deg: float = 90.0
    layer_color_difference: float = 35.0
    min_patch_px: int = 16
    max_segment_px: float = 10.0
    invert: bool = False

    def __post_init__(self) -> None:
        if self.mode not in ("binary", "color"):
            raise ValueError(f"mode must be binary or color, got {self.mode!r}")
        if not 0 <= self.color_precision_bits <= 8:
            raise ValueError("color_precision_bits must be in 0..8")
        if not 0 <= self.binarize_threshold <= 255:
            raise ValueError("binarize_threshold must be in 0..255")
        if not 0 <= self.layer_color_difference <= 255 * math.sqrt(3):
            raise ValueError("layer_color_difference out of range")
        if self.min_patch_px < 0:
            raise ValueError("min_patch_px must be >= 0")
        if self.max_segment_px <= 0:
            raise ValueError("max_segment_px must be positive")


MASK_MODE_CONFIG = VectorizeConfig()


@dataclass(frozen=True)
class Contour:
    """Closed pixel-corner polyline; outer rings have positive signed area."""

    points: np.ndarray  # (K, 2) lattice points, not repeated at the end
    orientation: str  # "outer" | "hole"
    color: Optional[Color] = None

    def signed_area(self) -> float:
        return signed_area(self.points)


@dataclass(frozen=True)
class MaskEntry:
    mask: np.ndarray  # (h, w) bool
    area: int
    mean_color: Color


@dataclass(frozen=True)
class LabeledMaskSet:
    entries: tuple[MaskEntry, ...]

    def __post_init__(self) -> None:
        areas = [e.area for e in self.entries]
        if areas != sorted(areas, reverse=True):
            raise ValueError("mask entries must be sorted by area descending")


def signed_area(points: np.ndarray) -> float:
    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


# --- stage 0: foreground extraction -------------------------------------------

def binarize(img: RasterImage, threshold: float = 127.5, invert: bool = False) -> np.ndarray:
    """Boolean foreground grid: gray strictly above the threshold (or below,
    when `invert` flips a dark-subject-on-light-background image)."""
    gray = to_gray(img)
    mask = gray > threshold
    return ~mask if invert else mask


def quantize_colors(img: RasterImage, bits: int,
                    layer_color_difference: float = 35.0) -> list[tuple[Color, np.ndarray]]:
    """Partition the image into color layers.

    bits >= 1 truncates each channel to its top `bits` bits; bits == 0
    clusters greedily instead: walking distinct colors in first-appearance
    order, a color founds a new layer when its distance to every existing
    layer mean exceeds `layer_color_difference`.  Layers come back largest
    first.
    """
    if not 0 <= bits <= 8:
        raise ValueError("bits must be in 0..8")
    h, w = img.height, img.width
    flat = img.pixels.reshape(-1, 3)

    if bits >= 1:
        shift = 8 - bits
        quantized = (flat >> shift) << shift
        colors, inverse, counts = np.unique(
            quantized, axis=0, return_inverse=True, return_counts=True)
        assignment = inverse
        layer_colors = [Color(int(c[0]), int(c[1]), int(c[2])) for c in colors]
    else:
        colors, first_idx, inverse, counts = np.unique(
            flat, axis=0, return_index=True, return_inverse=True, return_counts=True)
        order = np.argsort(first_idx, kind="stable")
        sums: list[np.ndarray] = []
        weights: list[int] = []
        color_to_layer = np.empty(len(colors), dtype=np.int64)
        for ci in order:
            c = colors[ci].astype(np.float64)
            n = int(counts[ci])
            if sums:
                means = np.array([s / t for s, t in zip(sums, weights)])
                dists = np.sqrt(np.sum((means - c) ** 2, axis=1))
                best = int(np.argmin(dists))
                if dists[best] <= layer_color_difference:
                    color_to_layer[ci] = best
                    sums[best] = sums[best] + c * n
                    weights[best] += n
                    continue
            color_to_layer[ci] = len(sums)
            sums.append(c * n)
            weights.append(n)
        assignment = color_to_layer[inverse]
        layer_colors = [
            Color(*(int(round(v)) for v in s / t)) for s, t in zip(sums, weights)
        ]

    layers = []
    for li, color in enumerate(layer_colors):
        mask = (assignment == li).reshape(h, w)
        size = int(mask.sum())
        if size:
            layers.append((size, color, mask))
    layers.sort(key=lambda item: (-item[0], item[1].as_tuple()))
    return [(color, mask) for _, color, mask in layers]


# --- stage 1: contour tracing --------------------------------------------------

def _first_true(mask: np.ndarray) -> tuple[int, int]:
    idx = int(np.argmax(mask))
    return idx % mask.shape[1], idx // mask.shape[1]  # x, y


def trace_contours(mask: np.ndarray, min_patch_px: int = 0,
                   color: Optional[Color] = None) -> list[Contour]:
    """Boundary contours of 8-connected foreground components.

    Holes are 4-connected background components enclosed by a component.
    Patches (foreground or hole) smaller than `min_patch_px` are discarded.
    The list interleaves each outer contour with the holes it encloses.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return []
    labels, n = kernels.label_components(mask, 8)
    bg_labels, m = kernels.label_components(~mask, 4)

    border = set()
    if m:
        border.update(np.unique(bg_labels[0, :]))
        border.update(np.unique(bg_labels[-1, :]))
        border.update(np.unique(bg_labels[:, 0]))
        border.update(np.unique(bg_labels[:, -1]))
    border.discard(0)

    holes_by_owner: dict[int, list[tuple[int, int, int]]] = {}
    for j in range(1, m + 1):
        if j in border:
            continue
        hole_mask = bg_labels == j
        area = int(hole_mask.sum())
        if area < min_patch_px:
            continue
        hx, hy = _first_true(hole_mask)
        owner = int(labels[hy - 1, hx])
        holes_by_owner.setdefault(owner, []).append((hy, hx, area))

    out: list[Contour] = []
    counts = np.bincount(labels.ravel(), minlength=n + 1)
    for i in range(1, n + 1):
        if counts[i] < min_patch_px:
            continue
        comp = (labels == i).astype(np.uint8)
        sx, sy = _first_true(comp)
        outer = kernels.trace_boundary(comp, sx, sy, False)
        out.append(Contour(points=outer, orientation="outer", color=color))
        for hy, hx, _ in sorted(holes_by_owner.get(i, [])):
            ring = kernels.trace_boundary(comp, hx, hy, True)
            out.append(Contour(points=ring, orientation="hole", color=color))
    return out


def group_contour_trees(contours: Sequence[Contour]) -> list[tuple[Contour, list[Contour]]]:
    """Regroup the interleaved contour list into (outer, holes) trees."""
    trees: list[tuple[Contour, list[Contour]]] = []
    for c in contours:
        if c.orientation == "outer":
            trees.append((c, []))
        else:
            if not trees:
                raise ValueError("hole contour before any outer contour")
            trees[-1][1].append(c)
    return trees


# --- stage 2: polygon simplification -------------------------------------------

def _ring_turn_angles_windowed(points: np.ndarray, window: float) -> np.ndarray:
    """Turn angle (deg) at each vertex, measured between the directions to the
    ring points roughly `window` arc-length away on each side."""
    n = len(points)
    pts = points.astype(np.float64)
    edge_len = np.sqrt(np.sum((np.roll(pts, -1, axis=0) - pts) ** 2, axis=1))

    # forward: smallest t >= 1 with sum(edge_len[i:i+t]) >= window, t <= n
    cum = np.concatenate(([0.0], np.cumsum(np.concatenate([edge_len, edge_len]))))
    idx = np.arange(n)
    t_fwd = np.searchsorted(cum, cum[idx] + window, side="left") - idx
    t_fwd = np.clip(t_fwd, 1, n)
    fwd = pts[(idx + t_fwd) % n]
    # backward walk over reversed edges: edge before vertex i is edge_len[i-1]
    rev = edge_len[::-1]
    cum_r = np.concatenate(([0.0], np.cumsum(np.concatenate([rev, rev]))))
    ridx = n - 1 - idx  # position of vertex i's preceding edge in rev order
    t_back = np.searchsorted(cum_r, cum_r[ridx] + window, side="left") - ridx
    t_back = np.clip(t_back, 1, n)
    back = pts[(idx - t_back) % n]

    u = pts - back
    v = fwd - pts
    nu = np.linalg.norm(u, axis=1)
    nv = np.linalg.norm(v, axis=1)
    safe = (nu > 1e-12) & (nv > 1e-12)
    cosang = np.ones(n)
    cosang[safe] = np.clip(np.sum(u[safe] * v[safe], axis=1) / (nu[safe] * nv[safe]), -1, 1)
    angles = np.degrees(np.arccos(cosang))
    angles[~safe] = 0.0
    return angles


def _triangle_area(a, b, c) -> float:
    return 0.5 * abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))


def simplify_polygon(points: np.ndarray, tolerance_px: float,
                     corner_angle_deg: float = 90.0) -> np.ndarray:
    """Visvalingam-Whyatt ring simplification with corner pinning.

    Vertices whose windowed turn angle reaches `corner_angle_deg` are never
    removed; every removed vertex spanned a triangle of area at most
    `tolerance_px` squared.  A zero tolerance returns the input unchanged.
    """
    import heapq

    pts = np.asarray(points, dtype=np.float64)
    if len(np.unique(pts, axis=0)) < 3:
        raise DegenerateContour(f"need >= 3 distinct vertices, got {len(pts)}")
    if tolerance_px < 0:
        raise ValueError("tolerance_px must be >= 0")
    if tolerance_px == 0:
        return pts.copy()

    n = len(pts)
    pinned = _ring_turn_angles_windowed(pts, CORNER_WINDOW_PX) >= corner_angle_deg
    limit = tolerance_px * tolerance_px

    prv = np.arange(n) - 1
    nxt = np.arange(n) + 1
    prv[0] = n - 1
    nxt[n - 1] = 0
    alive = np.ones(n, dtype=bool)
    alive_count = n

    version = np.zeros(n, dtype=np.int64)
    heap: list[tuple[float, int, int]] = []
    for i in range(n):
        if not pinned[i]:
            area = _triangle_area(pts[prv[i]], pts[i], pts[nxt[i]])
            heapq.heappush(heap, (area, i, 0))

    while heap and alive_count > 3:
        area, i, ver = heapq.heappop(heap)
        if not alive[i] or ver != version[i] or pinned[i]:
            continue
        if area > limit:
            break
        alive[i] = False
        alive_count -= 1
        p, q = prv[i], nxt[i]
        nxt[p] = q
        prv[q] = p
        for j in (p, q):
            if alive[j] and not pinned[j]:
                version[j] += 1
                new_area = _triangle_area(pts[prv[j]], pts[j], pts[nxt[j]])
                heapq.heappush(heap, (new_area, j, int(version[j])))

    return pts[alive]


# --- stage 3: cubic curve fitting ----------------------------------------------

def _normalize(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    return v / norm if norm > 1e-12 else v


def _chord_parameterize(pts: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.sum(np.diff(pts, axis=0) ** 2, axis=1))
    u = np.concatenate(([0.0], np.cumsum(d)))
    return u / u[-1]


def _bernstein(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    omu = 1.0 - u
    return omu ** 3, 3 * u * omu ** 2, 3 * u * u * omu, u ** 3


def _generate_bezier(pts: np.ndarray, u: np.ndarray,
                     t_hat1: np.ndarray, t_hat2: np.ndarray) -> np.ndarray:
    p0, p3 = pts[0], pts[-1]
    b0, b1, b2, b3 = _bernstein(u)
    a0 = t_hat1[None, :] * b1[:, None]
    a1 = t_hat2[None, :] * b2[:, None]
    c00 = float(np.sum(a0 * a0))
    c01 = float(np.sum(a0 * a1))
    c11 = float(np.sum(a1 * a1))
    base = pts - (p0[None, :] * (b0 + b1)[:, None] + p3[None, :] * (b2 + b3)[:, None])
    x0 = float(np.sum(a0 * base))
    x1 = float(np.sum(a1 * base))

    det = c00 * c11 - c01 * c01
    alpha1 = alpha2 = 0.0
    if abs(det) > 1e-12:
        alpha1 = (x0 * c11 - x1 * c01) / det
        alpha2 = (c00 * x1 - c01 * x0) / det
    seg_len = float(np.linalg.norm(p3 - p0))
    epsilon = 1e-6 * seg_len
    if alpha1 < epsilon or alpha2 < epsilon:
        # Wu/Barsky heuristic when the system is ill-conditioned
        alpha1 = alpha2 = seg_len / 3.0
    return np.array([p0, p0 + t_hat1 * alpha1, p3 + t_hat2 * alpha2, p3])


def _bezier_eval_many(bez: np.ndarray, u: np.ndarray) -> np.ndarray:
    b0, b1, b2, b3 = _bernstein(u)
    return (b0[:, None] * bez[0] + b1[:, None] * bez[1]
            + b2[:, None] * bez[2] + b3[:, None] * bez[3])


def _max_error(pts: np.ndarray, bez: np.ndarray, u: np.ndarray) -> tuple[float, int]:
    if len(pts) <= 2:
        return 0.0, 1
    d = np.sum((_bezier_eval_many(bez, u[1:-1]) - pts[1:-1]) ** 2, axis=1)
    i = int(np.argmax(d))
    return float(d[i]), i + 1


def _reparameterize(pts: np.ndarray, bez: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = u.copy()
    t = u[1:-1]
    omt = 1 - t
    p0, p1, p2, p3 = bez
    q = _bezier_eval_many(bez, t) - pts[1:-1]
    d1 = 3 * (p1 - p0)
    d2 = 3 * (p2 - p1)
    d3 = 3 * (p3 - p2)
    dq = (d1[None, :] * (omt * omt)[:, None]
          + d2[None, :] * (2 * omt * t)[:, None]
          + d3[None, :] * (t * t)[:, None])
    ddq = 6 * (omt[:, None] * (p2 - 2 * p1 + p0)[None, :]
               + t[:, None] * (p3 - 2 * p2 + p1)[None, :])
    num = np.sum(q * dq, axis=1)
    den = np.sum(dq * dq, axis=1) + np.sum(q * ddq, axis=1)
    ok = np.abs(den) > 1e-12
    t_new = np.where(ok, t - np.divide(num, den, out=np.zeros_like(num), where=ok), t)
    good = (t_new > 0.0) & (t_new < 1.0)
    out[1:-1] = np.where(good, t_new, t)
    return out


def _fit_cubic(pts: np.ndarray, t_hat1: np.ndarray, t_hat2: np.ndarray,
               error: float, depth: int = 0) -> list[np.ndarray]:
    if len(pts) == 2:
        dist = float(np.linalg.norm(pts[1] - pts[0])) / 3.0
        return [np.array([pts[0], pts[0] + t_hat1 * dist, pts[1] + t_hat2 * dist, pts[1]])]

    u = _chord_parameterize(pts)
    bez = _generate_bezier(pts, u, t_hat1, t_hat2)
    err2, split = _max_error(pts, bez, u)
    if err2 <= error * error:
        return [bez]
    if err2 <= (4 * error) ** 2:
        for _ in range(4):
            u = _reparameterize(pts, bez, u)
            bez = _generate_bezier(pts, u, t_hat1, t_hat2)
            err2, split = _max_error(pts, bez, u)
            if err2 <= error * error:
                return [bez]
    if depth > 32:
        return [bez]
    split = min(max(split, 1), len(pts) - 2)
    t_center = _normalize(pts[split - 1] - pts[split + 1])
    left = _fit_cubic(pts[:split + 1], t_hat1, t_center, error, depth + 1)
    right = _fit_cubic(pts[split:], -t_center, t_hat2, error, depth + 1)
    return left + right


def _ring_turn_angles_raw(pts: np.ndarray) -> np.ndarray:
    incoming = pts - np.roll(pts, 1, axis=0)
    outgoing = np.roll(pts, -1, axis=0) - pts
    ni = np.linalg.norm(incoming, axis=1)
    no = np.linalg.norm(outgoing, axis=1)
    safe = (ni > 1e-12) & (no > 1e-12)
    cosang = np.ones(len(pts))
    cosang[safe] = np.clip(
        np.sum(incoming[safe] * outgoing[safe], axis=1) / (ni[safe] * no[safe]), -1, 1)
    return np.degrees(np.arccos(cosang))


def fit_curves(polyline: Union[np.ndarray, Sequence[tuple[float, float]]],
               corner_angle_deg: float = 90.0,
               max_segment_px: float = 10.0) -> list[PathSegment]:
    """Fit a closed ring: split at corners, least-squares cubics in between,
    then subdivide until every flattened chord is at most `max_segment_px`."""
    pts = np.asarray(polyline, dtype=np.float64)
    if len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
        pts = pts[:-1]
    keep = np.any(pts != np.roll(pts, 1, axis=0), axis=1)
    pts = pts[keep]
    if len(pts) < 3:
        raise DegenerateContour("closed polyline needs >= 3 distinct vertices")

    turns = _ring_turn_angles_raw(pts)
    corners = [i for i in range(len(pts)) if turns[i] >= corner_angle_deg]
    if not corners:
        corners = [int(np.argmax(turns))]

    segments: list[PathSegment] = [MoveTo(*pts[corners[0]])]
    n = len(pts)
    for ci in range(len(corners)):
        a = corners[ci]
        b = corners[(ci + 1) % len(corners)]
        if b > a:
            run = pts[a:b + 1]
        else:
            run = np.vstack([pts[a:], pts[:b + 1]])
        if len(run) == 2:
            segments.append(LineTo(*run[1]))
            continue
        t1 = _normalize(run[1] - run[0])
        t2 = _normalize(run[-2] - run[-1])
        for bez in _fit_cubic(run, t1, t2, FIT_MAX_ERROR_PX):
            segments.append(CubicTo(bez[1][0], bez[1][1], bez[2][0], bez[2][1],
                                    bez[3][0], bez[3][1]))
    segments.append(Close())
    return enforce_max_segment(segments, max_segment_px)


def _segment_max_chord(prev: tuple[float, float], seg: PathSegment,
                       flatten_tol: float) -> float:
    if isinstance(seg, LineTo):
        return math.hypot(seg.x - prev[0], seg.y - prev[1])
    assert isinstance(seg, CubicTo)
    chain = [prev] + flatten_cubic(prev, (seg.c1x, seg.c1y), (seg.c2x, seg.c2y),
                                   (seg.x, seg.y), flatten_tol)
    return max(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(chain, chain[1:]))


def _split_segment(prev: tuple[float, float], seg: PathSegment) -> list[PathSegment]:
    if isinstance(seg, LineTo):
        mx, my = (prev[0] + seg.x) / 2.0, (prev[1] + seg.y) / 2.0
        return [LineTo(mx, my), LineTo(seg.x, seg.y)]
    assert isinstance(seg, CubicTo)
    from .core import _split_cubic

    left, right = _split_cubic(prev, (seg.c1x, seg.c1y), (seg.c2x, seg.c2y), (seg.x, seg.y))
    return [CubicTo(left[1][0], left[1][1], left[2][0], left[2][1], left[3][0], left[3][1]),
            CubicTo(right[1][0], right[1][1], right[2][0], right[2][1], right[3][0], right[3][1])]


def enforce_max_segment(segments: Sequence[PathSegment], max_segment_px: float,
                        flatten_tol: float = 0.25) -> list[PathSegment]:
    """Subdivide drawing segments until no flattened chord exceeds the cap."""
    out: list[PathSegment] = []
    cur = (0.0, 0.0)
    start = (0.0, 0.0)
    for seg in segments:
        if isinstance(seg, MoveTo):
            out.append(seg)
            cur = start = (seg.x, seg.y)
        elif isinstance(seg, Close):
            out.append(seg)
            cur = start
        else:
            queue = [seg]
            while queue:
                s = queue.pop(0)
                if _segment_max_chord(cur, s, flatten_tol) > max_segment_px:
                    queue = _split_segment(cur, s) + queue
                else:
                    out.append(s)
                    cur = (s.x, s.y)
    return out


# --- full pipeline ---------------------------------------------------------------

def _contour_tree_to_path(outer: Contour, holes: Sequence[Contour], fill: Color,
                          cfg: VectorizeConfig, simplify_tolerance: float) -> Path:
    segments: list[PathSegment] = []
    for ring in [outer, *holes]:
        simplified = simplify_polygon(ring.points, simplify_tolerance, cfg.corner_angle_deg)
        segments.extend(fit_curves(simplified, cfg.corner_angle_deg, cfg.max_segment_px))
    return Path(tuple(segments), fill=fill, fill_rule="evenodd")


def _mask_to_paths(mask: np.ndarray, fill: Color, cfg: VectorizeConfig,
                   simplify_tolerance: float) -> list[Path]:
    contours = trace_contours(mask, cfg.min_patch_px, color=fill)
    return [
        _contour_tree_to_path(outer, holes, fill, cfg, simplify_tolerance)
        for outer, holes in group_contour_trees(contours)
    ]


def vectorize(img: RasterImage, cfg: VectorizeConfig = MASK_MODE_CONFIG,
              simplify_tolerance: float = 1.0) -> SvgDocument:
    """Convert a raster to the constrained SVG dialect.

    Binary mode emits black paths over an explicit white background rect;
    color mode emits one layer of paths per quantized color (largest layer
    painted first).
    """
    w, h = img.width, img.height
    elements: list = []
    if cfg.mode == "binary":
        mask = binarize(img, cfg.binarize_threshold, cfg.invert)
        elements.append(Rect(0, 0, w, h, fill=WHITE))
        paths = _mask_to_paths(mask, BLACK, cfg, simplify_tolerance)
        if not paths:
            raise EmptyForeground("no foreground patch above min_patch_px")
        elements.extend(paths)
    else:
        layers = quantize_colors(img, cfg.color_precision_bits, cfg.layer_color_difference)
        any_paths = False
        for color, mask in layers:
            paths = _mask_to_paths(mask, color, cfg, simplify_tolerance)
            any_paths = any_paths or bool(paths)
            elements.extend(paths)
        if not any_paths:
            raise EmptyForeground("no layer produced a traceable patch")
    return document(w, h, elements)


def masks_to_svg(masks: LabeledMaskSet, top_k: int = 20,
                 cfg: VectorizeConfig = MASK_MODE_CONFIG,
                 simplify_tolerance: float = 1.0) -> SvgDocument:
    """Largest `top_k` masks become colored paths, largest painted first."""
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if not masks.entries:
        raise EmptyMaskSet("no masks to convert")
    kept = masks.entries[:top_k]
    h, w = kept[0].mask.shape
    elements = []
    for entry in kept:
        elements.extend(_mask_to_paths(entry.mask, entry.mean_color, cfg, simplify_tolerance))
    return document(w, h, elements)


def load_mask_set(source: Union[str, FsPath], image: Union[str, FsPath, RasterImage]) -> LabeledMaskSet:
    """Build a LabeledMaskSet from a label-map PNG or a mask directory.

    A directory must contain an `index.json` of the form
    `{"masks": [{"file": ..., "label": ...}, ...]}` with one binary-mask
    image per entry.  Mean colors are computed from `image`.
    """
    if not isinstance(image, RasterImage):
        image = read_raster(image)
    source = FsPath(source)
    masks: list[np.ndarray] = []
    if source.is_dir():
        index_path = source / "index.json"
        index = json.loads(index_path.read_text())
        for item in index["masks"]:
            m = read_raster(source / item["file"])
            masks.append(to_gray(m) > 127.5)
    else:
        label_img = read_raster(source)
        labels = to_gray(label_img).astype(np.int64)
        for value in np.unique(labels):
            masks.append(labels == value)

    entries = []
    for mask in masks:
        if mask.shape != (image.height, image.width):
            raise ShapeMismatch(
                f"mask {mask.shape} vs image {(image.height, image.width)}")
        area = int(mask.sum())
        if area == 0:
            continue
        mean = image.pixels[mask].mean(axis=0)
        entries.append(MaskEntry(mask=mask, area=area,
                                 mean_color=Color(*(int(round(v)) for v in mean))))
    entries.sort(key=lambda e: -e.area)
    return LabeledMaskSet(entries=tuple(entries))
