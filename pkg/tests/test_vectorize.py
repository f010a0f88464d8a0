"""Tracing pipeline: binarize/quantize, contours, simplification, curve fit."""

import math

import numpy as np
import pytest

from svglab import Color
from svglab.core import Close, CubicTo, LineTo, MoveTo
from svglab.errors import (
    DegenerateContour,
    EmptyForeground,
    EmptyMaskSet,
    ShapeMismatch,
)
from svglab.raster import RasterImage, rasterize, write_raster
from svglab.vectorize import (
    LabeledMaskSet,
    MaskEntry,
    VectorizeConfig,
    binarize,
    enforce_max_segment,
    fit_curves,
    group_contour_trees,
    load_mask_set,
    masks_to_svg,
    quantize_colors,
    simplify_polygon,
    trace_contours,
    vectorize,
)

BLACK = Color(0, 0, 0)
WHITE = Color(255, 255, 255)


def gray_image(arr) -> RasterImage:
    return RasterImage.from_gray(np.asarray(arr, dtype=np.uint8))


# --- binarize -------------------------------------------------------------------

def test_binarize_threshold_half():
    img = gray_image([[127, 128]])
    mask = binarize(img, 127.5)
    assert mask.tolist() == [[False, True]]


def test_binarize_invert():
    img = gray_image([[127, 128]])
    mask = binarize(img, 127.5, invert=True)
    assert mask.tolist() == [[True, False]]


def test_binarize_all_zero():
    assert not binarize(gray_image(np.zeros((5, 5)))).any()


# --- quantize -------------------------------------------------------------------

def test_quantize_bits8_one_layer_per_color():
    arr = np.zeros((2, 2, 3), dtype=np.uint8)
    arr[0, 0] = (255, 0, 0)
    arr[0, 1] = (0, 255, 0)
    arr[1, 0] = (0, 0, 255)
    arr[1, 1] = (255, 0, 0)
    layers = quantize_colors(RasterImage(arr), bits=8)
    assert len(layers) == 3
    assert layers[0][0] == Color(255, 0, 0)  # largest first


def test_quantize_bits0_two_distant_colors():
    arr = np.zeros((2, 4, 3), dtype=np.uint8)
    arr[:, :2] = (255, 0, 0)
    arr[:, 2:] = (0, 0, 255)
    layers = quantize_colors(RasterImage(arr), bits=0, layer_color_difference=35)
    assert len(layers) == 2
    assert {c.as_tuple() for c, _ in layers} == {(255, 0, 0), (0, 0, 255)}


def test_quantize_bits0_merges_close_colors():
    arr = np.zeros((1, 4, 3), dtype=np.uint8)
    arr[0, :2] = (100, 0, 0)
    arr[0, 2:] = (120, 0, 0)  # distance 20 <= 35 -> one layer
    layers = quantize_colors(RasterImage(arr), bits=0, layer_color_difference=35)
    assert len(layers) == 1
    assert layers[0][0] == Color(110, 0, 0)  # weighted mean


def test_quantize_bits1_gray_ramp_splits_at_128():
    ramp = np.arange(256, dtype=np.uint8).reshape(16, 16)
    layers = quantize_colors(RasterImage.from_gray(ramp), bits=1)
    assert len(layers) == 2
    masks = {c.as_tuple(): m for c, m in layers}
    assert int(masks[(0, 0, 0)].sum()) == 128
    assert int(masks[(128, 128, 128)].sum()) == 128


def test_quantize_layers_partition_image():
    rng = np.random.default_rng(3)
    arr = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
    for bits in (0, 2, 8):
        layers = quantize_colors(RasterImage(arr), bits=bits)
        total = np.zeros((16, 16), dtype=int)
        for _, mask in layers:
            total += mask.astype(int)
        assert np.all(total == 1)


# --- contour tracing --------------------------------------------------------------

def boundary_unit_edges(mask):
    """Independent oracle: enumerate pixel-side cracks between fg and bg."""
    h, w = mask.shape
    edges = set()
    for y in range(h):
        for x in range(w):
            if not mask[y, x]:
                continue
            if y == 0 or not mask[y - 1, x]:
                edges.add(((x, y), (x + 1, y)))
            if y == h - 1 or not mask[y + 1, x]:
                edges.add(((x, y + 1), (x + 1, y + 1)))
            if x == 0 or not mask[y, x - 1]:
                edges.add(((x, y), (x, y + 1)))
            if x == w - 1 or not mask[y, x + 1]:
                edges.add(((x + 1, y), (x + 1, y + 1)))
    return edges


def contour_unit_edges(points):
    edges = set()
    n = len(points)
    for i in range(n):
        a = tuple(points[i])
        b = tuple(points[(i + 1) % n])
        edges.add((min(a, b), max(a, b)))
    return edges


def test_square_contour_vertex_count_and_edges():
    mask = np.zeros((12, 12), dtype=bool)
    mask[1:11, 1:11] = True
    contours = trace_contours(mask)
    assert len(contours) == 1
    pts = contours[0].points
    assert len(pts) == 40
    assert contour_unit_edges(pts) == boundary_unit_edges(mask)


def test_annulus_outer_and_hole():
    mask = np.zeros((14, 14), dtype=bool)
    mask[2:12, 2:12] = True
    mask[5:9, 5:9] = False
    contours = trace_contours(mask)
    kinds = [c.orientation for c in contours]
    assert kinds == ["outer", "hole"]
    assert contours[0].signed_area() > 0
    assert contours[1].signed_area() < 0
    trees = group_contour_trees(contours)
    assert len(trees) == 1 and len(trees[0][1]) == 1


def test_min_patch_discards_small_blob():
    mask = np.zeros((10, 10), dtype=bool)
    mask[2:5, 2:5] = True  # 9 px < 16
    assert trace_contours(mask, min_patch_px=16) == []
    assert len(trace_contours(mask, min_patch_px=9)) == 1


def test_diagonal_pixels_are_8_connected():
    mask = np.zeros((4, 4), dtype=bool)
    mask[1, 1] = mask[2, 2] = True
    contours = trace_contours(mask)
    assert len(contours) == 1  # one component, one pinched outer ring
    assert contours[0].orientation == "outer"


def test_contour_edges_match_oracle_on_random_blobs():
    rng = np.random.default_rng(5)
    for _ in range(20):
        mask = rng.random((16, 16)) > 0.6
        contours = trace_contours(mask)
        got = set()
        for c in contours:
            got |= contour_unit_edges(c.points)
        assert got == boundary_unit_edges(mask)


# --- simplify ----------------------------------------------------------------------

def square_ring_with_collinear(side=10.0, step=1.0):
    pts = []
    n = int(side / step)
    for i in range(n):
        pts.append((i * step, 0.0))
    for i in range(n):
        pts.append((side, i * step))
    for i in range(n):
        pts.append((side - i * step, side))
    for i in range(n):
        pts.append((0.0, side - i * step))
    return np.array(pts)


def test_simplify_square_to_four_vertices():
    out = simplify_polygon(square_ring_with_collinear(), tolerance_px=1.0)
    assert len(out) == 4
    assert set(map(tuple, out)) == {(0, 0), (10, 0), (10, 10), (0, 10)}


def test_simplify_tolerance_zero_unchanged():
    ring = square_ring_with_collinear()
    out = simplify_polygon(ring, tolerance_px=0.0)
    assert np.array_equal(out, ring)


def test_simplify_degenerate():
    with pytest.raises(DegenerateContour):
        simplify_polygon(np.array([(0.0, 0.0), (1.0, 1.0), (0.0, 0.0)]), 1.0)


def test_simplify_jittered_circle_deviation():
    rng = np.random.default_rng(0)
    n = 100
    theta = np.linspace(0, 2 * math.pi, n, endpoint=False)
    radii = 20 + rng.uniform(-0.4, 0.4, size=n)
    ring = np.stack([50 + radii * np.cos(theta), 50 + radii * np.sin(theta)], axis=1)
    out = simplify_polygon(ring, tolerance_px=1.0)
    assert len(out) < n
    # dense-sampling oracle: deviation of every kept vertex and every edge
    # midpoint from the true circle
    for a, b in zip(out, np.roll(out, -1, axis=0)):
        for p in (a, (a + b) / 2, b):
            dev = abs(math.hypot(p[0] - 50, p[1] - 50) - 20)
            assert dev <= 1.5


def test_simplify_staircase_condenses():
    # 45-degree staircase: unit steps should collapse to near-diagonal
    pts = [(0, 0)]
    for i in range(10):
        pts.append((i + 1, i))
        pts.append((i + 1, i + 1))
    pts.extend([(0, 11)])
    ring = np.array(pts, dtype=float)
    out = simplify_polygon(ring, tolerance_px=1.0)
    assert len(out) <= len(ring) // 2


# --- fit curves ----------------------------------------------------------------------

def test_fit_small_square_all_lines():
    ring = np.array([(0, 0), (8, 0), (8, 8), (0, 8)], dtype=float)
    segs = fit_curves(ring, corner_angle_deg=90, max_segment_px=10)
    kinds = [type(s).__name__ for s in segs]
    assert kinds == ["MoveTo", "LineTo", "LineTo", "LineTo", "LineTo", "Close"]
    assert not any(isinstance(s, CubicTo) for s in segs)


def test_fit_64gon_few_cubics_within_1px():
    n = 64
    theta = np.linspace(0, 2 * math.pi, n, endpoint=False)
    ring = np.stack([50 + 20 * np.cos(theta), 50 + 20 * np.sin(theta)], axis=1)
    segs = fit_curves(ring, corner_angle_deg=90, max_segment_px=1000)
    cubics = [s for s in segs if isinstance(s, CubicTo)]
    assert 1 <= len(cubics) <= 8
    # per-vertex distance oracle: every input vertex within 1px of the curve
    from svglab.core import cubic_point

    cur = None
    samples = []
    for s in segs:
        if isinstance(s, MoveTo):
            cur = (s.x, s.y)
            samples.append(cur)
        elif isinstance(s, CubicTo):
            for t in np.linspace(0, 1, 200):
                samples.append(cubic_point(cur, (s.c1x, s.c1y), (s.c2x, s.c2y), (s.x, s.y), t))
            cur = (s.x, s.y)
        elif isinstance(s, LineTo):
            for t in np.linspace(0, 1, 50):
                samples.append((cur[0] + t * (s.x - cur[0]), cur[1] + t * (s.y - cur[1])))
            cur = (s.x, s.y)
    samples = np.array(samples)
    for v in ring:
        d = np.min(np.sqrt(np.sum((samples - v) ** 2, axis=1)))
        assert d <= 1.0, d


def test_max_segment_enforced_on_output():
    ring = np.array([(0, 0), (50, 0), (50, 30), (0, 30)], dtype=float)
    segs = fit_curves(ring, corner_angle_deg=90, max_segment_px=10)
    from svglab.core import segments_to_polylines

    for poly in segments_to_polylines(segs, 0.25):
        for a, b in zip(poly, poly[1:]):
            assert math.hypot(b[0] - a[0], b[1] - a[1]) <= 10 + 1e-9


def test_enforce_max_segment_splits_long_line():
    segs = [MoveTo(0, 0), LineTo(35, 0), Close()]
    out = enforce_max_segment(segs, 10.0)
    lines = [s for s in out if isinstance(s, LineTo)]
    assert len(lines) == 4  # 35 -> 17.5 -> 8.75 each
    assert lines[-1] == LineTo(35, 0)


# --- vectorize end-to-end ---------------------------------------------------------------

def iou(mask_a, mask_b):
    inter = np.logical_and(mask_a, mask_b).sum()
    union = np.logical_or(mask_a, mask_b).sum()
    return inter / union if union else 1.0


def test_vectorize_blank_raises():
    with pytest.raises(EmptyForeground):
        vectorize(gray_image(np.zeros((28, 28))), VectorizeConfig(mode="binary"))


def test_vectorize_solid_square_roundtrip():
    img = gray_image(np.zeros((28, 28)))  # all black
    cfg = VectorizeConfig(mode="binary", invert=True, min_patch_px=16)
    doc = vectorize(img, cfg)
    paths = [e for e in doc.elements if type(e).__name__ == "Path"]
    assert len(paths) == 1
    back = rasterize(doc, 28, 28)
    fg = np.all(back.pixels == 0, axis=2)
    assert fg.sum() >= 0.95 * 28 * 28


def test_vectorize_blob_roundtrip_iou():
    # digit-ish blob: thick ring with a gap
    yy, xx = np.mgrid[0:28, 0:28]
    r = np.sqrt((xx - 14) ** 2 + (yy - 14) ** 2)
    mask = (r > 5) & (r < 11) & ~((xx > 14) & (np.abs(yy - 14) < 3))
    img = gray_image(np.where(mask, 255, 0))
    cfg = VectorizeConfig(mode="binary", min_patch_px=16)
    doc = vectorize(img, cfg)
    back = rasterize(doc, 28, 28)
    got = np.all(back.pixels == 0, axis=2)
    assert iou(got, mask) >= 0.85


def test_vectorize_color_mode_layers():
    arr = np.zeros((20, 20, 3), dtype=np.uint8)
    arr[:, :] = (255, 255, 255)
    arr[4:16, 4:10] = (255, 0, 0)
    arr[4:16, 10:16] = (0, 0, 255)
    cfg = VectorizeConfig(mode="color", color_precision_bits=0, min_patch_px=4)
    doc = vectorize(RasterImage(arr), cfg)
    fills = {e.fill.as_tuple() for e in doc.elements}
    assert (255, 0, 0) in fills and (0, 0, 255) in fills
    back = rasterize(doc, 20, 20)
    assert back.get(6, 10) == Color(255, 0, 0)
    assert back.get(12, 10) == Color(0, 0, 255)


def test_patch_law_no_tiny_components():
    # every traced patch is >= min_patch_px by construction; at raster level
    # (4x resolution) thin 8-connected necks can pinch off slivers, so the
    # enforceable form of the law is: sub-threshold fragments stay a
    # negligible fraction of the foreground
    from svglab.datasets import load_digit_corpus
    from svglab.kernels import label_components

    samples, _ = load_digit_corpus("test")
    cfg = VectorizeConfig(mode="binary", min_patch_px=16)
    for img, _ in samples[:20]:
        try:
            doc = vectorize(img, cfg)
        except EmptyForeground:
            continue
        back = rasterize(doc, 112, 112)
        fg = np.all(back.pixels == 0, axis=2)
        labels, n = label_components(fg, 8)
        areas = np.array([int((labels == i).sum()) / 16.0 for i in range(1, n + 1)])
        stray = areas[areas < 16 * 0.5].sum()
        assert stray <= 0.05 * areas.sum(), (stray, areas.tolist())


def test_segment_law_on_traced_digit():
    from svglab.core import segments_to_polylines

    yy, xx = np.mgrid[0:28, 0:28]
    r = np.sqrt((xx - 14) ** 2 + (yy - 14) ** 2)
    img = gray_image(np.where((r > 4) & (r < 11), 255, 0))
    cfg = VectorizeConfig(mode="binary", min_patch_px=16, max_segment_px=10)
    doc = vectorize(img, cfg)
    for el in doc.elements:
        if type(el).__name__ != "Path":
            continue
        for poly in segments_to_polylines(list(el.segments), 0.25):
            for a, b in zip(poly, poly[1:]):
                assert math.hypot(b[0] - a[0], b[1] - a[1]) <= 10 + 1e-9


def test_vectorize_round_trip_monotone_in_tolerance():
    yy, xx = np.mgrid[0:28, 0:28]
    r = np.sqrt((xx - 13.3) ** 2 + (yy - 14.2) ** 2)
    mask = (r > 4.2) & (r < 10.7)
    img = gray_image(np.where(mask, 255, 0))
    cfg = VectorizeConfig(mode="binary", min_patch_px=16)
    scores = []
    for tol in (0.5, 1.0, 2.0, 4.0):
        doc = vectorize(img, cfg, simplify_tolerance=tol)
        back = rasterize(doc, 28, 28)
        got = np.all(back.pixels == 0, axis=2)
        scores.append(iou(got, mask))
    assert all(a >= b - 0.02 for a, b in zip(scores, scores[1:])), scores


# --- masks ------------------------------------------------------------------------------

def rect_mask(h, w, y0, y1, x0, x1):
    m = np.zeros((h, w), dtype=bool)
    m[y0:y1, x0:x1] = True
    return m


def test_masks_to_svg_mean_colors_exact():
    img_arr = np.zeros((30, 30, 3), dtype=np.uint8)
    img_arr[0:10, 0:10] = (10, 20, 30)
    img_arr[12:20, 12:20] = (200, 100, 0)
    img_arr[22:28, 22:28] = (0, 0, 123)
    image = RasterImage(img_arr)
    entries = []
    for (y0, y1, x0, x1) in ((0, 10, 0, 10), (12, 20, 12, 20), (22, 28, 22, 28)):
        m = rect_mask(30, 30, y0, y1, x0, x1)
        mean = image.pixels[m].mean(axis=0)
        entries.append(MaskEntry(mask=m, area=int(m.sum()),
                                 mean_color=Color(*(int(round(v)) for v in mean))))
    entries.sort(key=lambda e: -e.area)
    doc = masks_to_svg(LabeledMaskSet(tuple(entries)), top_k=20,
                       cfg=VectorizeConfig(min_patch_px=16))
    assert len(doc.elements) == 3
    assert {e.fill.as_tuple() for e in doc.elements} == {(10, 20, 30), (200, 100, 0), (0, 0, 123)}


def test_masks_to_svg_top_k():
    entries = []
    for i in range(25):
        side = 25 - i  # strictly decreasing areas
        m = rect_mask(64, 64, 0, side, 0, side)
        entries.append(MaskEntry(mask=m, area=side * side, mean_color=Color(i, i, i)))
    doc = masks_to_svg(LabeledMaskSet(tuple(entries)), top_k=20,
                       cfg=VectorizeConfig(min_patch_px=1))
    assert len(doc.elements) == 20
    kept_fills = {e.fill.as_tuple() for e in doc.elements}
    assert (24, 24, 24) not in kept_fills  # smallest five dropped


def test_masks_to_svg_paint_order_nested():
    big = rect_mask(40, 40, 0, 40, 0, 40)
    small = rect_mask(40, 40, 10, 30, 10, 30)
    entries = (
        MaskEntry(mask=big, area=1600, mean_color=Color(0, 0, 255)),
        MaskEntry(mask=small, area=400, mean_color=Color(255, 0, 0)),
    )
    doc = masks_to_svg(LabeledMaskSet(entries), top_k=20)
    img = rasterize(doc, 40, 40)
    assert img.get(20, 20) == Color(255, 0, 0)
    assert img.get(2, 2) == Color(0, 0, 255)


def test_masks_to_svg_empty():
    with pytest.raises(EmptyMaskSet):
        masks_to_svg(LabeledMaskSet(()), top_k=20)


def test_load_mask_set_label_map(tmp_path):
    labels = np.zeros((20, 20), dtype=np.uint8)
    labels[0:20, 0:10] = 0
    labels[0:10, 10:20] = 1
    labels[10:20, 10:20] = 2
    img_arr = np.zeros((20, 20, 3), dtype=np.uint8)
    img_arr[labels == 0] = (250, 0, 0)
    img_arr[labels == 1] = (0, 250, 0)
    img_arr[labels == 2] = (0, 0, 250)
    write_raster(RasterImage.from_gray(labels), tmp_path / "labels.png")
    write_raster(RasterImage(img_arr), tmp_path / "image.png")
    ms = load_mask_set(tmp_path / "labels.png", tmp_path / "image.png")
    assert [e.area for e in ms.entries] == [200, 100, 100]
    assert ms.entries[0].mean_color == Color(250, 0, 0)


def test_load_mask_set_single_label(tmp_path):
    labels = np.zeros((8, 8), dtype=np.uint8)
    write_raster(RasterImage.from_gray(labels), tmp_path / "labels.png")
    write_raster(RasterImage.filled(8, 8, Color(9, 9, 9)), tmp_path / "img.png")
    ms = load_mask_set(tmp_path / "labels.png", tmp_path / "img.png")
    assert len(ms.entries) == 1
    assert ms.entries[0].area == 64


def test_load_mask_set_shape_mismatch(tmp_path):
    write_raster(RasterImage.from_gray(np.zeros((10, 10), dtype=np.uint8)),
                 tmp_path / "labels.png")
    write_raster(RasterImage.filled(5, 5), tmp_path / "img.png")
    with pytest.raises(ShapeMismatch):
        load_mask_set(tmp_path / "labels.png", tmp_path / "img.png")


def test_load_mask_set_directory(tmp_path):
    import json

    (tmp_path / "masks").mkdir()
    m1 = rect_mask(10, 10, 0, 5, 0, 10)
    m2 = rect_mask(10, 10, 5, 10, 0, 10)
    write_raster(RasterImage.from_gray((m1 * 255).astype(np.uint8)), tmp_path / "masks/m1.png")
    write_raster(RasterImage.from_gray((m2 * 255).astype(np.uint8)), tmp_path / "masks/m2.png")
    (tmp_path / "masks/index.json").write_text(json.dumps(
        {"masks": [{"file": "m1.png", "label": 1}, {"file": "m2.png", "label": 2}]}))
    write_raster(RasterImage.filled(10, 10, Color(50, 60, 70)), tmp_path / "img.png")
    ms = load_mask_set(tmp_path / "masks", tmp_path / "img.png")
    assert len(ms.entries) == 2
    assert all(e.mean_color == Color(50, 60, 70) for e in ms.entries)
