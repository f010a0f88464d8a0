"""Document model for the constrained SVG dialect.

Supported content: absolute M/L/C/Z paths, polygons, rects, circles, opaque
fills, fill-rule, ids, and a viewBox.  Documents are immutable values; every
operation returns a new document.  Canonical serialization (fixed attribute
order, 3-decimal coordinates, uppercase hex colors, one element per line) is
the bit-exact interchange format between every other module.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence, Union

from .errors import EmptyDocument, InvalidGeometry, UnknownId

SVG_NS = "http://www.w3.org/2000/svg"

# Closed named-color table; green is the CSS keyword value, not pure green.
NAMED_COLORS = {
    "black": (0, 0, 0),
    "white": (255, 255, 255),
    "red": (255, 0, 0),
    "green": (0, 128, 0),
    "blue": (0, 0, 255),
    "yellow": (255, 255, 0),
    "cyan": (0, 255, 255),
    "magenta": (255, 0, 255),
    "gray": (128, 128, 128),
}

_RGB_FUNC_RE = re.compile(r"rgb\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)$")


@dataclass(frozen=True, order=True)
class Color:
    r: int
    g: int
    b: int

    def __post_init__(self) -> None:
        for v in (self.r, self.g, self.b):
            if not isinstance(v, int) or not 0 <= v <= 255:
                raise InvalidGeometry(f"color channel out of range: {v!r}")

    @classmethod
    def parse(cls, text: str) -> "Color":
        """Parse a named color, #RGB, #RRGGBB, or rgb(r,g,b)."""
        t = text.strip().lower()
        if t in NAMED_COLORS:
            return cls(*NAMED_COLORS[t])
        if t.startswith("#"):
            hexpart = t[1:]
            if len(hexpart) == 3:
                hexpart = "".join(c * 2 for c in hexpart)
            if len(hexpart) == 6 and all(c in "0123456789abcdef" for c in hexpart):
                return cls(int(hexpart[0:2], 16), int(hexpart[2:4], 16), int(hexpart[4:6], 16))
            raise ValueError(f"bad hex color: {text!r}")
        m = _RGB_FUNC_RE.match(t)
        if m:
            return cls(int(m.group(1)), int(m.group(2)), int(m.group(3)))
        raise ValueError(f"unsupported color: {text!r}")

    def to_hex(self) -> str:
        return f"#{self.r:02X}{self.g:02X}{self.b:02X}"

    def distance(self, other: "Color") -> float:
        return math.sqrt((self.r - other.r) ** 2 + (self.g - other.g) ** 2 + (self.b - other.b) ** 2)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)


BLACK = Color(0, 0, 0)
WHITE = Color(255, 255, 255)


# --- path segments ----------------------------------------------------------

@dataclass(frozen=True)
class MoveTo:
    x: float
    y: float


@dataclass(frozen=True)
class LineTo:
    x: float
    y: float


@dataclass(frozen=True)
class CubicTo:
    c1x: float
    c1y: float
    c2x: float
    c2y: float
    x: float
    y: float


@dataclass(frozen=True)
class Close:
    pass


PathSegment = Union[MoveTo, LineTo, CubicTo, Close]


def validate_segments(segments: Sequence[PathSegment]) -> None:
    """Every subpath starts with MoveTo; Close only follows a drawing segment."""
    prev: Optional[PathSegment] = None
    for seg in segments:
        if isinstance(seg, MoveTo):
            pass
        elif prev is None or isinstance(prev, Close):
            raise InvalidGeometry("subpath must begin with MoveTo")
        elif isinstance(seg, Close) and isinstance(prev, MoveTo):
            raise InvalidGeometry("Close may only follow a drawing segment")
        prev = seg


# --- elements ---------------------------------------------------------------

@dataclass(frozen=True)
class Path:
    segments: tuple[PathSegment, ...]
    fill: Color = BLACK
    fill_rule: str = "nonzero"
    id: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        validate_segments(self.segments)
        _check_fill_rule(self.fill_rule)


@dataclass(frozen=True)
class Polygon:
    points: tuple[tuple[float, float], ...]
    fill: Color = BLACK
    fill_rule: str = "nonzero"
    id: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple((float(x), float(y)) for x, y in self.points))
        if len(self.points) < 3:
            raise InvalidGeometry(f"polygon needs >= 3 points, got {len(self.points)}")
        _check_fill_rule(self.fill_rule)


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    width: float
    height: float
    fill: Color = BLACK
    fill_rule: str = "nonzero"
    id: Optional[str] = None

    def __post_init__(self) -> None:
        if not (self.width > 0 and self.height > 0):
            raise InvalidGeometry(f"rect needs positive size, got {self.width}x{self.height}")
        _check_fill_rule(self.fill_rule)


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float
    fill: Color = BLACK
    fill_rule: str = "nonzero"
    id: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise InvalidGeometry(f"circle needs positive radius, got {self.r}")
        _check_fill_rule(self.fill_rule)


SvgElement = Union[Path, Polygon, Rect, Circle]

VARIANT_NAMES = {Path: "path", Polygon: "polygon", Rect: "rect", Circle: "circle"}


def _check_fill_rule(rule: str) -> None:
    if rule not in ("nonzero", "evenodd"):
        raise InvalidGeometry(f"fill rule must be nonzero or evenodd, got {rule!r}")


def variant_name(element: SvgElement) -> str:
    return VARIANT_NAMES[type(element)]


# --- document ---------------------------------------------------------------

@dataclass(frozen=True)
class SvgDocument:
    width: float
    height: float
    view_box: tuple[float, float, float, float]
    elements: tuple[SvgElement, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "view_box", tuple(float(v) for v in self.view_box))
        if not (self.width > 0 and self.height > 0):
            raise InvalidGeometry("document size must be positive")
        if self.view_box[2] <= 0 or self.view_box[3] <= 0:
            raise InvalidGeometry("viewBox must have positive extent")
        seen: set[str] = set()
        for el in self.elements:
            if el.id is not None:
                if el.id in seen:
                    raise InvalidGeometry(f"duplicate element id {el.id!r}")
                seen.add(el.id)

    def element_by_id(self, element_id: str) -> SvgElement:
        for el in self.elements:
            if el.id == element_id:
                return el
        raise UnknownId(element_id)

    def ids(self) -> list[str]:
        return [el.id for el in self.elements if el.id is not None]


def document(width: float, height: float, elements: Iterable[SvgElement] = (),
             view_box: Optional[tuple[float, float, float, float]] = None) -> SvgDocument:
    """Convenience constructor; viewBox defaults to (0, 0, width, height)."""
    vb = view_box if view_box is not None else (0.0, 0.0, float(width), float(height))
    return SvgDocument(width=float(width), height=float(height), view_box=vb,
                       elements=tuple(elements))


def with_ids(doc: SvgDocument, prefix: str = "e") -> SvgDocument:
    """Assign ids to elements that lack one (existing ids are preserved)."""
    taken = set(doc.ids())
    out = []
    counter = 0
    for el in doc.elements:
        if el.id is None:
            while f"{prefix}{counter}" in taken:
                counter += 1
            new_id = f"{prefix}{counter}"
            taken.add(new_id)
            el = replace(el, id=new_id)
        out.append(el)
    return replace(doc, elements=tuple(out))


# --- canonical serialization ------------------------------------------------

def fmt_num(value: float) -> str:
    """Render a coordinate rounded to 3 decimals, trailing zeros stripped."""
    if not math.isfinite(value):
        raise InvalidGeometry(f"non-finite coordinate {value!r}")
    text = f"{value:.3f}".rstrip("0").rstrip(".")
    if text in ("-0", ""):
        return "0"
    return text


def _segment_text(seg: PathSegment) -> str:
    if isinstance(seg, MoveTo):
        return f"M{fmt_num(seg.x)} {fmt_num(seg.y)}"
    if isinstance(seg, LineTo):
        return f"L{fmt_num(seg.x)} {fmt_num(seg.y)}"
    if isinstance(seg, CubicTo):
        coords = (seg.c1x, seg.c1y, seg.c2x, seg.c2y, seg.x, seg.y)
        return "C" + " ".join(fmt_num(c) for c in coords)
    return "Z"


def _common_attrs(el: SvgElement) -> str:
    parts = [f' fill="{el.fill.to_hex()}"']
    if el.fill_rule == "evenodd":
        parts.append(' fill-rule="evenodd"')
    return "".join(parts)


def _element_line(el: SvgElement) -> str:
    ident = f' id="{el.id}"' if el.id is not None else ""
    if isinstance(el, Path):
        d = " ".join(_segment_text(s) for s in el.segments)
        return f'<path{ident} d="{d}"{_common_attrs(el)}/>'
    if isinstance(el, Polygon):
        pts = " ".join(f"{fmt_num(x)},{fmt_num(y)}" for x, y in el.points)
        return f'<polygon{ident} points="{pts}"{_common_attrs(el)}/>'
    if isinstance(el, Rect):
        return (f'<rect{ident} x="{fmt_num(el.x)}" y="{fmt_num(el.y)}"'
                f' width="{fmt_num(el.width)}" height="{fmt_num(el.height)}"{_common_attrs(el)}/>')
    return (f'<circle{ident} cx="{fmt_num(el.cx)}" cy="{fmt_num(el.cy)}"'
            f' r="{fmt_num(el.r)}"{_common_attrs(el)}/>')


def serialize_svg(doc: SvgDocument) -> str:
    """Canonical text form; stable byte-for-byte for structurally equal docs."""
    vb = " ".join(fmt_num(v) for v in doc.view_box)
    lines = [f'<svg xmlns="{SVG_NS}" width="{fmt_num(doc.width)}"'
             f' height="{fmt_num(doc.height)}" viewBox="{vb}">']
    lines.extend(_element_line(el) for el in doc.elements)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def serialize_compact(doc: SvgDocument) -> str:
    """Single-line form used when embedding SVG inside prompts."""
    return serialize_svg(doc).replace("\n", "")


# --- selection --------------------------------------------------------------

def select_elements(doc: SvgDocument,
                    ids: Optional[Iterable[str]] = None,
                    fill: Optional[Color] = None,
                    variant: Optional[str] = None) -> list[str]:
    """Ids of elements matching every given criterion, in document order.

    Elements without an id never match (run `with_ids` first if needed).
    """
    wanted = set(ids) if ids is not None else None
    out = []
    for el in doc.elements:
        if el.id is None:
            continue
        if wanted is not None and el.id not in wanted:
            continue
        if fill is not None and el.fill != fill:
            continue
        if variant is not None and variant_name(el) != variant:
            continue
        out.append(el.id)
    return out


# --- editing ----------------------------------------------------------------

@dataclass(frozen=True)
class Remove:
    pass


@dataclass(frozen=True)
class Recolor:
    fill: Color


@dataclass(frozen=True)
class Scale:
    factor: float


@dataclass(frozen=True)
class Translate:
    dx: float
    dy: float


EditAction = Union[Remove, Recolor, Scale, Translate]


def element_center(el: SvgElement) -> tuple[float, float]:
    """Per-variant shape center used as the scaling origin."""
    if isinstance(el, Circle):
        return (el.cx, el.cy)
    if isinstance(el, Rect):
        return (el.x + el.width / 2.0, el.y + el.height / 2.0)
    if isinstance(el, Polygon):
        n = len(el.points)
        return (sum(p[0] for p in el.points) / n, sum(p[1] for p in el.points) / n)
    lo_x, lo_y, hi_x, hi_y = bounding_box(el)
    return ((lo_x + hi_x) / 2.0, (lo_y + hi_y) / 2.0)


def _map_path_points(el: Path, fn) -> Path:
    segs: list[PathSegment] = []
    for seg in el.segments:
        if isinstance(seg, MoveTo):
            segs.append(MoveTo(*fn(seg.x, seg.y)))
        elif isinstance(seg, LineTo):
            segs.append(LineTo(*fn(seg.x, seg.y)))
        elif isinstance(seg, CubicTo):
            c1 = fn(seg.c1x, seg.c1y)
            c2 = fn(seg.c2x, seg.c2y)
            p = fn(seg.x, seg.y)
            segs.append(CubicTo(c1[0], c1[1], c2[0], c2[1], p[0], p[1]))
        else:
            segs.append(seg)
    return replace(el, segments=tuple(segs))


def transform_element(el: SvgElement, fn) -> SvgElement:
    """Apply an affine point map; rect/circle stay closed under the maps we use."""
    if isinstance(el, Path):
        return _map_path_points(el, fn)
    if isinstance(el, Polygon):
        return replace(el, points=tuple(fn(x, y) for x, y in el.points))
    if isinstance(el, Rect):
        x0, y0 = fn(el.x, el.y)
        x1, y1 = fn(el.x + el.width, el.y + el.height)
        return replace(el, x=min(x0, x1), y=min(y0, y1),
                       width=abs(x1 - x0), height=abs(y1 - y0))
    # circle: uniform scale/translate only
    cx, cy = fn(el.cx, el.cy)
    ex, _ = fn(el.cx + el.r, el.cy)
    return replace(el, cx=cx, cy=cy, r=abs(ex - cx))


def _apply_action(el: SvgElement, action: EditAction) -> Optional[SvgElement]:
    if isinstance(action, Remove):
        return None
    if isinstance(action, Recolor):
        return replace(el, fill=action.fill)
    if isinstance(action, Translate):
        return transform_element(el, lambda x, y: (x + action.dx, y + action.dy))
    cx, cy = element_center(el)
    f = action.factor
    return transform_element(el, lambda x, y: (cx + (x - cx) * f, cy + (y - cy) * f))


def edit_elements(doc: SvgDocument, ids: Iterable[str], action: EditAction) -> SvgDocument:
    """Apply one action to the given elements; everything else is untouched."""
    targets = set(ids)
    known = set(doc.ids())
    missing = targets - known
    if missing:
        raise UnknownId(", ".join(sorted(missing)))
    out = []
    for el in doc.elements:
        if el.id in targets:
            edited = _apply_action(el, action)
            if edited is not None:
                out.append(edited)
        else:
            out.append(el)
    return replace(doc, elements=tuple(out))


# --- geometry ---------------------------------------------------------------

def _split_cubic(p0, c1, c2, p1):
    """de Casteljau split at t=0.5."""
    mid = lambda a, b: ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0)
    q0, q1, q2 = mid(p0, c1), mid(c1, c2), mid(c2, p1)
    r0, r1 = mid(q0, q1), mid(q1, q2)
    s = mid(r0, r1)
    return (p0, q0, r0, s), (s, r1, q2, p1)


# Control-net distance over-estimates the true curve deviation; the extra
# headroom keeps inscribed-polygon area error (which grows with chord
# sagitta, not vertex deviation) well inside the caller's tolerance.
_FLATNESS_SAFETY = 6.0


def _cubic_is_flat(p0, c1, c2, p1, tolerance: float) -> bool:
    """Accept the chord once both control points sit close enough to it."""
    limit = tolerance / _FLATNESS_SAFETY
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    seg_len = math.hypot(dx, dy)
    if seg_len < 1e-12:
        d1 = math.hypot(c1[0] - p0[0], c1[1] - p0[1])
        d2 = math.hypot(c2[0] - p0[0], c2[1] - p0[1])
        return max(d1, d2) <= limit
    d1 = abs(dx * (p0[1] - c1[1]) - dy * (p0[0] - c1[0])) / seg_len
    d2 = abs(dx * (p0[1] - c2[1]) - dy * (p0[0] - c2[0])) / seg_len
    return max(d1, d2) <= limit


def flatten_cubic(p0: tuple[float, float], c1, c2, p1, tolerance: float) -> list[tuple[float, float]]:
    """Polyline vertices of the cubic (excluding p0), adaptively subdivided."""
    if _cubic_is_flat(p0, c1, c2, p1, tolerance):
        return [p1]
    left, right = _split_cubic(p0, c1, c2, p1)
    pts = flatten_cubic(left[0], left[1], left[2], left[3], tolerance)
    pts.extend(flatten_cubic(right[0], right[1], right[2], right[3], tolerance))
    return pts


def cubic_point(p0, c1, c2, p1, t: float) -> tuple[float, float]:
    u = 1.0 - t
    b0, b1, b2, b3 = u * u * u, 3 * u * u * t, 3 * u * t * t, t * t * t
    return (b0 * p0[0] + b1 * c1[0] + b2 * c2[0] + b3 * p1[0],
            b0 * p0[1] + b1 * c1[1] + b2 * c2[1] + b3 * p1[1])


# Circle-from-cubics constant: 4/3 * tan(pi/8)
KAPPA = 0.5522847498307936


def circle_to_cubics(cx: float, cy: float, r: float) -> list[PathSegment]:
    """Four-arc cubic approximation of a circle, starting at (cx + r, cy)."""
    k = KAPPA * r
    return [
        MoveTo(cx + r, cy),
        CubicTo(cx + r, cy + k, cx + k, cy + r, cx, cy + r),
        CubicTo(cx - k, cy + r, cx - r, cy + k, cx - r, cy),
        CubicTo(cx - r, cy - k, cx - k, cy - r, cx, cy - r),
        CubicTo(cx + k, cy - r, cx + r, cy - k, cx + r, cy),
        Close(),
    ]


def element_to_path_segments(el: SvgElement) -> list[PathSegment]:
    """Segments describing the element outline (used by flatten and bbox)."""
    if isinstance(el, Path):
        return list(el.segments)
    if isinstance(el, Polygon):
        segs: list[PathSegment] = [MoveTo(*el.points[0])]
        segs.extend(LineTo(x, y) for x, y in el.points[1:])
        segs.append(Close())
        return segs
    if isinstance(el, Rect):
        x, y, w, h = el.x, el.y, el.width, el.height
        return [MoveTo(x, y), LineTo(x + w, y), LineTo(x + w, y + h), LineTo(x, y + h), Close()]
    return circle_to_cubics(el.cx, el.cy, el.r)


def segments_to_polylines(segments: Sequence[PathSegment], tolerance: float) -> list[list[tuple[float, float]]]:
    """Flatten segments into closed polylines (first vertex repeated last)."""
    polylines: list[list[tuple[float, float]]] = []
    current: list[tuple[float, float]] = []

    def finish():
        nonlocal current
        if len(current) >= 2:
            if current[0] != current[-1]:
                current.append(current[0])
            if len(current) >= 4:  # >= 3 distinct vertices
                polylines.append(current)
        current = []

    for seg in segments:
        if isinstance(seg, MoveTo):
            finish()
            current = [(seg.x, seg.y)]
        elif isinstance(seg, LineTo):
            current.append((seg.x, seg.y))
        elif isinstance(seg, CubicTo):
            p0 = current[-1]
            current.extend(flatten_cubic(p0, (seg.c1x, seg.c1y), (seg.c2x, seg.c2y),
                                         (seg.x, seg.y), tolerance))
        else:
            finish()
    finish()
    return polylines


def bounding_box(target: Union[SvgDocument, SvgElement],
                 bezier_tolerance: float = 0.1) -> tuple[float, float, float, float]:
    """Tight axis-aligned (min_x, min_y, max_x, max_y).

    Bezier extents come from the polyline flattened at `bezier_tolerance`.
    """
    if isinstance(target, SvgDocument):
        boxes = [bounding_box(el, bezier_tolerance) for el in target.elements]
        if not boxes:
            raise EmptyDocument("document has no elements")
        return (min(b[0] for b in boxes), min(b[1] for b in boxes),
                max(b[2] for b in boxes), max(b[3] for b in boxes))
    if isinstance(target, Rect):
        return (target.x, target.y, target.x + target.width, target.y + target.height)
    if isinstance(target, Circle):
        return (target.cx - target.r, target.cy - target.r,
                target.cx + target.r, target.cy + target.r)
    if isinstance(target, Polygon):
        xs = [p[0] for p in target.points]
        ys = [p[1] for p in target.points]
        return (min(xs), min(ys), max(xs), max(ys))
    polylines = segments_to_polylines(target.segments, bezier_tolerance)
    pts = [p for poly in polylines for p in poly]
    if not pts:
        # path of bare MoveTos still has positions
        pts = [(s.x, s.y) for s in target.segments if isinstance(s, MoveTo)]
    if not pts:
        raise EmptyDocument("path has no geometry")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return (min(xs), min(ys), max(xs), max(ys))
