"""Parse XML text into the constrained SVG dialect.

Relative path commands and H/V/Q are normalized to absolute M/L/C while
parsing; translate/scale transforms are folded into coordinates; groups are
flattened.  Everything else is an error in strict mode and a dropped-with-
warning in lenient mode (the default, for ingesting wild icon files).
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Optional

from .core import (
    BLACK,
    Circle,
    Close,
    Color,
    CubicTo,
    LineTo,
    MoveTo,
    Path,
    PathSegment,
    Polygon,
    Rect,
    SvgDocument,
    SvgElement,
)
from .errors import InvalidGeometry, MalformedXml, UnsupportedFeature

_NUMBER_RE = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
_TRANSFORM_RE = re.compile(r"(\w+)\s*\(([^)]*)\)")

# Attributes that are legal on shape elements in the dialect.
_SHAPE_ATTRS = {
    "path": {"d", "fill", "fill-rule", "id", "transform"},
    "polygon": {"points", "fill", "fill-rule", "id", "transform"},
    "rect": {"x", "y", "width", "height", "fill", "fill-rule", "id", "transform"},
    "circle": {"cx", "cy", "r", "fill", "fill-rule", "id", "transform"},
}


@dataclass
class _Affine:
    """x' = a*x + c, y' = b*y + d  (axis-aligned scale + translate only)."""

    a: float = 1.0
    b: float = 1.0
    c: float = 0.0
    d: float = 0.0

    def apply(self, x: float, y: float) -> tuple[float, float]:
        return (self.a * x + self.c, self.b * y + self.d)

    def then(self, inner: "_Affine") -> "_Affine":
        """Composition self ∘ inner (inner applied first)."""
        return _Affine(self.a * inner.a, self.b * inner.b,
                       self.a * inner.c + self.c, self.b * inner.d + self.d)

    @property
    def uniform(self) -> bool:
        return abs(abs(self.a) - abs(self.b)) < 1e-12


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_length(text: str, what: str) -> float:
    t = text.strip()
    if t.endswith("px"):
        t = t[:-2]
    try:
        value = float(t)
    except ValueError:
        raise UnsupportedFeature(f"cannot parse {what} {text!r}") from None
    return value


def parse_transform(text: str) -> _Affine:
    """Fold a transform list of translate/scale into one affine map."""
    result = _Affine()
    matched_len = 0
    for m in _TRANSFORM_RE.finditer(text):
        matched_len += len(m.group(0))
        name = m.group(1)
        args = [float(v) for v in _NUMBER_RE.findall(m.group(2))]
        if name == "translate":
            tx = args[0] if args else 0.0
            ty = args[1] if len(args) > 1 else 0.0
            result = result.then(_Affine(1.0, 1.0, tx, ty))
        elif name == "scale":
            sx = args[0] if args else 1.0
            sy = args[1] if len(args) > 1 else sx
            if sx == 0 or sy == 0:
                raise UnsupportedFeature("scale(0) collapses geometry")
            result = result.then(_Affine(sx, sy, 0.0, 0.0))
        else:
            raise UnsupportedFeature(f"unsupported transform {name!r}")
    if text.strip() and matched_len == 0:
        raise UnsupportedFeature(f"cannot parse transform {text!r}")
    return result


def parse_path_data(d: str) -> list[PathSegment]:
    """Tokenize path data; normalize relative/H/V/Q commands to M/L/C."""
    segments: list[PathSegment] = []
    cur = (0.0, 0.0)
    start = (0.0, 0.0)
    command: Optional[str] = None
    tokens = _tokenize_path(d)
    i = 0

    def take(n: int) -> list[float]:
        nonlocal i
        if i + n > len(tokens) or any(isinstance(tokens[j], str) for j in range(i, i + n)):
            raise InvalidGeometry(f"path data ran out of coordinates near token {i}")
        vals = [float(tokens[j]) for j in range(i, i + n)]
        i += n
        return vals

    while i < len(tokens):
        tok = tokens[i]
        if isinstance(tok, str):
            command = tok
            i += 1
        elif command is None:
            raise InvalidGeometry("path data must start with a command")
        cmd = command
        rel = cmd.islower()
        base = cmd.upper()
        if base == "Z":
            segments.append(Close())
            cur = start
            command = None  # a command must follow Z before more coords
            continue
        if base == "M":
            x, y = take(2)
            if rel:
                x, y = cur[0] + x, cur[1] + y
            segments.append(MoveTo(x, y))
            cur = start = (x, y)
            command = "l" if rel else "L"  # implicit lineto after moveto
        elif base == "L":
            x, y = take(2)
            if rel:
                x, y = cur[0] + x, cur[1] + y
            segments.append(LineTo(x, y))
            cur = (x, y)
        elif base == "H":
            (x,) = take(1)
            if rel:
                x = cur[0] + x
            segments.append(LineTo(x, cur[1]))
            cur = (x, cur[1])
        elif base == "V":
            (y,) = take(1)
            if rel:
                y = cur[1] + y
            segments.append(LineTo(cur[0], y))
            cur = (cur[0], y)
        elif base == "C":
            c1x, c1y, c2x, c2y, x, y = take(6)
            if rel:
                c1x, c1y = cur[0] + c1x, cur[1] + c1y
                c2x, c2y = cur[0] + c2x, cur[1] + c2y
                x, y = cur[0] + x, cur[1] + y
            segments.append(CubicTo(c1x, c1y, c2x, c2y, x, y))
            cur = (x, y)
        elif base == "Q":
            qx, qy, x, y = take(4)
            if rel:
                qx, qy = cur[0] + qx, cur[1] + qy
                x, y = cur[0] + x, cur[1] + y
            # exact cubic equivalent of the quadratic
            c1 = (cur[0] + 2.0 / 3.0 * (qx - cur[0]), cur[1] + 2.0 / 3.0 * (qy - cur[1]))
            c2 = (x + 2.0 / 3.0 * (qx - x), y + 2.0 / 3.0 * (qy - y))
            segments.append(CubicTo(c1[0], c1[1], c2[0], c2[1], x, y))
            cur = (x, y)
        else:
            raise UnsupportedFeature(f"unsupported path command {cmd!r}")
    return segments


def _tokenize_path(d: str) -> list:
    tokens: list = []
    for m in re.finditer(r"[MmLlHhVvCcQqZzSsTtAa]|" + _NUMBER_RE.pattern, d):
        tokens.append(m.group(0) if m.group(0).isalpha() else float(m.group(0)))
    return tokens


class _Warnings:
    def __init__(self, strict: bool):
        self.strict = strict
        self.messages: list[str] = []

    def report(self, message: str) -> None:
        if self.strict:
            raise UnsupportedFeature(message)
        self.messages.append(message)


def _parse_fill(value: str, warns: _Warnings) -> Optional[Color]:
    try:
        return Color.parse(value)
    except ValueError:
        warns.report(f"unsupported fill {value!r}")
        return None


def _shape_from_node(node: ET.Element, tag: str, inherited_fill: Color,
                     inherited_rule: str, ctm: _Affine, warns: _Warnings) -> Optional[SvgElement]:
    attrs = dict(node.attrib)
    unknown = set(attrs) - _SHAPE_ATTRS[tag]
    for name in sorted(unknown):
        warns.report(f"unsupported attribute {name!r} on <{tag}>")
        attrs.pop(name)

    fill = inherited_fill
    if "fill" in attrs:
        parsed = _parse_fill(attrs["fill"], warns)
        if parsed is None:
            return None
        fill = parsed
    rule = attrs.get("fill-rule", inherited_rule)
    if rule not in ("nonzero", "evenodd"):
        warns.report(f"unsupported fill-rule {rule!r}")
        return None
    elem_id = attrs.get("id")
    if "transform" in attrs:
        try:
            ctm = ctm.then(parse_transform(attrs["transform"]))
        except UnsupportedFeature as exc:
            warns.report(str(exc))
            return None

    def pt(x: float, y: float) -> tuple[float, float]:
        return ctm.apply(x, y)

    try:
        if tag == "rect":
            x = float(attrs.get("x", "0"))
            y = float(attrs.get("y", "0"))
            w = float(attrs["width"])
            h = float(attrs["height"])
            x0, y0 = pt(x, y)
            x1, y1 = pt(x + w, y + h)
            return Rect(min(x0, x1), min(y0, y1), abs(x1 - x0), abs(y1 - y0),
                        fill=fill, fill_rule=rule, id=elem_id)
        if tag == "circle":
            cx = float(attrs.get("cx", "0"))
            cy = float(attrs.get("cy", "0"))
            r = float(attrs["r"])
            if not ctm.uniform:
                warns.report("non-uniform scale on <circle> is unsupported")
                return None
            ccx, ccy = pt(cx, cy)
            return Circle(ccx, ccy, r * abs(ctm.a), fill=fill, fill_rule=rule, id=elem_id)
        if tag == "polygon":
            nums = [float(v) for v in _NUMBER_RE.findall(attrs.get("points", ""))]
            if len(nums) % 2:
                raise InvalidGeometry("odd number of polygon coordinates")
            points = [pt(nums[j], nums[j + 1]) for j in range(0, len(nums), 2)]
            return Polygon(tuple(points), fill=fill, fill_rule=rule, id=elem_id)
        # path
        try:
            segments = parse_path_data(attrs.get("d", ""))
        except UnsupportedFeature as exc:
            warns.report(str(exc))
            return None
        if not segments:
            raise InvalidGeometry("empty path data")
        if not (ctm.a == 1.0 and ctm.b == 1.0 and ctm.c == 0.0 and ctm.d == 0.0):
            from .core import transform_element
            return transform_element(
                Path(tuple(segments), fill=fill, fill_rule=rule, id=elem_id), pt)
        return Path(tuple(segments), fill=fill, fill_rule=rule, id=elem_id)
    except KeyError as exc:
        raise InvalidGeometry(f"<{tag}> missing required attribute {exc}") from None


def _walk(node: ET.Element, inherited_fill: Color, inherited_rule: str,
          ctm: _Affine, warns: _Warnings, out: list[SvgElement]) -> None:
    for child in node:
        tag = _strip_ns(child.tag)
        if tag in _SHAPE_ATTRS:
            el = _shape_from_node(child, tag, inherited_fill, inherited_rule, ctm, warns)
            if el is not None:
                out.append(el)
        elif tag == "g":
            g_fill = inherited_fill
            g_rule = inherited_rule
            g_ctm = ctm
            ok = True
            for name, value in child.attrib.items():
                if name == "fill":
                    parsed = _parse_fill(value, warns)
                    if parsed is None:
                        ok = False
                        break
                    g_fill = parsed
                elif name == "fill-rule" and value in ("nonzero", "evenodd"):
                    g_rule = value
                elif name == "transform":
                    try:
                        g_ctm = ctm.then(parse_transform(value))
                    except UnsupportedFeature as exc:
                        warns.report(str(exc))
                        ok = False
                        break
                elif name == "id":
                    pass  # group ids are not kept; groups are flattened away
                else:
                    warns.report(f"unsupported attribute {name!r} on <g>")
                    if warns.strict:
                        ok = False
                        break
            if ok:
                _walk(child, g_fill, g_rule, g_ctm, warns, out)
        else:
            warns.report(f"unsupported element <{tag}>")


def parse_svg_with_warnings(text: str, strict: bool = False) -> tuple[SvgDocument, list[str]]:
    """Parse; returns (document, lenient-mode warnings)."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc
    if _strip_ns(root.tag) != "svg":
        raise MalformedXml(f"root element is <{_strip_ns(root.tag)}>, expected <svg>")

    warns = _Warnings(strict)
    width = height = None
    view_box = None
    for name, value in root.attrib.items():
        stripped = _strip_ns(name)
        if stripped == "width":
            width = _parse_length(value, "width")
        elif stripped == "height":
            height = _parse_length(value, "height")
        elif stripped == "viewBox":
            nums = [float(v) for v in _NUMBER_RE.findall(value)]
            if len(nums) != 4:
                raise MalformedXml(f"viewBox needs 4 numbers, got {value!r}")
            view_box = tuple(nums)
        elif stripped in ("xmlns", "version"):
            pass
        else:
            warns.report(f"unsupported attribute {name!r} on <svg>")

    if width is None and height is None and view_box is not None:
        width, height = view_box[2], view_box[3]
    if width is None or height is None:
        raise MalformedXml("<svg> needs width/height or a viewBox")
    if view_box is None:
        view_box = (0.0, 0.0, float(width), float(height))

    elements: list[SvgElement] = []
    _walk(root, BLACK, "nonzero", _Affine(), warns, elements)
    doc = SvgDocument(width=float(width), height=float(height),
                      view_box=view_box, elements=tuple(elements))
    return doc, warns.messages


def parse_svg(text: str, strict: bool = False) -> SvgDocument:
    """Parse XML text into an SvgDocument (lenient by default)."""
    doc, _ = parse_svg_with_warnings(text, strict=strict)
    return doc
