"""svglab: raster images as LLM-legible SVG.

Raster-to-SVG tracing, deterministic SVG rasterization, prompt construction,
color-aware mIOU evaluation, dataset generators, a chat-endpoint client, and
an HTTP server backing the interactive editing playground.
"""

from .core import (
    BLACK,
    WHITE,
    Circle,
    Close,
    Color,
    CubicTo,
    LineTo,
    MoveTo,
    Path,
    Polygon,
    Rect,
    SvgDocument,
    bounding_box,
    document,
    edit_elements,
    select_elements,
    serialize_svg,
    with_ids,
)
from .parser import parse_svg, parse_svg_with_warnings

__version__ = "0.1.0"

__all__ = [
    "BLACK",
    "WHITE",
    "Circle",
    "Close",
    "Color",
    "CubicTo",
    "LineTo",
    "MoveTo",
    "Path",
    "Polygon",
    "Rect",
    "SvgDocument",
    "bounding_box",
    "document",
    "edit_elements",
    "parse_svg",
    "parse_svg_with_warnings",
    "select_elements",
    "serialize_svg",
    "with_ids",
    "__version__",
]
