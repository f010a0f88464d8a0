"""Deterministic SVG rendering and raster I/O.

Rendering is pixel-center sampled with no anti-aliasing so that metric runs
are bit-reproducible across machines.  PNG is the interchange format; PPM/PGM
are accepted as a dependency-free fallback.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Union

import numpy as np

from . import kernels
from .core import (
    Color,
    SvgDocument,
    SvgElement,
    WHITE,
    element_to_path_segments,
    segments_to_polylines,
)
from .errors import UnsupportedFormat

DEFAULT_FLATTEN_TOLERANCE = 0.25


@dataclass(frozen=True)
class RasterImage:
    """Row-major RGB pixel grid; wraps a read-only (h, w, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) array, got {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def get(self, x: int, y: int) -> Color:
        r, g, b = self.pixels[y, x]
        return Color(int(r), int(g), int(b))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels))

    def __hash__(self) -> int:
        return hash((self.pixels.shape, self.pixels.tobytes()))

    @classmethod
    def filled(cls, width: int, height: int, color: Color = WHITE) -> "RasterImage":
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:, :] = color.as_tuple()
        return cls(arr)

    @classmethod
    def from_gray(cls, gray: np.ndarray) -> "RasterImage":
        g = np.asarray(gray, dtype=np.uint8)
        return cls(np.repeat(g[:, :, None], 3, axis=2))


@dataclass(frozen=True)
class FlattenedPolygonSet:
    """Closed polylines plus the fill they will be painted with."""

    polylines: tuple[tuple[tuple[float, float], ...], ...]
    fill: Color
    fill_rule: str


def flatten(element: SvgElement, tolerance: float = DEFAULT_FLATTEN_TOLERANCE) -> FlattenedPolygonSet:
    """Flatten an element to closed polylines (cubics subdivided adaptively)."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    segs = element_to_path_segments(element)
    polylines = segments_to_polylines(segs, tolerance)
    return FlattenedPolygonSet(
        polylines=tuple(tuple(poly) for poly in polylines),
        fill=element.fill,
        fill_rule=element.fill_rule,
    )


def _element_mask(element: SvgElement, doc: SvgDocument,
                  out_width: int, out_height: int, tolerance: float) -> np.ndarray:
    min_x, min_y, vb_w, vb_h = doc.view_box
    sx = out_width / vb_w
    sy = out_height / vb_h
    flat = flatten(element, tolerance)
    xs_parts, ys_parts, starts = [], [], [0]
    for poly in flat.polylines:
        xs_parts.extend((p[0] - min_x) * sx for p in poly)
        ys_parts.extend((p[1] - min_y) * sy for p in poly)
        starts.append(len(xs_parts))
    if not xs_parts:
        return np.zeros((out_height, out_width), dtype=bool)
    return kernels.fill_mask(
        np.asarray(xs_parts, dtype=np.float64),
        np.asarray(ys_parts, dtype=np.float64),
        np.asarray(starts, dtype=np.int64),
        out_width, out_height,
        flat.fill_rule == "evenodd",
    )


def rasterize(doc: SvgDocument, out_width: int, out_height: int,
              background: Color = WHITE,
              tolerance: float = DEFAULT_FLATTEN_TOLERANCE) -> RasterImage:
    """Paint elements in document order onto the pixel grid.

    A pixel belongs to an element iff its center satisfies the fill rule;
    the viewBox is mapped affinely onto the full output grid.
    """
    if out_width <= 0 or out_height <= 0:
        raise ValueError("output size must be positive")
    arr = np.empty((out_height, out_width, 3), dtype=np.uint8)
    arr[:, :] = background.as_tuple()
    for el in doc.elements:
        mask = _element_mask(el, doc, out_width, out_height, tolerance)
        arr[mask] = el.fill.as_tuple()
    return RasterImage(arr)


# --- file I/O -----------------------------------------------------------------

def write_raster(img: RasterImage, path: Union[str, FsPath]) -> None:
    """Write PNG (default) or PPM/PGM depending on the file suffix."""
    path = FsPath(path)
    suffix = path.suffix.lower()
    if suffix in (".ppm", ".pgm"):
        _write_netpbm(img, path, gray=suffix == ".pgm")
        return
    from PIL import Image

    Image.fromarray(img.pixels, mode="RGB").save(path, format="PNG")


def read_raster(path: Union[str, FsPath]) -> RasterImage:
    """Read PNG/PPM/PGM into RGB; alpha is composited over white."""
    path = FsPath(path)
    data = path.read_bytes()
    if data[:2] in (b"P5", b"P6"):
        return _read_netpbm(data)
    from PIL import Image

    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            if im.mode == "RGBA":
                base = Image.new("RGBA", im.size, (255, 255, 255, 255))
                base.alpha_composite(im)
                im = base.convert("RGB")
            elif im.mode != "RGB":
                im = im.convert("RGB")
            return RasterImage(np.asarray(im, dtype=np.uint8))
    except Exception as exc:
        raise UnsupportedFormat(f"{path}: {exc}") from exc


def _write_netpbm(img: RasterImage, path: FsPath, gray: bool) -> None:
    if gray:
        arr = img.pixels
        if not (np.array_equal(arr[:, :, 0], arr[:, :, 1])
                and np.array_equal(arr[:, :, 1], arr[:, :, 2])):
            raise UnsupportedFormat("PGM requires a grayscale image")
        header = f"P5\n{img.width} {img.height}\n255\n".encode()
        path.write_bytes(header + arr[:, :, 0].tobytes())
    else:
        header = f"P6\n{img.width} {img.height}\n255\n".encode()
        path.write_bytes(header + img.pixels.tobytes())


def _read_netpbm(data: bytes) -> RasterImage:
    try:
        magic = data[:2]
        fields: list[int] = []
        pos = 2
        while len(fields) < 3:
            while pos < len(data) and data[pos:pos + 1].isspace():
                pos += 1
            if data[pos:pos + 1] == b"#":
                while pos < len(data) and data[pos:pos + 1] != b"\n":
                    pos += 1
                continue
            start = pos
            while pos < len(data) and not data[pos:pos + 1].isspace():
                pos += 1
            fields.append(int(data[start:pos]))
        pos += 1  # single whitespace after maxval
        width, height, maxval = fields
        if maxval != 255:
            raise UnsupportedFormat(f"unsupported netpbm maxval {maxval}")
        channels = 3 if magic == b"P6" else 1
        need = width * height * channels
        payload = data[pos:pos + need]
        if len(payload) != need:
            raise UnsupportedFormat("truncated netpbm payload")
        arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
        if channels == 1:
            return RasterImage.from_gray(arr[:, :, 0])
        return RasterImage(arr)
    except UnsupportedFormat:
        raise
    except Exception as exc:
        raise UnsupportedFormat(f"bad netpbm data: {exc}") from exc


def to_gray(img: RasterImage) -> np.ndarray:
    """Float grayscale; exact channel value when already gray, else Rec.601 luma."""
    arr = img.pixels.astype(np.float64)
    if (np.array_equal(img.pixels[:, :, 0], img.pixels[:, :, 1])
            and np.array_equal(img.pixels[:, :, 1], img.pixels[:, :, 2])):
        return arr[:, :, 0]
    return 0.299 * arr[:, :, 0] + 0.587 * arr[:, :, 1] + 0.114 * arr[:, :, 2]
