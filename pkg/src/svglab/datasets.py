"""Dataset construction: IDX digit corpora, Colored-MNIST variants, synthetic
transformation tasks with exact oracles, and bundled digit/letter glyphs.

Generation is a pure function of (seed, parameters); per-item generators are
seeded as (seed, index) so parallel and sequential runs produce identical
datasets.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path as FsPath
from typing import Optional, Sequence, Union

import numpy as np

from .core import (
    NAMED_COLORS,
    Circle,
    Color,
    Polygon,
    Rect,
    SvgDocument,
    SvgElement,
    document,
)
from .errors import BadMagic, LengthMismatch, UnknownGlyph, UnsupportedScene
from .parser import parse_svg
from .raster import RasterImage, to_gray
from .vectorize import VectorizeConfig, vectorize

# Conversion settings for 28x28 digit rasters (speckle filter small enough to
# keep thin strokes; corners split at 60 degrees for fidelity).
MNIST_CONFIG = VectorizeConfig(mode="binary", min_patch_px=4, corner_angle_deg=60.0)

IMAGES_MAGIC = 2051
LABELS_MAGIC = 2049

# Colored-MNIST variant B palette (order fixed: black, white, red, blue, green).
CMNIST_B_PALETTE = (
    Color(0, 0, 0),
    Color(255, 255, 255),
    Color(255, 0, 0),
    Color(0, 0, 255),
    Color(0, 255, 0),
)
CMNIST_B_PAIRS = tuple(
    (bg, fg) for bg in range(5) for fg in range(5) if fg != bg
)

PURE_RED = Color(255, 0, 0)
PURE_GREEN = Color(0, 255, 0)


# --- IDX ------------------------------------------------------------------------

def _read_idx_bytes(path: Union[str, FsPath]) -> bytes:
    path = FsPath(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as fh:
            return fh.read()
    return path.read_bytes()


def load_mnist(images_path: Union[str, FsPath],
               labels_path: Union[str, FsPath]) -> list[tuple[RasterImage, int]]:
    """Load an IDX image/label file pair (gzip transparently supported)."""
    img_data = _read_idx_bytes(images_path)
    lbl_data = _read_idx_bytes(labels_path)

    magic, n, rows, cols = struct.unpack(">IIII", img_data[:16])
    if magic != IMAGES_MAGIC:
        raise BadMagic(f"{images_path}: magic {magic}, expected {IMAGES_MAGIC}")
    if len(img_data) - 16 != n * rows * cols:
        raise LengthMismatch(
            f"{images_path}: payload {len(img_data) - 16} bytes, expected {n * rows * cols}")

    lmagic, ln = struct.unpack(">II", lbl_data[:8])
    if lmagic != LABELS_MAGIC:
        raise BadMagic(f"{labels_path}: magic {lmagic}, expected {LABELS_MAGIC}")
    if len(lbl_data) - 8 != ln:
        raise LengthMismatch(f"{labels_path}: payload {len(lbl_data) - 8} bytes, expected {ln}")
    if n != ln:
        raise LengthMismatch(f"{n} images vs {ln} labels")

    pixels = np.frombuffer(img_data, dtype=np.uint8, offset=16).reshape(n, rows, cols)
    labels = np.frombuffer(lbl_data, dtype=np.uint8, offset=8)
    return [(RasterImage.from_gray(pixels[i]), int(labels[i])) for i in range(n)]


def write_idx(images: np.ndarray, labels: Sequence[int],
              images_path: Union[str, FsPath], labels_path: Union[str, FsPath]) -> None:
    """Write (n, rows, cols) uint8 images + labels in IDX format (gz by suffix)."""
    n, rows, cols = images.shape
    img_blob = struct.pack(">IIII", IMAGES_MAGIC, n, rows, cols) + images.tobytes()
    lbl_blob = struct.pack(">II", LABELS_MAGIC, len(labels)) + bytes(int(v) for v in labels)
    for blob, path in ((img_blob, images_path), (lbl_blob, labels_path)):
        path = FsPath(path)
        if path.suffix == ".gz":
            with gzip.open(path, "wb", compresslevel=9) as fh:
                fh.write(blob)
        else:
            path.write_bytes(blob)


_SPLIT_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def locate_mnist(split: str, data_dir: Optional[Union[str, FsPath]] = None) -> Optional[tuple[FsPath, FsPath]]:
    """Find real MNIST IDX files under the data dir, if present."""
    import os

    candidates = []
    if data_dir is not None:
        candidates.append(FsPath(data_dir))
    env = os.environ.get("SVGLAB_DATA_DIR")
    if env:
        candidates.append(FsPath(env))
    candidates.extend([FsPath("data/mnist"), FsPath("data")])
    img_name, lbl_name = _SPLIT_FILES[split]
    for base in candidates:
        for suffix in ("", ".gz"):
            img = base / (img_name + suffix)
            lbl = base / (lbl_name + suffix)
            if img.exists() and lbl.exists():
                return img, lbl
    return None


def _bundled_idx(split: str) -> tuple[FsPath, FsPath]:
    img_name, lbl_name = _SPLIT_FILES[split]
    base = resources.files("svglab") / "data" / "digits"
    return FsPath(str(base / f"bundled-{img_name}.gz")), FsPath(str(base / f"bundled-{lbl_name}.gz"))


def load_digit_corpus(split: str = "test",
                      data_dir: Optional[Union[str, FsPath]] = None
                      ) -> tuple[list[tuple[RasterImage, int]], str]:
    """Digit rasters for a split: real MNIST when available, else the bundled
    handwritten-digit corpus (same IDX format).  Returns (samples, source)."""
    located = locate_mnist(split, data_dir)
    if located is not None:
        return load_mnist(*located), "mnist"
    return load_mnist(*_bundled_idx(split)), "bundled-digits"


def mini_mnist(samples: Sequence[tuple[RasterImage, int]],
               per_class: int = 10) -> list[tuple[RasterImage, int]]:
    """First `per_class` samples of each class, in class order (0..9)."""
    chosen: list[tuple[RasterImage, int]] = []
    for cls in range(10):
        found = [s for s in samples if s[1] == cls][:per_class]
        chosen.extend(found)
    return chosen


# --- Colored-MNIST -----------------------------------------------------------------

def colorize_mnist_a(img: RasterImage, rng: np.random.Generator) -> RasterImage:
    """Foreground turns pure red or pure green (one fair coin per image);
    background stays black."""
    fg = to_gray(img) > 127.5
    color = PURE_RED if rng.random() < 0.5 else PURE_GREEN
    out = np.zeros((img.height, img.width, 3), dtype=np.uint8)
    out[fg] = color.as_tuple()
    return RasterImage(out)


def colorize_mnist_b(img: RasterImage, rng: np.random.Generator) -> RasterImage:
    """Background/foreground drawn uniformly from the 20 ordered unequal pairs
    of {black, white, red, blue, green}."""
    fg = to_gray(img) > 127.5
    bg_idx, fg_idx = CMNIST_B_PAIRS[int(rng.integers(0, len(CMNIST_B_PAIRS)))]
    out = np.empty((img.height, img.width, 3), dtype=np.uint8)
    out[:, :] = CMNIST_B_PALETTE[bg_idx].as_tuple()
    out[fg] = CMNIST_B_PALETTE[fg_idx].as_tuple()
    return RasterImage(out)


# --- synthetic transformation tasks ---------------------------------------------------

SHAPE_KINDS = ("circle", "square", "triangle")
SIZE_SMALL = 12.0
SIZE_LARGE = 24.0
SCENE_SIZE = 100.0
CENTER_JITTER = 10.0

PALETTE = {
    name: Color(*NAMED_COLORS[name])
    for name in ("red", "green", "blue", "yellow", "cyan", "magenta")
}

TASK_KINDS = ("color", "shape", "size", "color_shape", "color_size", "shape_size")


@dataclass(frozen=True)
class ColorTo:
    target: Color


@dataclass(frozen=True)
class ShapeTo:
    target: str

    def __post_init__(self) -> None:
        if self.target not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.target!r}")


@dataclass(frozen=True)
class SizeScale:
    factor: float

    def __post_init__(self) -> None:
        if self.factor not in (0.5, 2.0):
            raise ValueError("factor must be 0.5 or 2.0")


TransformStep = Union[ColorTo, ShapeTo, SizeScale]


@dataclass(frozen=True)
class Transformation:
    steps: tuple[TransformStep, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.steps) <= 2:
            raise ValueError("a transformation has one or two steps")
        kinds = [type(s) for s in self.steps]
        if len(set(kinds)) != len(kinds):
            raise ValueError("combination must not repeat a variant kind")


@dataclass(frozen=True)
class TaskExample:
    example_pairs: tuple[tuple[SvgDocument, SvgDocument], ...]
    test_query: SvgDocument
    ground_truth_key: SvgDocument
    transformation: Transformation
    seed: int


def make_shape(kind: str, fill: Color, radius: float,
               center: tuple[float, float]) -> SvgElement:
    """Single scene shape; `radius` is the characteristic radius (circle r,
    half the square side, triangle circumradius)."""
    cx, cy = center
    if kind == "circle":
        return Circle(cx, cy, radius, fill=fill)
    if kind == "square":
        return Rect(cx - radius, cy - radius, 2 * radius, 2 * radius, fill=fill)
    if kind == "triangle":
        h = radius * np.sqrt(3) / 2
        return Polygon(((cx, cy - radius), (cx + h, cy + radius / 2),
                        (cx - h, cy + radius / 2)), fill=fill)
    raise ValueError(f"unknown shape kind {kind!r}")


def shape_params(el: SvgElement) -> tuple[str, tuple[float, float], float]:
    """Inverse of make_shape: (kind, center, characteristic radius)."""
    if isinstance(el, Circle):
        return "circle", (el.cx, el.cy), el.r
    if isinstance(el, Rect):
        return "square", (el.x + el.width / 2, el.y + el.height / 2), el.width / 2
    if isinstance(el, Polygon) and len(el.points) == 3:
        cx = sum(p[0] for p in el.points) / 3
        cy = sum(p[1] for p in el.points) / 3
        r = float(np.hypot(el.points[0][0] - cx, el.points[0][1] - cy))
        return "triangle", (cx, cy), r
    raise UnsupportedScene(f"not a synthetic scene shape: {type(el).__name__}")


def scene(kind: str, fill: Color, radius: float, center: tuple[float, float]) -> SvgDocument:
    return document(SCENE_SIZE, SCENE_SIZE, [make_shape(kind, fill, radius, center)])


def apply_transformation(doc: SvgDocument, t: Transformation) -> SvgDocument:
    """Exact oracle mapping a single-shape query scene to its key scene.

    Steps touch only what they change: a pure color step keeps the geometry
    bit-identical, a size step scales the existing element about its center.
    """
    from dataclasses import replace

    from .core import element_center, transform_element

    if len(doc.elements) != 1:
        raise UnsupportedScene(f"expected exactly one element, got {len(doc.elements)}")
    el = doc.elements[0]
    shape_params(el)  # validates the scene shape
    for step in t.steps:
        if isinstance(step, ColorTo):
            el = replace(el, fill=step.target)
        elif isinstance(step, ShapeTo):
            _, center, radius = shape_params(el)
            el = make_shape(step.target, el.fill, radius, center)
        else:
            cx, cy = element_center(el)
            f = step.factor
            el = transform_element(el, lambda x, y: (cx + (x - cx) * f, cy + (y - cy) * f))
    return document(doc.width, doc.height, [el], view_box=doc.view_box)


def _sample_transformation(kind: str, rng: np.random.Generator) -> Transformation:
    palette = list(PALETTE.values())
    steps: list[TransformStep] = []
    for part in kind.split("_"):
        if part == "color":
            steps.append(ColorTo(palette[int(rng.integers(0, len(palette)))]))
        elif part == "shape":
            steps.append(ShapeTo(SHAPE_KINDS[int(rng.integers(0, 3))]))
        elif part == "size":
            steps.append(SizeScale(float(rng.choice([0.5, 2.0]))))
        else:
            raise ValueError(f"unknown task kind {kind!r}")
    return Transformation(tuple(steps))


def _sample_query(t: Transformation, rng: np.random.Generator) -> SvgDocument:
    """Query scene sampled so every transformation step is non-degenerate."""
    palette = list(PALETTE.values())
    color_target = next((s.target for s in t.steps if isinstance(s, ColorTo)), None)
    shape_target = next((s.target for s in t.steps if isinstance(s, ShapeTo)), None)
    size_factor = next((s.factor for s in t.steps if isinstance(s, SizeScale)), None)

    colors = [c for c in palette if c != color_target]
    fill = colors[int(rng.integers(0, len(colors)))]
    kinds = [k for k in SHAPE_KINDS if k != shape_target]
    kind = kinds[int(rng.integers(0, len(kinds)))]
    if size_factor == 2.0:
        radius = SIZE_SMALL
    elif size_factor == 0.5:
        radius = SIZE_LARGE
    else:
        radius = float(rng.choice([SIZE_SMALL, SIZE_LARGE]))
    # jitter on a 0.1 grid so coordinates are exact at canonical precision
    jx = int(rng.integers(-CENTER_JITTER * 10, CENTER_JITTER * 10 + 1)) / 10.0
    jy = int(rng.integers(-CENTER_JITTER * 10, CENTER_JITTER * 10 + 1)) / 10.0
    center = (SCENE_SIZE / 2 + jx, SCENE_SIZE / 2 + jy)
    return scene(kind, fill, radius, center)


def generate_synthetic_task(kind: str, n_examples: int, n_context_pairs: int = 2,
                            seed: int = 0) -> list[TaskExample]:
    """Examples for one of the six tasks; per-example rng is (seed, index)."""
    if kind not in TASK_KINDS:
        raise ValueError(f"unknown task kind {kind!r}; expected one of {TASK_KINDS}")
    if n_examples < 1 or n_context_pairs < 1:
        raise ValueError("n_examples and n_context_pairs must be >= 1")
    out = []
    for index in range(n_examples):
        rng = np.random.default_rng((seed, index))
        t = _sample_transformation(kind, rng)
        pairs = []
        for _ in range(n_context_pairs):
            q = _sample_query(t, rng)
            pairs.append((q, apply_transformation(q, t)))
        test_query = _sample_query(t, rng)
        out.append(TaskExample(
            example_pairs=tuple(pairs),
            test_query=test_query,
            ground_truth_key=apply_transformation(test_query, t),
            transformation=t,
            seed=index,
        ))
    return out


# --- bundled glyphs ---------------------------------------------------------------

LETTER_SET = "ABCEHKLNPRSTXZ"


@lru_cache(maxsize=None)
def digit_svg(d: int) -> SvgDocument:
    """Bundled canonical digit glyph (traced handwritten prototype)."""
    if not isinstance(d, int) or not 0 <= d <= 9:
        raise UnknownGlyph(f"digit {d!r}")
    ref = resources.files("svglab") / "data" / "digits" / f"digit_{d}.svg"
    return parse_svg(ref.read_text(), strict=True)


@lru_cache(maxsize=None)
def letter_svg(c: str) -> SvgDocument:
    """Bundled block-letter glyph for the style task."""
    if not isinstance(c, str) or len(c) != 1 or c.upper() not in LETTER_SET:
        raise UnknownGlyph(f"letter {c!r}")
    ref = resources.files("svglab") / "data" / "letters" / f"letter_{c.upper()}.svg"
    return parse_svg(ref.read_text(), strict=True)


@dataclass(frozen=True)
class LabeledSvgSample:
    svg: SvgDocument
    label: int
    provenance: str
    seed: Optional[int] = None


def vectorize_digit(img: RasterImage) -> SvgDocument:
    """Digit raster -> SVG with the fixed digit-conversion settings."""
    return vectorize(img, MNIST_CONFIG)


def svg_corpus(samples: Sequence[tuple[RasterImage, int]],
               provenance: str) -> list[LabeledSvgSample]:
    return [LabeledSvgSample(svg=vectorize_digit(img), label=label,
                             provenance=f"{provenance}[{i}]")
            for i, (img, label) in enumerate(samples)]


# --- arithmetic (content extrapolation) --------------------------------------------

OPERATION_FAMILIES = ("add", "subtract", "multiply", "divide")

_MULTIPLY_FACTORS = tuple(
    Fraction(n, d) for n, d in
    ((2, 1), (3, 1), (4, 1), (1, 2), (1, 3), (1, 4), (3, 2), (2, 3))
)
_DIVIDE_FACTORS = tuple(Fraction(n, d) for n, d in ((2, 1), (3, 1), (4, 1), (3, 2)))


@dataclass(frozen=True)
class Operation:
    family: str
    k: Fraction

    def apply(self, x: int) -> Fraction:
        if self.family == "add":
            return Fraction(x) + self.k
        if self.family == "subtract":
            return Fraction(x) - self.k
        if self.family == "multiply":
            return Fraction(x) * self.k
        return Fraction(x) / self.k

    def valid_queries(self) -> list[int]:
        """Digits whose result is also a digit."""
        out = []
        for x in range(10):
            y = self.apply(x)
            if y.denominator == 1 and 0 <= y <= 9:
                out.append(x)
        return out

    def describe(self) -> str:
        return f"{self.family}({self.k})"


@dataclass(frozen=True)
class ArithmeticTaskExample:
    example_pairs: tuple[tuple[SvgDocument, SvgDocument], ...]
    example_digits: tuple[tuple[int, int], ...]
    operation: Operation
    test_query: int
    ground_truth: int
    consistent_operations: tuple[Operation, ...]


def consistent_operations(pairs: Sequence[tuple[int, int]]) -> list[Operation]:
    """Every operation in the four families that maps each query to its key."""
    found: list[Operation] = []
    # add / subtract: difference must be shared
    diffs = {y - x for x, y in pairs}
    if len(diffs) == 1:
        d = diffs.pop()
        if d >= 0:
            found.append(Operation("add", Fraction(d)))
        if d <= 0:
            found.append(Operation("subtract", Fraction(-d)))
    # multiply: ratio shared; pairs with x == 0 need y == 0
    ratios = {Fraction(y, x) for x, y in pairs if x != 0}
    zeros_ok = all(y == 0 for x, y in pairs if x == 0)
    if len(ratios) == 1 and zeros_ok:
        k = ratios.pop()
        if k > 0:
            found.append(Operation("multiply", k))
    # divide: y = x / k, so k = x / y for y != 0; pairs with y == 0 need x == 0
    inv = {Fraction(x, y) for x, y in pairs if y != 0}
    zeros_ok = all(x == 0 for x, y in pairs if y == 0)
    if len(inv) == 1 and zeros_ok:
        k = inv.pop()
        if k > 0:
            found.append(Operation("divide", k))
    return found


def generate_arithmetic_task(rng: np.random.Generator) -> ArithmeticTaskExample:
    """Sample an operation plus two example pairs and a test query, all with
    digit-valued operands and results; records every consistent reading."""
    while True:
        family = OPERATION_FAMILIES[int(rng.integers(0, 4))]
        if family == "add":
            k = Fraction(int(rng.integers(0, 10)))
        elif family == "subtract":
            k = Fraction(int(rng.integers(0, 10)))
        elif family == "multiply":
            k = _MULTIPLY_FACTORS[int(rng.integers(0, len(_MULTIPLY_FACTORS)))]
        else:
            k = _DIVIDE_FACTORS[int(rng.integers(0, len(_DIVIDE_FACTORS)))]
        op = Operation(family, k)
        valid = op.valid_queries()
        if len(valid) < 3:
            continue
        picks = rng.choice(len(valid), size=3, replace=False)
        q1, q2, qt = (valid[int(i)] for i in picks)
        pairs = ((q1, int(op.apply(q1))), (q2, int(op.apply(q2))))
        return ArithmeticTaskExample(
            example_pairs=tuple(
                (digit_svg(x), digit_svg(y)) for x, y in pairs),
            example_digits=pairs,
            operation=op,
            test_query=qt,
            ground_truth=int(op.apply(qt)),
            consistent_operations=tuple(consistent_operations(pairs)),
        )
