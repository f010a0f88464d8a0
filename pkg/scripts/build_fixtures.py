"""Regenerate the bundled package data.

Produces, under src/svglab/data/:
  digits/bundled-*-ubyte.gz   IDX corpus of 28x28 handwritten digits
                              (sklearn's 8x8 digit scans, upscaled)
  digits/digit_N.svg          one traced prototype glyph per class
  letters/letter_X.svg        block-letter glyphs traced from a 5x7 bitmap font

Run from the repo root:  python scripts/build_fixtures.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
from PIL import Image

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from svglab.core import serialize_svg  # noqa: E402
from svglab.datasets import MNIST_CONFIG, load_mnist, write_idx  # noqa: E402
from svglab.raster import RasterImage, rasterize, to_gray  # noqa: E402
from svglab.vectorize import VectorizeConfig, vectorize  # noqa: E402

DATA = ROOT / "src" / "svglab" / "data"

TRAIN_COUNT = 1500  # remaining ~297 samples form the test split

FONT_5X7 = {
    "A": ["01110", "10001", "10001", "11111", "10001", "10001", "10001"],
    "B": ["11110", "10001", "10001", "11110", "10001", "10001", "11110"],
    "C": ["01110", "10001", "10000", "10000", "10000", "10001", "01110"],
    "E": ["11111", "10000", "10000", "11110", "10000", "10000", "11111"],
    "H": ["10001", "10001", "10001", "11111", "10001", "10001", "10001"],
    "K": ["10001", "10010", "10100", "11000", "10100", "10010", "10001"],
    "L": ["10000", "10000", "10000", "10000", "10000", "10000", "11111"],
    "N": ["10001", "11001", "11001", "10101", "10011", "10011", "10001"],
    "P": ["11110", "10001", "10001", "11110", "10000", "10000", "10000"],
    "R": ["11110", "10001", "10001", "11110", "10100", "10010", "10001"],
    "S": ["01111", "10000", "10000", "01110", "00001", "00001", "11110"],
    "T": ["11111", "00100", "00100", "00100", "00100", "00100", "00100"],
    "X": ["10001", "10001", "01010", "00100", "01010", "10001", "10001"],
    "Z": ["11111", "00001", "00010", "00100", "01000", "10000", "11111"],
}


def build_digit_corpus() -> None:
    from sklearn.datasets import load_digits

    raw = load_digits()
    upscaled = np.empty((len(raw.images), 28, 28), dtype=np.uint8)
    for i, img in enumerate(raw.images):
        small = np.clip(img / 16.0 * 255.0, 0, 255).astype(np.uint8)
        big = Image.fromarray(small, mode="L").resize((28, 28), Image.BILINEAR)
        upscaled[i] = np.asarray(big)
    labels = raw.target.astype(int)

    out = DATA / "digits"
    out.mkdir(parents=True, exist_ok=True)
    write_idx(upscaled[:TRAIN_COUNT], labels[:TRAIN_COUNT],
              out / "bundled-train-images-idx3-ubyte.gz",
              out / "bundled-train-labels-idx1-ubyte.gz")
    write_idx(upscaled[TRAIN_COUNT:], labels[TRAIN_COUNT:],
              out / "bundled-t10k-images-idx3-ubyte.gz",
              out / "bundled-t10k-labels-idx1-ubyte.gz")
    print(f"digit corpus: {TRAIN_COUNT} train / {len(labels) - TRAIN_COUNT} test")


def roundtrip_iou(img: RasterImage) -> tuple[float, object]:
    doc = vectorize(img, MNIST_CONFIG)
    back = rasterize(doc, img.width, img.height)
    got = np.all(back.pixels == 0, axis=2)
    want = to_gray(img) > 127.5
    union = np.logical_or(got, want).sum()
    iou = np.logical_and(got, want).sum() / union if union else 0.0
    return float(iou), doc


def build_digit_prototypes() -> None:
    out = DATA / "digits"
    test = load_mnist(out / "bundled-t10k-images-idx3-ubyte.gz",
                      out / "bundled-t10k-labels-idx1-ubyte.gz")
    for cls in range(10):
        best = None
        for img, label in test:
            if label != cls:
                continue
            iou, doc = roundtrip_iou(img)
            if best is None or iou > best[0]:
                best = (iou, doc)
        assert best is not None, f"no test sample for digit {cls}"
        (out / f"digit_{cls}.svg").write_text(serialize_svg(best[1]))
        print(f"digit {cls}: prototype IOU {best[0]:.3f}")


def build_letters() -> None:
    out = DATA / "letters"
    out.mkdir(parents=True, exist_ok=True)
    cfg = VectorizeConfig(mode="binary", min_patch_px=4, invert=True)
    for letter, rows in FONT_5X7.items():
        bitmap = np.array([[c == "1" for c in row] for row in rows])
        cell = 12
        canvas = np.full((100, 100), 255, dtype=np.uint8)
        oy = (100 - bitmap.shape[0] * cell) // 2
        ox = (100 - bitmap.shape[1] * cell) // 2
        for y, x in zip(*np.nonzero(bitmap)):
            canvas[oy + y * cell:oy + (y + 1) * cell,
                   ox + x * cell:ox + (x + 1) * cell] = 0
        doc = vectorize(RasterImage.from_gray(canvas), cfg, simplify_tolerance=0.5)
        (out / f"letter_{letter}.svg").write_text(serialize_svg(doc))
    print(f"letters: {''.join(sorted(FONT_5X7))}")


if __name__ == "__main__":
    build_digit_corpus()
    build_digit_prototypes()
    build_letters()
