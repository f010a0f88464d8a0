"""Compare the compiled kernels against the pure-Python fallback.

Usage:  python benchmarks/bench_kernels.py [--repeat 5]

Times the three kernel entry points on realistic workloads plus the full
vectorize and rasterize pipelines routed through each backend.
"""

from __future__ import annotations

import argparse
import importlib
import os
import sys
import time
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))


def timeit(fn, repeat: int) -> float:
    best = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best.append(time.perf_counter() - t0)
    return min(best)


def star_polygon(n=200, r1=100.0, r2=40.0, cx=112.0, cy=112.0):
    xs, ys = [], []
    for k in range(n):
        r = r1 if k % 2 == 0 else r2
        a = 2 * np.pi * k / n
        xs.append(cx + r * np.cos(a))
        ys.append(cy + r * np.sin(a))
    xs.append(xs[0])
    ys.append(ys[0])
    return (np.asarray(xs), np.asarray(ys),
            np.asarray([0, len(xs)], dtype=np.int64))


def digit_images(count=50):
    from svglab.raster import RasterImage

    rng = np.random.default_rng(0)
    images = []
    for _ in range(count):
        yy, xx = np.mgrid[0:28, 0:28]
        cx, cy = rng.uniform(10, 18, 2)
        r = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
        mask = (r > rng.uniform(3, 5)) & (r < rng.uniform(8, 12))
        images.append(RasterImage.from_gray(np.where(mask, 255, 0).astype(np.uint8)))
    return images


def bench_backend(module_name: str, repeat: int) -> dict[str, float]:
    kernels = importlib.import_module(module_name)
    results = {}

    xs, ys, starts = star_polygon()
    results["fill_mask 224x224 star"] = timeit(
        lambda: kernels.fill_mask(xs, ys, starts, 224, 224, False), repeat)

    rng = np.random.default_rng(1)
    mask = rng.random((224, 224)) > 0.55
    results["label_components 224x224"] = timeit(
        lambda: kernels.label_components(mask, 8), repeat)

    blob = np.zeros((224, 224), dtype=np.uint8)
    yy, xx = np.mgrid[0:224, 0:224]
    blob[((xx - 112) ** 2 + (yy - 112) ** 2) < 90 ** 2] = 1
    results["trace_boundary r90 disc"] = timeit(
        lambda: kernels.trace_boundary(blob, int(np.argmax(blob) % 224),
                                       int(np.argmax(blob) // 224), False), repeat)
    return results


_PIPELINE_SNIPPET = f"""
import sys, time
import numpy as np
sys.path.insert(0, {str(ROOT / 'src')!r})
from svglab.vectorize import VectorizeConfig, vectorize
from svglab.raster import RasterImage, rasterize
from svglab.kernels import backend_name

rng = np.random.default_rng(0)
imgs = []
for _ in range(50):
    yy, xx = np.mgrid[0:28, 0:28]
    cx, cy = rng.uniform(10, 18, 2)
    r = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
    mask = (r > rng.uniform(3, 5)) & (r < rng.uniform(8, 12))
    imgs.append(RasterImage.from_gray(np.where(mask, 255, 0).astype(np.uint8)))

cfg = VectorizeConfig(mode="binary", min_patch_px=16)
t0 = time.perf_counter()
docs = [vectorize(im, cfg) for im in imgs]
t1 = time.perf_counter()
for d in docs:
    rasterize(d, 224, 224)
t2 = time.perf_counter()
print(backend_name(), t1 - t0, t2 - t1)
"""


def bench_pipeline(pure: bool, repeat: int) -> dict[str, float]:
    # re-exec so the backend env knob is honored at import time
    import subprocess

    env = os.environ.copy()
    if pure:
        env["SVGLAB_PURE_PYTHON"] = "1"
    else:
        env.pop("SVGLAB_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", _PIPELINE_SNIPPET], env=env,
                         capture_output=True, text=True, check=True)
    backend, vec_s, ras_s = out.stdout.split()
    return {"vectorize 50 digits": float(vec_s),
            "rasterize 50 docs @224": float(ras_s),
            "_backend": backend}


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = [("svglab._kernels_py", "python")]
    try:
        importlib.import_module("svglab._kernels")
        backends.append(("svglab._kernels", "compiled"))
    except ImportError:
        print("compiled extension not built; showing fallback only")

    rows: dict[str, dict[str, float]] = {}
    for module_name, label in backends:
        for name, seconds in bench_backend(module_name, args.repeat).items():
            rows.setdefault(name, {})[label] = seconds

    for pure in (True, False) if len(backends) == 2 else (True,):
        stats = bench_pipeline(pure, args.repeat)
        label = stats.pop("_backend")
        for name, seconds in stats.items():
            rows.setdefault(name, {})[label] = seconds

    width = max(len(name) for name in rows) + 2
    labels = [label for _, label in backends]
    header = "kernel".ljust(width) + "".join(f"{l:>12}" for l in labels)
    if len(labels) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, values in rows.items():
        line = name.ljust(width)
        for label in labels:
            v = values.get(label)
            line += f"{v * 1000:>10.2f}ms" if v is not None else f"{'-':>12}"
        if len(labels) == 2 and all(l in values for l in labels):
            line += f"{values['python'] / values['compiled']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
