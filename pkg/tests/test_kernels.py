"""Parity between the compiled kernels and the pure-Python fallback."""

import numpy as np
import pytest

from svglab import _kernels_py as kpy

kc = pytest.importorskip("svglab._kernels")

BACKENDS = [kpy, kc]


def test_backend_names():
    assert kpy.BACKEND == "python"
    assert kc.BACKEND == "compiled"


@pytest.mark.parametrize("evenodd", [False, True])
def test_fill_mask_parity_random_polygons(evenodd):
    rng = np.random.default_rng(42)
    for _ in range(25):
        n_poly = rng.integers(1, 4)
        xs_parts, ys_parts, starts = [], [], [0]
        for _ in range(n_poly):
            k = int(rng.integers(3, 9))
            px = rng.uniform(-5, 37, size=k)
            py = rng.uniform(-5, 37, size=k)
            px = np.append(px, px[0])
            py = np.append(py, py[0])
            xs_parts.append(px)
            ys_parts.append(py)
            starts.append(starts[-1] + k + 1)
        xs = np.concatenate(xs_parts)
        ys = np.concatenate(ys_parts)
        st = np.asarray(starts, dtype=np.int64)
        a = kpy.fill_mask(xs, ys, st, 32, 32, evenodd)
        b = kc.fill_mask(xs, ys, st, 32, 32, evenodd)
        assert np.array_equal(a, b)


@pytest.mark.parametrize("connectivity", [4, 8])
def test_label_parity_random_masks(connectivity):
    rng = np.random.default_rng(7)
    for _ in range(25):
        mask = rng.random((24, 24)) > 0.55
        la, na = kpy.label_components(mask, connectivity)
        lb, nb = kc.label_components(mask, connectivity)
        assert na == nb
        # labels may be numbered differently; compare partitions
        for i in range(1, na + 1):
            cells = la == i
            values = np.unique(lb[cells])
            assert len(values) == 1 and values[0] != 0


def test_trace_parity_random_components():
    rng = np.random.default_rng(13)
    for _ in range(25):
        mask = rng.random((20, 20)) > 0.6
        labels, n = kpy.label_components(mask, 8)
        for i in range(1, n + 1):
            comp = (labels == i).astype(np.uint8)
            flat = int(np.argmax(comp))
            sy, sx = divmod(flat, comp.shape[1])
            va = kpy.trace_boundary(comp, sx, sy, False)
            vb = kc.trace_boundary(comp, sx, sy, False)
            assert np.array_equal(va, vb)
