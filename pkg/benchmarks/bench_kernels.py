"""Compare the compiled kernels against the pure-Python twins.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--orbit 20000]

Each kernel is timed on identical inputs under both implementations and the
outputs are compared for bit equality.
"""
import argparse
import math
import time

import numpy as np

from expandolab import _pykernels, maps
from expandolab import geometry as geo

try:
    from expandolab import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _best(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def cases(orbit_len):
    m = maps.tent2d(0.95)
    rng = np.random.default_rng(0)
    x0 = np.array([0.9, 0.3])
    jit = rng.uniform(-1e-12, 1e-12, size=(orbit_len, 2))
    kicks = rng.uniform(-1e-9, 1e-9, size=(orbit_len, 2))
    orbit_args = (m.halfplane_array, m.linear_array, m.offset_array, x0, jit, kicks, 1e-13, geo.BOUNDARY_TOL)

    pts = rng.uniform([0.0, 0.0], [2.0, 1.0], size=(orbit_len, 2))
    locate_args = (m.halfplane_array, pts, geo.BOUNDARY_TOL)

    branches = rng.integers(0, 2, size=orbit_len).astype(np.int64)
    lyap_args = (m.linear_array, branches)

    tri = geo.affine_image(m.branches[0].domain, m.branches[0].transform)
    xs = [p[0] for p in tri.vertices]
    ys = [p[1] for p in tri.vertices]
    h = 2.0 / 128
    overlap_args = (xs, ys, 0.0, 0.0, h, 0, 128, 0, 64)
    return {
        "orbit": orbit_args,
        "locate_many": locate_args,
        "lyapunov_qr": lyap_args,
        "grid_overlap": overlap_args,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--orbit", type=int, default=20000, help="length of orbit-type inputs")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels unavailable; build with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'kernel':<14}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}  identical")
    for name, fargs in cases(args.orbit).items():
        tp, outp = _best(lambda: getattr(_pykernels, name)(*fargs), args.repeat)
        tc, outc = _best(lambda: getattr(_ckernels, name)(*fargs), args.repeat)
        print(f"{name:<14}{tp:>12.4f}{tc:>12.5f}{tp / tc:>10.1f}  {_same(outp, outc)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
