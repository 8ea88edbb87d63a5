"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--number 200]

Prints one row per kernel (and for the whole descriptor) with the best time
per call for each backend and the speed-up. Results are checked for equality
before timing.
"""

import argparse
import contextlib
import timeit

import numpy as np

from wdlbp import _accel
from wdlbp.lbp import DescriptorConfig, block_edges, wd_lbp
from wdlbp.wavelet import DEC_LO, _extension_index

KERNELS = ("lbp_codes", "block_counts", "downsample_filter")


@contextlib.contextmanager
def backend(name):
    """Temporarily rebind the dispatch names in ``_accel``."""
    saved = {k: getattr(_accel, k) for k in KERNELS}
    for k in KERNELS:
        setattr(_accel, k, getattr(_accel, f"{k}_{name}"))
    try:
        yield
    finally:
        for k, v in saved.items():
            setattr(_accel, k, v)


def best(fn, number, repeat):
    fn()  # warm-up (and JIT compile)
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=200)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    face = rng.uniform(0, 255, (150, 130))
    codes = rng.integers(0, 256, (148, 128)).astype(np.uint8)
    re, ce = block_edges(148, 9), block_edges(128, 9)
    ext = _extension_index(150)
    cases = {
        "lbp_codes 150x130": (_accel.lbp_codes_numba, _accel.lbp_codes_numpy, (face,)),
        "block_counts d=9": (_accel.block_counts_numba, _accel.block_counts_numpy,
                             (codes, re, ce)),
        "downsample 150x130": (_accel.downsample_filter_numba, _accel.downsample_filter_numpy,
                               (face, DEC_LO, ext)),
    }

    print(f"{'case':24s} {'numba us':>10s} {'numpy us':>10s} {'speed-up':>9s}")
    for name, (fast, slow, argv) in cases.items():
        assert np.array_equal(fast(*argv), slow(*argv)), name
        t_fast = best(lambda: fast(*argv), args.number, args.repeat)
        t_slow = best(lambda: slow(*argv), args.number, args.repeat)
        print(f"{name:24s} {1e6 * t_fast:10.1f} {1e6 * t_slow:10.1f} {t_slow / t_fast:8.1f}x")

    for label, cfg in (("wd-lbp descriptor d=9", DescriptorConfig(9)),
                       ("plain lbp descriptor d=9", DescriptorConfig(9, use_wavelet=False))):
        times = {}
        for name in ("numba", "numpy"):
            with backend(name):
                times[name] = best(lambda: wd_lbp(face, cfg), args.number, args.repeat)
        print(f"{label:24s} {1e6 * times['numba']:10.1f} {1e6 * times['numpy']:10.1f} "
              f"{times['numpy'] / times['numba']:8.1f}x")


if __name__ == "__main__":
    main()
