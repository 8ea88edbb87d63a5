"""numba kernels and their numpy twins must agree."""

import numpy as np
import pytest

from wdlbp import _accel
from wdlbp.lbp import block_edges
from wdlbp.wavelet import DEC_HI, DEC_LO, _extension_index

pytestmark = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


@pytest.mark.parametrize("shape", [(3, 3), (8, 8), (48, 43), (150, 130)])
def test_lbp_codes(shape):
    img = np.random.default_rng(0).integers(0, 5, shape).astype(float)
    np.testing.assert_array_equal(_accel.lbp_codes_numba(img), _accel.lbp_codes_numpy(img))


@pytest.mark.parametrize("shape,d", [((46, 41), 9), ((21, 41), 12), ((5, 7), 1)])
def test_block_counts(shape, d):
    codes = np.random.default_rng(1).integers(0, 256, shape).astype(np.uint8)
    re, ce = block_edges(shape[0], d), block_edges(shape[1], d)
    np.testing.assert_array_equal(_accel.block_counts_numba(codes, re, ce),
                                  _accel.block_counts_numpy(codes, re, ce))


@pytest.mark.parametrize("n", [16, 17, 72, 130])
def test_downsample_filter(n):
    x = np.random.default_rng(2).standard_normal((n, 7))
    ext = _extension_index(n)
    for filt in (DEC_LO, DEC_HI):
        # same summation order in both paths
        np.testing.assert_array_equal(_accel.downsample_filter_numba(x, filt, ext),
                                      _accel.downsample_filter_numpy(x, filt, ext))


def test_backend_flag(monkeypatch):
    import importlib
    monkeypatch.setenv("WDLBP_NO_NUMBA", "1")
    mod = importlib.reload(_accel)
    try:
        assert mod.backend() == "numpy"
        assert mod.lbp_codes is mod.lbp_codes_numpy
    finally:
        monkeypatch.delenv("WDLBP_NO_NUMBA")
        importlib.reload(_accel)
    assert _accel.backend() == "numba"
