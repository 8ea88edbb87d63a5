import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wdlbp.lbp import (DescriptorConfig, DescriptorSizeError, block_edges, block_histograms,
                       lbp_code, lbp_map, wd_lbp)
from wdlbp.wavelet import WaveletConfig


def naive_lbp(img):
    """Per-pixel reference written straight from the definition."""
    order = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]
    rows, cols = img.shape
    out = np.zeros((rows - 2, cols - 2), dtype=int)
    for r in range(1, rows - 1):
        for c in range(1, cols - 1):
            out[r - 1, c - 1] = sum(
                (1 << i) for i, (dr, dc) in enumerate(order) if img[r + dr, c + dc] - img[r, c] > 0)
    return out


class TestCode:
    def test_flat_window(self):
        assert lbp_code(np.full((3, 3), 7.0)) == 0

    def test_all_brighter(self):
        w = np.ones((3, 3))
        w[1, 1] = 0
        assert lbp_code(w) == 255

    def test_worked_window(self):
        # clockwise from top-left: 5 4 3 6 4 2 7 4, minus centre 4
        # -> (1, 0, -1, 2, 0, -2, 3, 0): bits 0, 3, 6
        window = [[5, 4, 3], [4, 4, 6], [7, 2, 4]]
        assert lbp_code(window) == 1 + 8 + 64
        assert naive_lbp(np.array(window, dtype=float))[0, 0] == 73

    @pytest.mark.parametrize("bit,pos", [(0, (0, 0)), (1, (0, 1)), (2, (0, 2)), (3, (1, 2)),
                                         (4, (2, 2)), (5, (2, 1)), (6, (2, 0)), (7, (1, 0))])
    def test_neighbour_order(self, bit, pos):
        w = np.zeros((3, 3))
        w[pos] = 1
        assert lbp_code(w) == 1 << bit


class TestMap:
    def test_constant(self):
        codes = lbp_map(np.full((48, 43), 12.0))
        assert codes.shape == (46, 41)
        assert not codes.any()

    def test_single_interior(self):
        assert lbp_map(np.arange(9.0).reshape(3, 3)).shape == (1, 1)

    def test_too_small(self):
        with pytest.raises(DescriptorSizeError):
            lbp_map(np.zeros((2, 5)))

    def test_matches_naive(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            img = rng.integers(0, 4, size=(8, 8)).astype(float)  # many ties
            np.testing.assert_array_equal(lbp_map(img), naive_lbp(img))

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, (9, 7), elements=st.floats(-100, 100)),
           st.floats(-50, 50), st.floats(0.01, 20))
    def test_shift_and_scale_invariance(self, img, shift, scale):
        img = np.round(img)  # integer grid keeps shifted differences exact
        base = lbp_map(img)
        np.testing.assert_array_equal(lbp_map(img + np.round(shift)), base)
        np.testing.assert_array_equal(lbp_map(img * 2.0 ** np.round(np.log2(scale))), base)


class TestBlocks:
    @pytest.mark.parametrize("d,dim", [(5, 6400), (6, 9216)])
    def test_reported_dims(self, d, dim):
        codes = np.random.default_rng(1).integers(0, 256, (46, 41)).astype(np.uint8)
        assert block_histograms(codes, d).shape == (dim,)

    def test_direct_count(self):
        h = block_histograms(np.array([[0, 1], [2, 3]], dtype=np.uint8), 1)
        assert h.shape == (256,)
        np.testing.assert_array_equal(h[:4], 1)
        assert h[4:].sum() == 0

    def test_edges(self):
        np.testing.assert_array_equal(block_edges(46, 5), [0, 9, 18, 28, 37, 46])
        np.testing.assert_array_equal(block_edges(21, 12), [0, 2, 4, 5, 7, 9, 11, 12, 14, 16, 18, 19, 21])

    def test_too_many_divisions(self):
        with pytest.raises(DescriptorSizeError):
            block_histograms(np.zeros((5, 20), dtype=np.uint8), 6)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 30), st.integers(1, 30), st.data())
    def test_partition(self, rows, cols, data):
        d = data.draw(st.integers(1, min(rows, cols)))
        rng = np.random.default_rng(rows * 31 + cols)
        codes = rng.integers(0, 256, (rows, cols)).astype(np.uint8)
        h = block_histograms(codes, d)
        assert h.sum() == rows * cols
        total = h.reshape(d * d, 256).sum(axis=0)
        np.testing.assert_array_equal(total, block_histograms(codes, 1))
        sizes = np.diff(block_edges(rows, d))
        assert sizes.min() >= 1 and sizes.max() - sizes.min() <= 1

    def test_row_major_block_order(self):
        codes = np.zeros((4, 4), dtype=np.uint8)
        codes[:2, 2:] = 9  # top-right block
        h = block_histograms(codes, 2).reshape(4, 256)
        assert h[1, 9] == 4 and h[0, 9] == 0 and h[2, 9] == 0


class TestDescriptor:
    def test_face_d5(self):
        face = np.random.default_rng(2).uniform(0, 255, (150, 130))
        f = wd_lbp(face, DescriptorConfig(5))
        assert f.shape == (6400,)
        assert f.sum() == 46 * 41

    def test_strip_d9(self):
        strip = np.random.default_rng(3).uniform(0, 255, (50, 130))
        f = wd_lbp(strip, DescriptorConfig(9))
        assert f.shape == (20736,)
        assert f.sum() == 21 * 41

    def test_plain_lbp(self):
        face = np.random.default_rng(4).uniform(0, 255, (150, 130))
        f = wd_lbp(face, DescriptorConfig(12, use_wavelet=False))
        assert f.shape == (144 * 256,)
        assert f.sum() == 148 * 128

    @pytest.mark.parametrize("cfg", [DescriptorConfig(3), DescriptorConfig(7, WaveletConfig(1)),
                                     DescriptorConfig(4, use_wavelet=False)])
    def test_constant_image(self, cfg):
        h = wd_lbp(np.full((150, 130), 80.0), cfg).reshape(-1, 256)
        assert (h[:, 1:] == 0).all() and (h[:, 0] > 0).all()

    def test_stage_errors(self):
        with pytest.raises(DescriptorSizeError, match="wavelet stage"):
            wd_lbp(np.zeros((15, 40)), DescriptorConfig(2))
        with pytest.raises(DescriptorSizeError, match="block stage"):
            wd_lbp(np.zeros((50, 130)), DescriptorConfig(22))
