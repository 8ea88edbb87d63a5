"""Basic 3x3 local binary patterns and block histogram descriptors.

Bit ``i`` of a code is set when neighbour ``g_i`` is strictly brighter than
the centre. Neighbours run clockwise from the top-left:

    g0 g1 g2
    g7 gc g3
    g6 g5 g4

This ordering defines the feature layout; changing it invalidates saved
models.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .wavelet import WaveletConfig, WaveletSizeError, approx_level, approx_shape

N_BINS = 256
NEIGHBOUR_OFFSETS = _accel.NEIGHBOUR_OFFSETS


class DescriptorSizeError(ValueError):
    """Image or code map too small for the requested descriptor."""


@dataclass(frozen=True)
class DescriptorConfig:
    divisions: int = 9
    wavelet: WaveletConfig = field(default_factory=WaveletConfig)
    use_wavelet: bool = True

    def __post_init__(self):
        if self.divisions < 1:
            raise ValueError(f"divisions must be >= 1, got {self.divisions}")

    @property
    def dim(self) -> int:
        return self.divisions ** 2 * N_BINS

    def code_map_shape(self, shape):
        """Code-map shape this config produces from an image of ``shape``."""
        rows, cols = shape
        if self.use_wavelet:
            rows, cols = approx_shape((rows, cols), self.wavelet.levels)
        return rows - 2, cols - 2


def lbp_code(window) -> int:
    w = np.asarray(window, dtype=np.float64).reshape(3, 3)
    gc = w[1, 1]
    code = 0
    for bit, (dr, dc) in enumerate(NEIGHBOUR_OFFSETS):
        if w[1 + dr, 1 + dc] - gc > 0:
            code |= 1 << bit
    return code


def lbp_map(img) -> np.ndarray:
    """LBP code of every interior pixel, shape ``(rows - 2, cols - 2)``."""
    x = np.ascontiguousarray(img, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3 or x.shape[1] < 3:
        raise DescriptorSizeError(f"LBP needs at least 3x3 input, got {x.shape}")
    return _accel.lbp_codes(x)


def block_edges(n: int, d: int) -> np.ndarray:
    """Boundaries ``round(k * n / d)`` for ``k = 0..d``, halves rounded up."""
    k = np.arange(d + 1, dtype=np.int64)
    return (2 * k * n + d) // (2 * d)


def block_histograms(codes, d: int) -> np.ndarray:
    """Concatenated 256-bin counts of a ``d x d`` block grid, row-major."""
    codes = np.ascontiguousarray(codes, dtype=np.uint8)
    rows, cols = codes.shape
    if d < 1 or d > rows or d > cols:
        raise DescriptorSizeError(
            f"{d} divisions do not fit a {rows}x{cols} code map")
    return _accel.block_counts(codes, block_edges(rows, d), block_edges(cols, d))


def wd_lbp(img, cfg: DescriptorConfig) -> np.ndarray:
    """WD-LBP descriptor, or plain LBP when ``cfg.use_wavelet`` is false."""
    x = np.asarray(img, dtype=np.float64)
    if cfg.use_wavelet:
        try:
            x = approx_level(x, cfg.wavelet)
        except WaveletSizeError as exc:
            raise DescriptorSizeError(f"wavelet stage: {exc}") from None
    try:
        codes = lbp_map(x)
    except DescriptorSizeError as exc:
        raise DescriptorSizeError(f"lbp stage: {exc}") from None
    try:
        return block_histograms(codes, cfg.divisions)
    except DescriptorSizeError as exc:
        raise DescriptorSizeError(f"block stage: {exc}") from None
