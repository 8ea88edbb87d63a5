"""Separable 2-D Daubechies-8 discrete wavelet transform.

Boundaries use half-point symmetric extension (``x[-1] = x[0]``), giving
``floor((n - 1) / 2) + 8`` coefficients per axis. That size law maps a
150x130 face to 82x72 then 48x43, and a 50x130 strip to 32x72 then 23x43.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _accel

# Daubechies-8 scaling (reconstruction low-pass) filter, sum = sqrt(2).
DB8_SCALING = np.array([
    0.05441584224310401, 0.31287159091429995, 0.6756307362972898,
    0.5853546836542067, -0.015829105256349306, -0.2840155429615469,
    0.0004724845739132828, 0.12874742662047847, -0.017369301001807547,
    -0.044088253930794755, 0.013981027917398282, 0.008746094047405777,
    -0.004870352993451574, -0.00039174037337694705, 0.0006754494064505693,
    -0.00011747678412476953,
])
FILTER_LENGTH = DB8_SCALING.size
_SIGN = (-1.0) ** np.arange(FILTER_LENGTH)

DEC_LO = DB8_SCALING[::-1].copy()
DEC_HI = -_SIGN * DB8_SCALING
REC_LO = DB8_SCALING.copy()
REC_HI = _SIGN * DB8_SCALING[::-1]

MIN_SIZE = FILTER_LENGTH


class WaveletSizeError(ValueError):
    """Input too small for another decomposition level."""


class SubbandSet(NamedTuple):
    approx: np.ndarray
    horizontal: np.ndarray
    vertical: np.ndarray
    diagonal: np.ndarray


@dataclass(frozen=True)
class WaveletConfig:
    levels: int = 2
    family: str = "db8"

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if self.family != "db8":
            raise ValueError(f"only db8 is supported, got {self.family!r}")


def coeff_length(n: int) -> int:
    return (n - 1) // 2 + FILTER_LENGTH // 2


def approx_shape(shape, levels: int):
    rows, cols = shape
    for _ in range(levels):
        rows, cols = coeff_length(rows), coeff_length(cols)
    return rows, cols


@lru_cache(maxsize=64)
def _extension_index(n: int) -> np.ndarray:
    """Source index for extended positions ``-(F-1) .. 2N-1``."""
    n_out = coeff_length(n)
    pos = np.arange(-(FILTER_LENGTH - 1), 2 * n_out)
    m = np.mod(pos, 2 * n)
    idx = np.where(m >= n, 2 * n - 1 - m, m).astype(np.int64)
    idx.setflags(write=False)
    return idx


def _down(x: np.ndarray, filt: np.ndarray) -> np.ndarray:
    """Filter and decimate along axis 0, returned transposed (contiguous).

    Applying this twice filters both axes and restores the orientation.
    """
    return _accel.downsample_filter(x, filt, _extension_index(x.shape[0]))


def _check_size(shape) -> None:
    for axis, name in ((0, "rows"), (1, "cols")):
        if shape[axis] < MIN_SIZE:
            raise WaveletSizeError(
                f"{name} = {shape[axis]} < {MIN_SIZE} (filter length)")


def dwt2_single_level(img) -> SubbandSet:
    """One analysis level: filter and decimate along rows, then columns.

    Subband naming follows the usual convention: ``horizontal`` is high-pass
    down the columns and low-pass along rows.
    """
    x = np.ascontiguousarray(img, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {x.shape}")
    _check_size(x.shape)
    # first pass runs down the columns; the second undoes the transpose
    lo_t, hi_t = _down(x, DEC_LO), _down(x, DEC_HI)
    return SubbandSet(_down(lo_t, DEC_LO), _down(hi_t, DEC_LO),
                      _down(lo_t, DEC_HI), _down(hi_t, DEC_HI))


def approx_level(img, cfg: WaveletConfig = WaveletConfig()) -> np.ndarray:
    """Approximation subband after ``cfg.levels`` decompositions.

    Only the low-pass chain is computed; the detail subbands are never formed.
    """
    x = np.ascontiguousarray(img, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {x.shape}")
    for level in range(1, cfg.levels + 1):
        try:
            _check_size(x.shape)
        except WaveletSizeError as exc:
            raise WaveletSizeError(f"level {level}: {exc}") from None
        x = _down(_down(x, DEC_LO), DEC_LO)
    return x


# ---------------------------------------------------------------------------
# inverse (used to check perfect reconstruction)


@lru_cache(maxsize=64)
def _synthesis_matrices(n_coeff: int):
    n_out = 2 * n_coeff - FILTER_LENGTH + 2
    m = np.arange(n_out)[:, None]
    k = np.arange(n_coeff)[None, :]
    t = m + FILTER_LENGTH - 2 - 2 * k
    valid = (t >= 0) & (t < FILTER_LENGTH)
    tc = np.clip(t, 0, FILTER_LENGTH - 1)
    return np.where(valid, REC_LO[tc], 0.0), np.where(valid, REC_HI[tc], 0.0)


def idwt2_single_level(bands: SubbandSet, shape=None) -> np.ndarray:
    """Invert :func:`dwt2_single_level`; ``shape`` crops odd-sized outputs."""
    rows_n, cols_n = bands.approx.shape
    slo_r, shi_r = _synthesis_matrices(rows_n)
    slo_c, shi_c = _synthesis_matrices(cols_n)
    lo = slo_r @ bands.approx + shi_r @ bands.horizontal
    hi = slo_r @ bands.vertical + shi_r @ bands.diagonal
    out = lo @ slo_c.T + hi @ shi_c.T
    if shape is not None:
        out = out[:shape[0], :shape[1]]
    return out
