"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature. The module-level
names (``lbp_codes``, ``block_counts``, ``downsample_filter``) are bound to the
numba versions unless numba is missing or ``WDLBP_NO_NUMBA`` is set to a
non-empty value other than ``0``. Both variants stay importable so tests and
the benchmark can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("WDLBP_NO_NUMBA", "0") in ("", "0")

# (row, col) offsets of g_0..g_7, clockwise from the top-left neighbour.
NEIGHBOUR_OFFSETS = (
    (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1),
)
_DR = np.array([o[0] for o in NEIGHBOUR_OFFSETS], dtype=np.int64)
_DC = np.array([o[1] for o in NEIGHBOUR_OFFSETS], dtype=np.int64)


# ---------------------------------------------------------------------------
# numpy implementations


def lbp_codes_numpy(img: np.ndarray) -> np.ndarray:
    rows, cols = img.shape
    center = img[1:-1, 1:-1]
    codes = np.zeros((rows - 2, cols - 2), dtype=np.uint8)
    for bit, (dr, dc) in enumerate(NEIGHBOUR_OFFSETS):
        neigh = img[1 + dr:rows - 1 + dr, 1 + dc:cols - 1 + dc]
        codes |= (neigh > center).astype(np.uint8) << np.uint8(bit)
    return codes


def block_counts_numpy(codes: np.ndarray, row_edges: np.ndarray,
                       col_edges: np.ndarray) -> np.ndarray:
    rows, cols = codes.shape
    dr = len(row_edges) - 1
    dc = len(col_edges) - 1
    rb = np.searchsorted(row_edges, np.arange(rows), side="right") - 1
    cb = np.searchsorted(col_edges, np.arange(cols), side="right") - 1
    idx = (rb[:, None] * dc + cb[None, :]) * 256 + codes.astype(np.int64)
    return np.bincount(idx.ravel(), minlength=dr * dc * 256).astype(np.float64)


def downsample_filter_numpy(x: np.ndarray, filt: np.ndarray,
                            ext: np.ndarray) -> np.ndarray:
    """Filter every column of ``x`` with ``filt``, keep odd phases, transpose.

    ``ext`` maps extended positions ``-(F-1) .. 2N-1`` to source rows, so
    ``out[:, k] = sum_j filt[j] * x[ext[2k + 1 - j + F - 1], :]``. Taps are
    summed in groups of 8 as a fixed pairwise tree; the numba kernel uses the
    same tree so both agree bit for bit. ``F`` must be a multiple of 8.
    """
    flen = filt.shape[0]
    n_out = (ext.shape[0] - flen + 1) // 2
    out = np.zeros((n_out, x.shape[1]))
    # even/odd phases of the extended rows, so every tap reads a contiguous block
    phases = (np.ascontiguousarray(x[ext[0::2]]), np.ascontiguousarray(x[ext[1::2]]))

    def tap(j):
        start = flen - j
        return filt[j] * phases[start % 2][start // 2:start // 2 + n_out]

    # written inline so only a few temporaries are alive at once
    for j in range(0, flen, 8):
        out += (((tap(j) + tap(j + 1)) + (tap(j + 2) + tap(j + 3)))
                + ((tap(j + 4) + tap(j + 5)) + (tap(j + 6) + tap(j + 7))))
    return np.ascontiguousarray(out.T)


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def lbp_codes_numba(img):
        rows, cols = img.shape
        codes = np.zeros((rows - 2, cols - 2), dtype=np.uint8)
        for r in range(1, rows - 1):
            for c in range(1, cols - 1):
                gc = img[r, c]
                code = 0
                for bit in range(8):
                    if img[r + _DR[bit], c + _DC[bit]] > gc:
                        code |= 1 << bit
                codes[r - 1, c - 1] = code
        return codes

    @numba.njit(cache=True)
    def block_counts_numba(codes, row_edges, col_edges):
        dr = row_edges.shape[0] - 1
        dc = col_edges.shape[0] - 1
        out = np.zeros(dr * dc * 256, dtype=np.float64)
        for bi in range(dr):
            for bj in range(dc):
                base = (bi * dc + bj) * 256
                for r in range(row_edges[bi], row_edges[bi + 1]):
                    for c in range(col_edges[bj], col_edges[bj + 1]):
                        out[base + codes[r, c]] += 1.0
        return out

    @numba.njit(cache=True)
    def downsample_filter_numba(x, filt, ext):
        flen = filt.shape[0]
        n_out = (ext.shape[0] - flen + 1) // 2
        cols = x.shape[1]
        out = np.empty((cols, n_out))
        acc = np.empty(cols)
        for k in range(n_out):
            b = 2 * k + flen
            acc[:] = 0.0
            # contiguous inner loop over columns; 8 source rows per sweep
            for j in range(0, flen, 8):
                s0, s1, s2, s3 = ext[b - j], ext[b - j - 1], ext[b - j - 2], ext[b - j - 3]
                s4, s5, s6, s7 = ext[b - j - 4], ext[b - j - 5], ext[b - j - 6], ext[b - j - 7]
                w0, w1, w2, w3 = filt[j], filt[j + 1], filt[j + 2], filt[j + 3]
                w4, w5, w6, w7 = filt[j + 4], filt[j + 5], filt[j + 6], filt[j + 7]
                for c in range(cols):
                    acc[c] += (((w0 * x[s0, c] + w1 * x[s1, c]) + (w2 * x[s2, c] + w3 * x[s3, c]))
                               + ((w4 * x[s4, c] + w5 * x[s5, c]) + (w6 * x[s6, c] + w7 * x[s7, c])))
            for c in range(cols):
                out[c, k] = acc[c]
        return out

else:  # pragma: no cover
    lbp_codes_numba = lbp_codes_numpy
    block_counts_numba = block_counts_numpy
    downsample_filter_numba = downsample_filter_numpy


if USE_NUMBA:
    lbp_codes = lbp_codes_numba
    block_counts = block_counts_numba
    downsample_filter = downsample_filter_numba
else:
    lbp_codes = lbp_codes_numpy
    block_counts = block_counts_numpy
    downsample_filter = downsample_filter_numpy


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
