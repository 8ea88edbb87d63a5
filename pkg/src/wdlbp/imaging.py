"""Grayscale image I/O, size normalisation and periocular strip cropping.

Images are plain 2-D ``float64`` numpy arrays with values in ``[0, 255]``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

FACE_SHAPE = (150, 130)
STRIP_ROWS = 50
STRIP_START_FRACTION = 0.20
EYE_CORNER_MARGIN = 10


class PgmError(ValueError):
    """Malformed or unsupported portable graymap."""


class UnsupportedDepthError(PgmError):
    pass


def as_gray(img) -> np.ndarray:
    """Validate and return ``img`` as a float64 intensity matrix."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    if arr.min() < 0 or arr.max() > 255:
        raise ValueError(
            f"pixel values must lie in [0, 255], got [{arr.min()}, {arr.max()}]")
    return arr


# ---------------------------------------------------------------------------
# PGM


def _header_tokens(data: bytes, count: int):
    """Yield ``count`` whitespace-separated header tokens plus the offset just
    past the last one. ``#`` starts a comment running to end of line."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise PgmError(f"unexpected end of header after {len(tokens)} token(s)")
        if data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _parse_int(token: bytes, what: str) -> int:
    try:
        value = int(token.decode("ascii"))
    except (UnicodeDecodeError, ValueError):
        raise PgmError(f"bad {what} token {token!r}") from None
    if value <= 0:
        raise PgmError(f"bad {what} token {token!r}: must be positive")
    return value


def parse_pgm(data: bytes) -> np.ndarray:
    tokens, pos = _header_tokens(data, 1)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"unsupported magic token {magic!r} (expected P2 or P5)")
    tokens, pos = _header_tokens(data, 4)
    cols = _parse_int(tokens[1], "width")
    rows = _parse_int(tokens[2], "height")
    maxval = _parse_int(tokens[3], "maxval")
    if maxval > 255:
        raise UnsupportedDepthError(f"maxval {maxval} > 255 is not supported")

    if magic == b"P5":
        body = data[pos + 1:pos + 1 + rows * cols]
        if len(body) != rows * cols:
            raise PgmError(
                f"raster truncated: expected {rows * cols} bytes, got {len(body)}")
        pixels = np.frombuffer(body, dtype=np.uint8)
    else:
        words = data[pos:].split()
        if len(words) < rows * cols:
            raise PgmError(
                f"raster truncated: expected {rows * cols} values, got {len(words)}")
        try:
            pixels = np.array([int(w) for w in words[:rows * cols]], dtype=np.int64)
        except ValueError:
            bad = next(w for w in words if not w.isdigit())
            raise PgmError(f"bad pixel token {bad!r}") from None
    if pixels.max(initial=0) > maxval:
        raise PgmError(f"pixel value {pixels.max()} exceeds maxval {maxval}")
    return pixels.reshape(rows, cols).astype(np.float64)


def load_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return parse_pgm(data)
    except PgmError as exc:
        raise type(exc)(f"{os.fspath(path)}: {exc}") from None


def save_pgm(path, img, binary: bool = True) -> None:
    """Write ``img`` as an 8-bit graymap, rounding and clipping to [0, 255]."""
    arr = np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0, 255).astype(np.uint8)
    rows, cols = arr.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(b"P5\n%d %d\n255\n" % (cols, rows))
            fh.write(arr.tobytes())
        else:
            fh.write(b"P2\n%d %d\n255\n" % (cols, rows))
            for row in arr:
                fh.write(" ".join(str(v) for v in row).encode("ascii") + b"\n")


# ---------------------------------------------------------------------------
# geometry


def resize_bilinear(img, target_rows: int, target_cols: int) -> np.ndarray:
    """Corner-aligned bilinear resampling (first/last samples map onto the
    source corners)."""
    if target_rows < 1 or target_cols < 1:
        raise ValueError(
            f"target size must be positive, got {target_rows}x{target_cols}")
    src = np.asarray(img, dtype=np.float64)
    rows, cols = src.shape
    if (rows, cols) == (target_rows, target_cols):
        return src.copy()

    def axis_weights(n_src, n_dst):
        if n_dst == 1 or n_src == 1:
            pos = np.zeros(n_dst)
        else:
            pos = np.arange(n_dst) * ((n_src - 1) / (n_dst - 1))
        lo = np.minimum(np.floor(pos).astype(np.int64), n_src - 1)
        hi = np.minimum(lo + 1, n_src - 1)
        return lo, hi, pos - lo

    r0, r1, wr = axis_weights(rows, target_rows)
    c0, c1, wc = axis_weights(cols, target_cols)
    top = src[r0][:, c0] * (1 - wc) + src[r0][:, c1] * wc
    bottom = src[r1][:, c0] * (1 - wc) + src[r1][:, c1] * wc
    out = top * (1 - wr)[:, None] + bottom * wr[:, None]
    return np.clip(out, 0.0, 255.0)


@dataclass(frozen=True)
class StripSpec:
    row_start: int
    strip_rows: int = STRIP_ROWS
    strip_cols: Optional[int] = None  # None: full face width

    def check(self, face_shape) -> None:
        rows, cols = face_shape
        width = cols if self.strip_cols is None else self.strip_cols
        if self.row_start < 0:
            raise ValueError(f"strip row_start {self.row_start} < 0")
        if self.strip_rows < 1 or width < 1:
            raise ValueError(f"strip size must be positive, got {self.strip_rows}x{width}")
        if self.row_start + self.strip_rows > rows:
            raise ValueError(
                f"strip rows {self.row_start}+{self.strip_rows} = "
                f"{self.row_start + self.strip_rows} exceed face rows {rows}")
        if width > cols:
            raise ValueError(f"strip cols {width} exceed face cols {cols}")


def default_strip(face_rows: int = FACE_SHAPE[0], strip_rows: int = STRIP_ROWS,
                  eye_corner_rows: Optional[Sequence[float]] = None) -> StripSpec:
    """Strip placement on a normalised face.

    Without landmarks the strip starts at 20% of the face height. With eye
    corner rows (already in normalised-face coordinates) it starts
    ``EYE_CORNER_MARGIN`` rows above the highest corner, clamped to the face.
    """
    if eye_corner_rows:
        start = int(round(min(eye_corner_rows))) - EYE_CORNER_MARGIN
    else:
        start = int(round(STRIP_START_FRACTION * face_rows))
    start = min(max(start, 0), face_rows - strip_rows)
    return StripSpec(row_start=start, strip_rows=strip_rows)


def crop_strip(face, spec: StripSpec) -> np.ndarray:
    arr = np.asarray(face, dtype=np.float64)
    spec.check(arr.shape)
    width = arr.shape[1] if spec.strip_cols is None else spec.strip_cols
    return arr[spec.row_start:spec.row_start + spec.strip_rows, :width].copy()
