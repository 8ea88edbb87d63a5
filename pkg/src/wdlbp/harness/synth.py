"""Deterministic synthetic face-like dataset.

Each subject gets a smooth random texture on top of a shared face layout
(oval shading, dark eye band). Every image of that subject adds its own
smooth nuisance texture, pixel noise, a small translation, a smooth
elastic warp and an illumination change (gain, offset and a linear ramp).
The warp is what makes very fine grids brittle: once blocks get smaller
than the local displacement, histograms stop lining up. Nuisance strength is
drawn independently for the eye band and for the rest of the face, so the
two regions degrade independently from image to image.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List

import numpy as np

from ..imaging import FACE_SHAPE, save_pgm
from .manifest import Record, write_manifest


@dataclass(frozen=True)
class SynthConfig:
    subjects: int = 10
    images_per_subject: int = 10
    train_per_subject: int = 5
    rows: int = FACE_SHAPE[0]
    cols: int = FACE_SHAPE[1]
    noise: float = 0.4
    max_shift: int = 2
    identity_scale: float = 4.0
    warp: float = 5.0
    eye_detail: float = 1.0
    seed: int = 7


def _smooth(rng: np.random.Generator, shape, sigma: float) -> np.ndarray:
    """Unit-variance Gaussian-blurred white noise."""
    radius = int(3 * sigma) + 1
    t = np.arange(-radius, radius + 1)
    k = np.exp(-0.5 * (t / sigma) ** 2)
    k /= k.sum()
    pad = radius
    x = rng.standard_normal((shape[0] + 2 * pad, shape[1] + 2 * pad))
    x = np.apply_along_axis(np.convolve, 0, x, k, mode="same")
    x = np.apply_along_axis(np.convolve, 1, x, k, mode="same")
    x = x[pad:pad + shape[0], pad:pad + shape[1]]
    return x / x.std()


def _layout(rows: int, cols: int) -> np.ndarray:
    r = np.linspace(-1, 1, rows)[:, None]
    c = np.linspace(-1, 1, cols)[None, :]
    oval = np.exp(-(r ** 2 / 0.9 + c ** 2 / 0.7))
    eyes = sum(np.exp(-(((r + 0.27) / 0.08) ** 2 + ((c - cx) / 0.15) ** 2))
               for cx in (-0.4, 0.4))
    return 60 + 110 * oval - 50 * eyes


def _eye_mask(rows: int, cols: int) -> np.ndarray:
    """Soft weight that is ~1 on the eye band (rows 20%..53%) and ~0 elsewhere."""
    r = np.arange(rows)[:, None] / rows
    band = 1 / (1 + np.exp(-(r - 0.2) * 60)) * 1 / (1 + np.exp((r - 0.53) * 60))
    return np.broadcast_to(band, (rows, cols))


def _shift(img: np.ndarray, dr: int, dc: int) -> np.ndarray:
    return np.roll(np.roll(img, dr, axis=0), dc, axis=1)


def _warp(img: np.ndarray, dy: np.ndarray, dx: np.ndarray) -> np.ndarray:
    """Bilinear resample of ``img`` at ``(r + dy, c + dx)``, edges clamped."""
    rows, cols = img.shape
    r = np.clip(np.arange(rows)[:, None] + dy, 0, rows - 1)
    c = np.clip(np.arange(cols)[None, :] + dx, 0, cols - 1)
    r0 = np.minimum(np.floor(r).astype(np.int64), rows - 2)
    c0 = np.minimum(np.floor(c).astype(np.int64), cols - 2)
    fr, fc = r - r0, c - c0
    return ((1 - fr) * ((1 - fc) * img[r0, c0] + fc * img[r0, c0 + 1])
            + fr * ((1 - fc) * img[r0 + 1, c0] + fc * img[r0 + 1, c0 + 1]))


def generate_images(cfg: SynthConfig):
    """Yield ``(subject_index, image_index, image)`` in a fixed order."""
    rng = np.random.default_rng(cfg.seed)
    shape = (cfg.rows, cfg.cols)
    layout = _layout(*shape)
    eye = _eye_mask(*shape)
    detail = 1.0 + cfg.eye_detail * eye
    protos = [layout + detail * (22 * _smooth(rng, shape, cfg.identity_scale)
                                 + 10 * _smooth(rng, shape, 3 * cfg.identity_scale))
              for _ in range(cfg.subjects)]
    ramp_r = np.linspace(-1, 1, cfg.rows)[:, None]
    ramp_c = np.linspace(-1, 1, cfg.cols)[None, :]
    for s, proto in enumerate(protos):
        for i in range(cfg.images_per_subject):
            w_eye, w_rest = rng.uniform(0.3, 1.7, size=2) * cfg.noise
            nuisance = 22 * _smooth(rng, shape, 2.0)
            weight = w_eye * eye + w_rest * (1 - eye)
            img = proto + weight * nuisance + 4 * cfg.noise * rng.standard_normal(shape)
            img = _shift(img, *rng.integers(-cfg.max_shift, cfg.max_shift + 1, size=2))
            if cfg.warp:
                img = _warp(img, cfg.warp * _smooth(rng, shape, 12.0),
                            cfg.warp * _smooth(rng, shape, 12.0))
            gain = rng.uniform(0.8, 1.1)
            img = gain * img + rng.uniform(-15, 15) + 12 * (
                rng.uniform(-1, 1) * ramp_r + rng.uniform(-1, 1) * ramp_c)
            yield s, i, np.clip(img, 0, 255)


def write_dataset(out_dir, cfg: SynthConfig = SynthConfig()) -> Path:
    """Write PGM images plus ``manifest.csv``; returns the manifest path."""
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    records: List[Record] = []
    for s, i, img in generate_images(cfg):
        path = out / "images" / f"s{s:03d}_{i:02d}.pgm"
        save_pgm(path, img)
        split = "train" if i < cfg.train_per_subject else "test"
        records.append(Record(f"s{s:03d}", path, split))
    manifest = out / "manifest.csv"
    write_manifest(manifest, records)
    return manifest
