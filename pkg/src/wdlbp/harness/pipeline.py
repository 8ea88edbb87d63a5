"""Training, evaluation and division sweeps over a manifest.

Each image is resized to the canonical face, the periocular strip is cut
from it, and both regions go through the descriptor, their own PCA, CCA
fusion and finally the nearest-neighbour gallery.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import _accel
from ..cca import CcaModel, cca_fit, fuse
from ..classify import Gallery, ThresholdError, compute_threshold, identify, nearest
from ..imaging import StripSpec, crop_strip, default_strip, load_pgm, resize_bilinear
from ..lbp import DescriptorConfig, wd_lbp
from ..subspace import PcaModel, pca_fit, pca_project
from .config import ConfigError, PipelineConfig
from .manifest import DatasetManifest, Record

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
REGIONS = ("face", "periocular")


class StageError(ValueError):
    """A pipeline stage failed on a specific image."""


@dataclass(frozen=True, eq=False)
class Sample:
    label: str
    face: np.ndarray
    strip: np.ndarray
    source: Optional[Path] = None


def strip_spec_for(cfg: PipelineConfig, src_rows: int,
                   eye_corners=None) -> StripSpec:
    if cfg.strip_start is not None:
        return StripSpec(cfg.strip_start, cfg.strip_rows)
    corner_rows = None
    if eye_corners:
        scale = (cfg.face_rows - 1) / max(src_rows - 1, 1)
        corner_rows = [r * scale for r, _ in eye_corners]
    return default_strip(cfg.face_rows, cfg.strip_rows, corner_rows)


def prepare_image(img, cfg: PipelineConfig, eye_corners=None) -> Tuple[np.ndarray, np.ndarray]:
    """Normalised face and its periocular strip."""
    face = resize_bilinear(img, cfg.face_rows, cfg.face_cols)
    spec = strip_spec_for(cfg, np.shape(img)[0], eye_corners)
    return face, crop_strip(face, spec)


def load_samples(records: Sequence[Record], cfg: PipelineConfig) -> List[Sample]:
    samples = []
    for rec in records:
        try:
            img = load_pgm(rec.path)
            face, strip = prepare_image(img, cfg, rec.eye_corners)
        except ValueError as exc:
            raise StageError(f"{rec.path}: {exc}") from None
        samples.append(Sample(rec.subject, face, strip, rec.path))
    return samples


def extract_features(samples: Sequence[Sample], desc: DescriptorConfig,
                     regions: Sequence[str] = REGIONS):
    """Descriptor matrices per region plus total extraction seconds per region."""
    feats: Dict[str, np.ndarray] = {}
    seconds: Dict[str, float] = {}
    for region in regions:
        rows = np.empty((len(samples), desc.dim))
        t0 = time.perf_counter()
        for i, s in enumerate(samples):
            img = s.face if region == "face" else s.strip
            try:
                rows[i] = wd_lbp(img, desc)
            except ValueError as exc:
                where = s.source if s.source is not None else f"sample {i}"
                raise StageError(f"{where} ({region}): {exc}") from None
        seconds[region] = time.perf_counter() - t0
        feats[region] = rows
    return feats, seconds


def regions_for(mode: str) -> Tuple[str, ...]:
    return REGIONS if mode == "fused" else (mode,)


# ---------------------------------------------------------------------------
# model


@dataclass(frozen=True, eq=False)
class PipelineModel:
    config: PipelineConfig
    pca_face: Optional[PcaModel]
    pca_perioc: Optional[PcaModel]
    cca: Optional[CcaModel]
    gallery: Gallery
    format_version: int = FORMAT_VERSION

    def embed(self, face_feats=None, perioc_feats=None) -> np.ndarray:
        """Gallery-space vectors for one descriptor or a stack of them."""
        mode = self.config.mode
        if mode == "face":
            return pca_project(self.pca_face, face_feats)
        if mode == "periocular":
            return pca_project(self.pca_perioc, perioc_feats)
        x = pca_project(self.pca_face, face_feats)
        y = pca_project(self.pca_perioc, perioc_feats)
        return fuse(self.cca, x, y, self.config.fusion)


def fit_features(labels: Sequence[str], feats: Dict[str, np.ndarray],
                 cfg: PipelineConfig) -> PipelineModel:
    mode = cfg.mode
    pca_face = pca_fit(feats["face"], cfg.pca_keep) if "face" in regions_for(mode) else None
    pca_perioc = (pca_fit(feats["periocular"], cfg.pca_keep)
                  if "periocular" in regions_for(mode) else None)
    cca = None
    if mode == "fused":
        cca = cca_fit(pca_project(pca_face, feats["face"]),
                      pca_project(pca_perioc, feats["periocular"]),
                      ridge=cfg.ridge, max_pairs=cfg.cca_pairs)
    model = PipelineModel(cfg, pca_face, pca_perioc, cca, Gallery((), np.zeros((0, 0))))
    vectors = model.embed(feats.get("face"), feats.get("periocular"))
    try:
        threshold = compute_threshold(labels, vectors)
    except ThresholdError:
        if cfg.open_set:
            raise ConfigError("open-set mode needs at least one subject with two "
                              "training images") from None
        log.warning("no intra-class pairs in training set; threshold set to 0")
        threshold = 0.0
    gallery = Gallery(tuple(labels), vectors, threshold,
                      cfg.fusion if mode == "fused" else mode)
    return PipelineModel(cfg, pca_face, pca_perioc, cca, gallery)


def train(manifest: DatasetManifest, cfg: PipelineConfig = PipelineConfig()) -> PipelineModel:
    records = manifest.train
    if len(records) < 3:
        raise ConfigError(f"training needs at least 3 images, got {len(records)}")
    if len(manifest.subjects("train")) < 2:
        raise ConfigError("training needs at least 2 subjects")
    samples = load_samples(records, cfg)
    feats, _ = extract_features(samples, cfg.descriptor(), regions_for(cfg.mode))
    return fit_features([s.label for s in samples], feats, cfg)


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class ProbeResult:
    truth: str
    predicted: Optional[str]  # None: rejected (open-set)
    distance: float


@dataclass
class EvalReport:
    correct: int
    total: int
    per_probe: List[ProbeResult]
    timing: Dict[str, float] = field(default_factory=dict)
    config: Dict = field(default_factory=dict)

    @property
    def rate_fraction(self) -> Fraction:
        return Fraction(100 * self.correct, self.total) if self.total else Fraction(0)

    @property
    def recognition_rate(self) -> float:
        return float(self.rate_fraction)

    @property
    def accepted(self) -> int:
        return sum(p.predicted is not None for p in self.per_probe)

    def summary(self) -> dict:
        return {
            "recognition_rate": self.recognition_rate,
            "correct": self.correct,
            "total": self.total,
            "accepted": self.accepted,
            "timing": self.timing,
            "backend": _accel.backend(),
            "config": self.config,
        }


def classify_embedded(model: PipelineModel, labels: Sequence[str],
                      feats: Dict[str, np.ndarray]) -> Tuple[List[ProbeResult], float]:
    """Classify each probe; returns results and total classify seconds."""
    open_set = model.config.open_set
    results = []
    t0 = time.perf_counter()
    for i, truth in enumerate(labels):
        z = model.embed(*(feats[r][i] if r in feats else None for r in REGIONS))
        label, dist = nearest(model.gallery, z)
        if open_set and not dist < model.gallery.threshold:
            label = None
        results.append(ProbeResult(truth, label, dist))
    return results, time.perf_counter() - t0


def evaluate_samples(model: PipelineModel, samples: Sequence[Sample]) -> EvalReport:
    cfg = model.config
    feats, ext_seconds = extract_features(samples, cfg.descriptor(), regions_for(cfg.mode))
    labels = [s.label for s in samples]
    results, cls_seconds = classify_embedded(model, labels, feats)
    n = max(len(samples), 1)
    correct = sum(r.predicted == r.truth for r in results)
    timing = {
        "extract_ms_per_image": 1e3 * sum(ext_seconds.values()) / n,
        "classify_ms_per_image": 1e3 * cls_seconds / n,
    }
    return EvalReport(correct, len(results), results, timing, cfg.to_dict())


def evaluate(model: PipelineModel, manifest: DatasetManifest) -> EvalReport:
    records = manifest.test
    if not records:
        raise ConfigError("manifest has no test records")
    missing = sorted(set(manifest.subjects("test")) - set(model.gallery.labels))
    if missing and not model.config.open_set:
        log.warning("test subjects absent from gallery: %s", ", ".join(missing))
    return evaluate_samples(model, load_samples(records, model.config))


def write_report(report: EvalReport, out_dir) -> None:
    """``report.csv`` (per probe, deterministic) and ``summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["probe", "truth", "predicted", "distance", "correct"])
        for i, p in enumerate(report.per_probe):
            w.writerow([i, p.truth, "" if p.predicted is None else p.predicted,
                        repr(p.distance), int(p.predicted == p.truth)])
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(report.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# division sweep

VARIANTS = ("lbp-face", "lbp-periocular", "lbp-fused",
            "wdlbp-face", "wdlbp-periocular", "wdlbp-fused")
_TARGETS = {"face": ("face", None), "periocular": ("periocular", None),
            "fused": ("fused", None), "ffo1": ("fused", "ffo1"), "ffo2": ("fused", "ffo2")}


def parse_variant(name: str) -> Tuple[bool, str, Optional[str]]:
    """``'wdlbp-fused'`` -> (use_wavelet, mode, fusion override)."""
    feature, _, target = name.partition("-")
    if feature not in ("lbp", "wdlbp") or target not in _TARGETS:
        raise ConfigError(
            f"bad variant {name!r}: expected (lbp|wdlbp)-(face|periocular|fused|ffo1|ffo2)")
    mode, fusion = _TARGETS[target]
    return feature == "wdlbp", mode, fusion


@dataclass(frozen=True)
class SweepRow:
    variant: str
    d: int
    rate: Optional[float]
    extract_ms: Optional[float]
    classify_ms: Optional[float]
    note: str = ""


def sweep_samples(train_samples: Sequence[Sample], test_samples: Sequence[Sample],
                  d_values: Sequence[int], variants: Sequence[str] = VARIANTS,
                  cfg: PipelineConfig = PipelineConfig()) -> List[SweepRow]:
    parsed = {v: parse_variant(v) for v in variants}
    face_shape = train_samples[0].face.shape
    strip_shape = train_samples[0].strip.shape
    train_labels = [s.label for s in train_samples]
    test_labels = [s.label for s in test_samples]
    n_test = max(len(test_samples), 1)
    rows: List[SweepRow] = []
    for d in d_values:
        for use_wavelet in (False, True):
            group = [v for v in variants if parsed[v][0] == use_wavelet]
            if not group:
                continue
            base = cfg.replace(divisions=d, use_wavelet=use_wavelet)
            desc = base.descriptor()
            smallest = min(min(desc.code_map_shape(face_shape)),
                           min(desc.code_map_shape(strip_shape)))
            if d > smallest:
                note = f"d={d} exceeds smallest code-map side {smallest}"
                log.warning(note)
                rows += [SweepRow(v, d, None, None, None, note) for v in group]
                continue
            train_f, _ = extract_features(train_samples, desc)
            test_f, ext_s = extract_features(test_samples, desc)
            for v in group:
                _, mode, fusion = parsed[v]
                vcfg = base.replace(mode=mode, fusion=fusion or base.fusion)
                model = fit_features(train_labels, train_f, vcfg)
                results, cls_s = classify_embedded(model, test_labels, test_f)
                correct = sum(r.predicted == r.truth for r in results)
                ext_ms = 1e3 * sum(ext_s[r] for r in regions_for(mode)) / n_test
                rows.append(SweepRow(v, d, float(Fraction(100 * correct, len(results))),
                                     ext_ms, 1e3 * cls_s / n_test))
    order = {v: i for i, v in enumerate(variants)}
    rows.sort(key=lambda r: (order[r.variant], r.d))
    return rows


def sweep_divisions(manifest: DatasetManifest, d_values: Sequence[int],
                    variants: Sequence[str] = VARIANTS,
                    cfg: PipelineConfig = PipelineConfig()) -> List[SweepRow]:
    train_samples = load_samples(manifest.train, cfg)
    test_samples = load_samples(manifest.test, cfg)
    return sweep_samples(train_samples, test_samples, d_values, variants, cfg)


def write_sweep(rows: Sequence[SweepRow], out_dir, cfg: PipelineConfig) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def fmt(x):
        return "" if x is None else f"{x:.4f}"

    with open(out / "report.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variant", "d", "rate", "extract_ms", "classify_ms", "note"])
        for r in rows:
            w.writerow([r.variant, r.d, fmt(r.rate), fmt(r.extract_ms),
                        fmt(r.classify_ms), r.note])
    best = {}
    for r in rows:
        if r.rate is not None and (r.variant not in best or r.rate > best[r.variant]["rate"]):
            best[r.variant] = {"d": r.d, "rate": r.rate}
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump({"best": best, "backend": _accel.backend(), "config": cfg.to_dict()},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
