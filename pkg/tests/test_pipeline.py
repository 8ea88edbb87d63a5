import csv
import json
import logging

import numpy as np
import pytest

from wdlbp.classify import nearest
from wdlbp.harness.config import ConfigError, PipelineConfig
from wdlbp.harness.manifest import DatasetManifest, Record, load_manifest
from wdlbp.harness.pipeline import (Sample, StageError, fit_features, evaluate, evaluate_samples,
                                    extract_features, load_samples, parse_variant, prepare_image,
                                    strip_spec_for, sweep_samples, train, write_report,
                                    write_sweep)
from wdlbp.imaging import save_pgm


@pytest.fixture(scope="module")
def small(small_manifest_path):
    return load_manifest(small_manifest_path)


def test_prepare_shapes():
    face, strip = prepare_image(np.random.default_rng(0).uniform(0, 255, (300, 260)),
                                PipelineConfig())
    assert face.shape == (150, 130) and strip.shape == (50, 130)
    np.testing.assert_array_equal(strip, face[30:80])


def test_strip_from_eye_corners():
    cfg = PipelineConfig()
    corners = ((60, 40), (60, 80), (64, 160), (64, 200))
    spec = strip_spec_for(cfg, 299, corners)
    assert spec.row_start == 20  # corner row 60 -> 30 on the 150-row face, minus 10


def test_self_match(small):
    """Probing with the training images themselves is 100 % correct."""
    cfg = PipelineConfig(divisions=4)
    model = train(small, cfg)
    as_test = DatasetManifest(tuple(Record(r.subject, r.path, "test") for r in small.train))
    report = evaluate(model, as_test)
    assert report.recognition_rate == 100.0
    assert max(p.distance for p in report.per_probe) < 1e-9


@pytest.mark.parametrize("mode,fusion", [("face", "ffo2"), ("periocular", "ffo2"),
                                         ("fused", "ffo1"), ("fused", "ffo2")])
def test_modes_run(small, mode, fusion):
    model = train(small, PipelineConfig(divisions=3, mode=mode, fusion=fusion))
    report = evaluate(model, small)
    assert report.total == len(small.test)
    assert 0 <= report.recognition_rate <= 100
    if mode == "fused":
        k = model.cca.n_pairs
        assert model.gallery.vectors.shape[1] == (2 * k if fusion == "ffo1" else k)


def test_rate_is_exact_fraction(small):
    report = evaluate(train(small, PipelineConfig(divisions=3)), small)
    assert report.rate_fraction * report.total == 100 * report.correct


def test_open_set_zero_threshold_rejects_all():
    rng = np.random.default_rng(1)
    base = rng.uniform(0, 255, (150, 130))
    # every subject has a single training image: no intra-class pairs, threshold 0
    train_s = [Sample(f"s{i}", *prepare_image(base + 20 * rng.standard_normal(base.shape),
                                              PipelineConfig())) for i in range(4)]
    cfg = PipelineConfig(divisions=3, mode="face")
    feats, _ = extract_features(train_s, cfg.descriptor(), ("face",))
    model = fit_features([s.label for s in train_s], feats, cfg)
    assert model.gallery.threshold == 0.0
    with pytest.raises(ConfigError, match="open-set"):
        fit_features([s.label for s in train_s], feats, cfg.replace(open_set=True))
    open_model = type(model)(cfg.replace(open_set=True), model.pca_face, None, None,
                             model.gallery)
    report = evaluate_samples(open_model, train_s)
    assert report.accepted == 0 and report.correct == 0


def test_open_set_threshold_semantics(small):
    model = train(small, PipelineConfig(divisions=4, open_set=True))
    report = evaluate(model, small)
    for p in report.per_probe:
        assert (p.predicted is not None) == (p.distance < model.gallery.threshold)


def test_minimal_model(tmp_path):
    """Two subjects, two images each, one division."""
    rng = np.random.default_rng(2)
    lines = []
    for s in range(2):
        base = rng.uniform(0, 255, (40, 40))
        for i in range(2):
            save_pgm(tmp_path / f"{s}{i}.pgm", base + rng.normal(0, 5, base.shape))
            lines.append(f"S{s},{s}{i}.pgm,train")
    save_pgm(tmp_path / "p.pgm", base)
    lines.append("S1,p.pgm,test")
    (tmp_path / "m.csv").write_text("\n".join(lines) + "\n")
    manifest = load_manifest(tmp_path / "m.csv")
    for mode in ("face", "periocular", "fused"):
        model = train(manifest, PipelineConfig(divisions=1, mode=mode))
        assert evaluate(model, manifest).total == 1


def test_too_little_training_data(tmp_path):
    save_pgm(tmp_path / "a.pgm", np.zeros((20, 20)))
    (tmp_path / "m.csv").write_text("A,a.pgm,train\nA,a.pgm,train\nA,a.pgm,test\n")
    with pytest.raises(ConfigError, match="3 images"):
        train(load_manifest(tmp_path / "m.csv"))
    (tmp_path / "m.csv").write_text("A,a.pgm,train\nA,a.pgm,train\nA,a.pgm,train\n")
    with pytest.raises(ConfigError, match="2 subjects"):
        train(load_manifest(tmp_path / "m.csv"))


def test_corrupt_image_names_path(small, tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n150 130\n255\n" + b"\0" * 100)
    records = list(small.records) + [Record(small.train[0].subject, bad, "train")]
    with pytest.raises(StageError, match="bad.pgm"):
        train(DatasetManifest(tuple(records)), PipelineConfig(divisions=3))


def test_report_files(small, tmp_path):
    report = evaluate(train(small, PipelineConfig(divisions=3)), small)
    write_report(report, tmp_path)
    rows = list(csv.reader(open(tmp_path / "report.csv")))
    assert rows[0] == ["probe", "truth", "predicted", "distance", "correct"]
    assert len(rows) == 1 + report.total
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["correct"] == report.correct
    assert "extract_ms_per_image" in summary["timing"]


class TestSweep:
    def test_variant_names(self):
        assert parse_variant("wdlbp-fused") == (True, "fused", None)
        assert parse_variant("lbp-ffo1") == (False, "fused", "ffo1")
        with pytest.raises(ConfigError):
            parse_variant("hog-face")

    def test_oversized_divisions_become_warning_rows(self, small, caplog):
        cfg = PipelineConfig()
        tr, te = load_samples(small.train, cfg), load_samples(small.test, cfg)
        with caplog.at_level(logging.WARNING):
            rows = sweep_samples(tr, te, [12, 22], ["wdlbp-periocular", "lbp-periocular"], cfg)
        by = {(r.variant, r.d): r for r in rows}
        assert by["wdlbp-periocular", 12].rate is not None  # 21 x 41 map holds 12 blocks
        assert by["wdlbp-periocular", 22].rate is None
        assert "exceeds" in by["wdlbp-periocular", 22].note
        assert by["lbp-periocular", 22].rate is not None
        assert any("exceeds" in m for m in caplog.messages)

    def test_write_sweep(self, small, tmp_path):
        cfg = PipelineConfig()
        tr, te = load_samples(small.train, cfg), load_samples(small.test, cfg)
        rows = sweep_samples(tr, te, [3, 4], ["wdlbp-face"], cfg)
        write_sweep(rows, tmp_path, cfg)
        lines = (tmp_path / "report.csv").read_text().splitlines()
        assert lines[0] == "variant,d,rate,extract_ms,classify_ms,note"
        assert len(lines) == 3
        best = json.loads((tmp_path / "summary.json").read_text())["best"]
        assert best["wdlbp-face"]["d"] in (3, 4)


def test_gallery_nearest_consistency(small):
    model = train(small, PipelineConfig(divisions=3))
    z = model.gallery.vectors[3]
    assert nearest(model.gallery, z) == (model.gallery.labels[3], 0.0)
