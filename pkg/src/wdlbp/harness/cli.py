"""Command line entry point.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .manifest import load_manifest
from .persist import load_model, save_model
from .pipeline import (VARIANTS, evaluate, extract_features, load_samples,
                       sweep_divisions, train, write_report, write_sweep)
from .synth import SynthConfig, write_dataset

log = logging.getLogger("wdlbp")

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


def _d_range(text: str):
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with pipeline settings")
    p.add_argument("--divisions", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--fusion", choices=["ffo1", "ffo2"])
    p.add_argument("--mode", choices=["face", "periocular", "fused"])
    p.add_argument("--ridge", type=float)
    p.add_argument("--pca-keep", type=int, dest="pca_keep")
    p.add_argument("--plain-lbp", action="store_true",
                   help="LBP on the normalised image instead of the wavelet approximation")
    p.add_argument("--open-set", action="store_true", dest="open_set",
                   help="reject probes whose nearest distance is not below the threshold")


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    overrides = {k: getattr(args, k) for k in
                 ("divisions", "levels", "fusion", "mode", "ridge", "pca_keep")
                 if getattr(args, k, None) is not None}
    if getattr(args, "plain_lbp", False):
        overrides["use_wavelet"] = False
    if getattr(args, "open_set", False):
        overrides["open_set"] = True
    return cfg.replace(**overrides) if overrides else cfg


def cmd_gen_synth(args) -> None:
    cfg = SynthConfig(subjects=args.subjects, images_per_subject=args.images,
                      train_per_subject=args.train_per_subject,
                      noise=args.noise, max_shift=args.max_shift, warp=args.warp,
                      identity_scale=args.identity_scale, eye_detail=args.eye_detail,
                      seed=args.seed)
    path = write_dataset(args.out, cfg)
    print(path)


def cmd_extract(args) -> None:
    cfg = _config(args)
    manifest = load_manifest(args.manifest)
    samples = load_samples(manifest.records, cfg)
    feats, seconds = extract_features(samples, cfg.descriptor())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    np.savez(out / "features.npz",
             labels=np.array([r.subject for r in manifest.records]),
             splits=np.array([r.split for r in manifest.records]),
             face=feats["face"], periocular=feats["periocular"])
    summary = {"images": len(samples), "dim": cfg.descriptor().dim,
               "extract_ms_per_image": 1e3 * sum(seconds.values()) / max(len(samples), 1),
               "config": cfg.to_dict()}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def cmd_train(args) -> None:
    cfg = _config(args)
    manifest = load_manifest(args.manifest)
    t0 = time.perf_counter()
    model = train(manifest, cfg)
    save_model(model, args.model)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        summary = {"gallery_size": len(model.gallery), "threshold": model.gallery.threshold,
                   "train_seconds": time.perf_counter() - t0, "config": cfg.to_dict()}
        if model.cca is not None:
            summary["canonical_pairs"] = model.cca.n_pairs
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def cmd_eval(args) -> None:
    manifest = load_manifest(args.manifest)
    if args.model:
        model = load_model(args.model)
        if args.open_set:
            model = type(model)(model.config.replace(open_set=True), model.pca_face,
                                model.pca_perioc, model.cca, model.gallery)
    else:
        model = train(manifest, _config(args))
    report = evaluate(model, manifest)
    write_report(report, args.out)
    print(f"recognition rate {report.recognition_rate:.2f}% "
          f"({report.correct}/{report.total})")


def cmd_sweep(args) -> None:
    cfg = _config(args)
    manifest = load_manifest(args.manifest)
    variants = args.variants.split(",") if args.variants else list(VARIANTS)
    rows = sweep_divisions(manifest, _d_range(args.d_range), variants, cfg)
    write_sweep(rows, args.out, cfg)
    for r in rows:
        rate = "skipped" if r.rate is None else f"{r.rate:.1f}"
        print(f"{r.variant:18s} d={r.d:<3d} {rate}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wdlbp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="write a deterministic synthetic dataset")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--subjects", type=int, default=SynthConfig.subjects)
    p.add_argument("--images", type=int, default=SynthConfig.images_per_subject)
    p.add_argument("--train-per-subject", type=int, default=SynthConfig.train_per_subject)
    p.add_argument("--noise", type=float, default=SynthConfig.noise)
    p.add_argument("--max-shift", type=int, default=SynthConfig.max_shift)
    p.add_argument("--warp", type=float, default=SynthConfig.warp)
    p.add_argument("--identity-scale", type=float, default=SynthConfig.identity_scale)
    p.add_argument("--eye-detail", type=float, default=SynthConfig.eye_detail)
    p.add_argument("--seed", type=int, default=SynthConfig.seed)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("extract", help="compute descriptors for every manifest image")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="fit a model on the train split")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--model", type=Path, required=True, help="output model file")
    p.add_argument("--out", type=Path, help="directory for summary.json")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate on the test split")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--model", type=Path, help="trained model (default: train first)")
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="recognition rate versus number of divisions")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--d-range", default="7..12", help="'lo..hi' or comma list")
    p.add_argument("--variants", help=f"comma list, default {','.join(VARIANTS)}")
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors; ours is 1
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:  # manifest, config, model-format and image errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
