"""Dataset handling, training/evaluation pipeline, model files and CLI."""

from .config import ConfigError, PipelineConfig
from .manifest import DatasetManifest, ManifestError, load_manifest
from .persist import load_model, save_model
from .pipeline import EvalReport, PipelineModel, evaluate, sweep_divisions, train

__all__ = ["ConfigError", "PipelineConfig", "DatasetManifest", "ManifestError", "load_manifest",
           "load_model", "save_model", "EvalReport", "PipelineModel", "evaluate",
           "sweep_divisions", "train"]
