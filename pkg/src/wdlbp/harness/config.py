from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Any, Mapping, Optional

from ..cca import DEFAULT_RIDGE, FUSION_MODES
from ..imaging import FACE_SHAPE, STRIP_ROWS
from ..lbp import DescriptorConfig
from ..wavelet import WaveletConfig

MODES = ("face", "periocular", "fused")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    """Everything that shapes a trained model. Defaults follow the best
    reported setting: 150x130 face, 50-row strip, db8 two levels, 9x9 blocks,
    summed canonical variates."""

    face_rows: int = FACE_SHAPE[0]
    face_cols: int = FACE_SHAPE[1]
    strip_rows: int = STRIP_ROWS
    strip_start: Optional[int] = None  # None: 20% of face rows
    divisions: int = 9
    levels: int = 2
    use_wavelet: bool = True
    mode: str = "fused"
    fusion: str = "ffo2"
    ridge: float = DEFAULT_RIDGE
    pca_keep: Optional[int] = None
    cca_pairs: Optional[int] = None
    open_set: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.fusion not in FUSION_MODES:
            raise ConfigError(f"fusion must be one of {FUSION_MODES}, got {self.fusion!r}")
        if self.divisions < 1 or self.levels < 1:
            raise ConfigError("divisions and levels must be >= 1")
        if self.ridge < 0:
            raise ConfigError(f"ridge must be >= 0, got {self.ridge}")
        if not 1 <= self.strip_rows <= self.face_rows:
            raise ConfigError(
                f"strip_rows {self.strip_rows} must lie in [1, {self.face_rows}]")

    def descriptor(self) -> DescriptorConfig:
        return DescriptorConfig(self.divisions, WaveletConfig(self.levels), self.use_wavelet)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        return cls.from_dict(data)
