"""Binary model files.

Layout (little-endian)::

    b"FPCF"  u8 version  u32 header_len  header (UTF-8 JSON)
    matrices, in the order listed by header["matrices"], each as
        u32 rows  u32 cols  rows*cols f64 (row-major)
    u32 CRC-32 of every preceding byte

The JSON header carries the pipeline config, gallery labels and modes;
everything numeric lives in the matrices so round-trips are bit-exact.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ..cca import CcaModel
from ..classify import Gallery
from ..subspace import PcaModel
from .config import PipelineConfig
from .pipeline import FORMAT_VERSION, PipelineModel

MAGIC = b"FPCF"


class ModelFormatError(ValueError):
    pass


class TruncatedModelError(ModelFormatError):
    def __init__(self, offset: int, needed: int, size: int, what: str):
        self.offset = offset
        super().__init__(
            f"file truncated: {what} at byte offset {offset} needs {needed} byte(s), "
            f"file ends at {size}")


class ChecksumError(ModelFormatError):
    pass


def _as_matrix(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype="<f8")
    return a.reshape(1, -1) if a.ndim == 1 else a


def _model_matrices(model: PipelineModel) -> Dict[str, np.ndarray]:
    mats: Dict[str, np.ndarray] = {}
    for prefix, pca in (("pca_face", model.pca_face), ("pca_perioc", model.pca_perioc)):
        if pca is not None:
            mats[f"{prefix}.mean"] = pca.mean
            mats[f"{prefix}.basis"] = pca.basis
            mats[f"{prefix}.eigenvalues"] = pca.eigenvalues
    if model.cca is not None:
        c = model.cca
        mats.update({"cca.mean_x": c.mean_x, "cca.mean_y": c.mean_y,
                     "cca.basis_a": c.basis_a, "cca.basis_b": c.basis_b,
                     "cca.correlations": c.correlations,
                     "cca.ridge": np.array([c.ridge])})
    mats["gallery.vectors"] = model.gallery.vectors
    mats["gallery.threshold"] = np.array([model.gallery.threshold])
    return {k: np.asarray(v, dtype=np.float64) for k, v in mats.items()}


def dumps_model(model: PipelineModel) -> bytes:
    mats = _model_matrices(model)
    header = {
        "config": model.config.to_dict(),
        "labels": list(model.gallery.labels),
        "gallery_mode": model.gallery.mode,
        "matrices": list(mats),
        "shapes": {k: list(v.shape) for k, v in mats.items()},
    }
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    parts: List[bytes] = [MAGIC, struct.pack("<BI", FORMAT_VERSION, len(hbytes)), hbytes]
    for m in map(_as_matrix, mats.values()):
        parts.append(struct.pack("<II", *m.shape))
        parts.append(np.ascontiguousarray(m, dtype="<f8").tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedModelError(self.pos, n, len(self.data), what)
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def loads_model(data: bytes) -> PipelineModel:
    rd = _Reader(data)
    magic = rd.take(4, "magic")
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    version, hlen = rd.unpack("<BI", "version and header length")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version {version} (expected {FORMAT_VERSION})")
    try:
        header = json.loads(rd.take(hlen, "header").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt header: {exc}") from None

    mats: Dict[str, np.ndarray] = {}
    for name in header["matrices"]:
        rows, cols = rd.unpack("<II", f"shape of {name}")
        raw = rd.take(8 * rows * cols, f"matrix {name} ({rows}x{cols})")
        m = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(rows, cols)
        shape = header["shapes"][name]
        if m.size != int(np.prod(shape)):
            raise ModelFormatError(f"matrix {name} is {rows}x{cols}, header says {tuple(shape)}")
        mats[name] = m.reshape(shape)
    body_end = rd.pos
    (crc,) = rd.unpack("<I", "checksum")
    if rd.pos != len(data):
        raise ModelFormatError(f"{len(data) - rd.pos} trailing byte(s) after checksum")
    actual = zlib.crc32(data[:body_end]) & 0xFFFFFFFF
    if crc != actual:
        raise ChecksumError(f"checksum mismatch: stored {crc:#010x}, computed {actual:#010x}")

    def pca(prefix) -> Optional[PcaModel]:
        if f"{prefix}.mean" not in mats:
            return None
        return PcaModel(mats[f"{prefix}.mean"], mats[f"{prefix}.basis"],
                        mats[f"{prefix}.eigenvalues"])

    cca = None
    if "cca.mean_x" in mats:
        cca = CcaModel(mats["cca.mean_x"], mats["cca.mean_y"], mats["cca.basis_a"],
                       mats["cca.basis_b"], mats["cca.correlations"],
                       float(mats["cca.ridge"][0]))
    gallery = Gallery(tuple(header["labels"]), mats["gallery.vectors"],
                      float(mats["gallery.threshold"][0]), header["gallery_mode"])
    model = PipelineModel(PipelineConfig.from_dict(header["config"]),
                          pca("pca_face"), pca("pca_perioc"), cca, gallery, version)
    _check_consistency(model)
    return model


def _check_consistency(model: PipelineModel) -> None:
    dim = model.config.descriptor().dim
    for pca in (model.pca_face, model.pca_perioc):
        if pca is not None and pca.dim != dim:
            raise ModelFormatError(f"PCA dim {pca.dim} does not match descriptor dim {dim}")
    if model.cca is not None:
        if model.cca.mean_x.shape[0] != model.pca_face.n_components or \
                model.cca.mean_y.shape[0] != model.pca_perioc.n_components:
            raise ModelFormatError("CCA input dims do not match PCA component counts")


def save_model(model: PipelineModel, path) -> None:
    Path(path).write_bytes(dumps_model(model))


def load_model(path) -> PipelineModel:
    return loads_model(Path(path).read_bytes())
