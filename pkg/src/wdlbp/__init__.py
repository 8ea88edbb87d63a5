"""Face and periocular recognition from wavelet-domain LBP histograms.

Feature extraction (``wavelet``, ``lbp``), subspace projection and fusion
(``subspace``, ``cca``) and matching (``classify``) are plain numpy modules;
``wdlbp.harness`` wires them into a train/evaluate pipeline and a CLI.
"""

from ._accel import backend
from .cca import CcaModel, cca_fit, fuse, fuse_ffo1, fuse_ffo2
from .classify import Gallery, compute_threshold, identify, nearest
from .imaging import StripSpec, crop_strip, default_strip, load_pgm, resize_bilinear, save_pgm
from .lbp import DescriptorConfig, block_histograms, lbp_code, lbp_map, wd_lbp
from .subspace import PcaModel, pca_fit, pca_project, pca_reconstruct
from .wavelet import SubbandSet, WaveletConfig, approx_level, dwt2_single_level, idwt2_single_level

__version__ = "0.1.0"

__all__ = [
    "backend", "CcaModel", "cca_fit", "fuse", "fuse_ffo1", "fuse_ffo2",
    "Gallery", "compute_threshold", "identify", "nearest",
    "StripSpec", "crop_strip", "default_strip", "load_pgm", "resize_bilinear", "save_pgm",
    "DescriptorConfig", "block_histograms", "lbp_code", "lbp_map", "wd_lbp",
    "PcaModel", "pca_fit", "pca_project", "pca_reconstruct",
    "SubbandSet", "WaveletConfig", "approx_level", "dwt2_single_level", "idwt2_single_level",
]
