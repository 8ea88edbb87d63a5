"""Eigenface-style PCA over descriptor vectors.

The covariance is ``(1/M) * sum(phi phi^T)`` with ``phi`` the mean-subtracted
features. Descriptors are far longer than the number of training samples,
so the eigenvectors come from the ``M x M`` Gram matrix and are mapped back
into feature space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

EIG_FLOOR = 1e-12


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray         # (dim,)
    basis: np.ndarray        # (dim, k), orthonormal columns
    eigenvalues: np.ndarray  # (k,), descending

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def n_components(self) -> int:
        return self.basis.shape[1]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so each column's largest-magnitude entry is positive."""
    if vectors.shape[1] == 0:
        return vectors
    pivot = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def pca_fit(features, keep: Optional[int] = None) -> PcaModel:
    """Fit mean and eigenbasis to an ``M x dim`` feature matrix.

    ``keep`` caps the number of components; ``None`` keeps every component
    whose eigenvalue exceeds ``1e-12`` of the largest (at most ``M - 1``).
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"features must be a 2-D matrix, got shape {X.shape}")
    m = X.shape[0]
    if m < 2:
        raise InsufficientDataError(f"PCA needs at least 2 samples, got {m}")
    if keep is not None and not 0 <= keep <= m - 1:
        raise ValueError(f"keep={keep} outside [0, {m - 1}] for {m} samples")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite values")

    mean = X.mean(axis=0)
    phi = X - mean
    gram = (phi @ phi.T) / m
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    top = evals[0] if evals.size else 0.0
    n = int(np.sum(evals > EIG_FLOOR * top)) if top > 0 else 0
    n = min(n, m - 1)
    if keep is not None:
        n = min(n, keep)
    evals, evecs = evals[:n], evecs[:, :n]

    basis = phi.T @ evecs
    basis /= np.linalg.norm(basis, axis=0)
    basis = _fix_signs(basis)
    return PcaModel(mean=mean, basis=basis, eigenvalues=np.maximum(evals, 0.0))


def pca_project(model: PcaModel, feature) -> np.ndarray:
    """Weights ``basis^T (feature - mean)``; also accepts a stack of rows."""
    f = np.asarray(feature, dtype=np.float64)
    if f.shape[-1] != model.dim:
        raise ValueError(
            f"feature dim {f.shape[-1]} does not match model dim {model.dim}")
    return (f - model.mean) @ model.basis


def pca_reconstruct(model: PcaModel, weights) -> np.ndarray:
    return model.mean + np.asarray(weights) @ model.basis.T
