"""Canonical correlation analysis between two feature views, and the two
feature-level fusion rules built on it.

The coupled eigenproblems ``Cxx^-1 Cxy Cyy^-1 Cyx a = rho^2 a`` (and the
mirror one for ``b``) are solved in whitened symmetric form:
``Cxx^-1/2 Cxy Cyy^-1 Cyx Cxx^-1/2`` has the same eigenvalues and
``a = Cxx^-1/2 p``; then ``b = Cyy^-1 Cyx a / rho``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

DEFAULT_RIDGE = 1e-8
RHO_FLOOR = 1e-6
_PINV_FLOOR = 1e-12

FFO1 = "ffo1"
FFO2 = "ffo2"
FUSION_MODES = (FFO1, FFO2)


class CcaDataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CcaModel:
    mean_x: np.ndarray        # (n1,)
    mean_y: np.ndarray        # (n2,)
    basis_a: np.ndarray       # (n1, k)
    basis_b: np.ndarray       # (n2, k)
    correlations: np.ndarray  # (k,), descending
    ridge: float = DEFAULT_RIDGE

    @property
    def n_pairs(self) -> int:
        return self.correlations.shape[0]


def _sym_power(c: np.ndarray, power: float) -> np.ndarray:
    """``c**power`` for symmetric PSD ``c``; null directions are dropped."""
    s, v = np.linalg.eigh(c)
    top = s.max() if s.size else 0.0
    ok = s > _PINV_FLOOR * top if top > 0 else np.zeros_like(s, dtype=bool)
    scaled = np.zeros_like(s)
    scaled[ok] = s[ok] ** power
    return (v * scaled) @ v.T


def covariances(X: np.ndarray, Y: np.ndarray, ridge: float = 0.0):
    """Centred ``(Cxx, Cyy, Cxy)`` with 1/N normalisation and relative ridge."""
    n = X.shape[0]
    cx = X - X.mean(axis=0)
    cy = Y - Y.mean(axis=0)
    cxx = cx.T @ cx / n
    cyy = cy.T @ cy / n
    cxy = cx.T @ cy / n
    if ridge:
        cxx = cxx + ridge * np.trace(cxx) / cxx.shape[0] * np.eye(cxx.shape[0])
        cyy = cyy + ridge * np.trace(cyy) / cyy.shape[0] * np.eye(cyy.shape[0])
    return cxx, cyy, cxy


def cca_fit(X, Y, ridge: float = DEFAULT_RIDGE,
            max_pairs: Optional[int] = None) -> CcaModel:
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2:
        raise ValueError("X and Y must be 2-D (samples x features)")
    n = X.shape[0]
    if Y.shape[0] != n:
        raise ValueError(f"X has {n} samples but Y has {Y.shape[0]}")
    if n < 3:
        raise ValueError(f"CCA needs at least 3 samples, got {n}")
    n1, n2 = X.shape[1], Y.shape[1]
    if n1 > n - 1 or n2 > n - 1:
        raise ValueError(
            f"feature dims ({n1}, {n2}) must not exceed N-1 = {n - 1}")
    if n1 == 0 or n2 == 0:
        raise ValueError("both views need at least one feature")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise CcaDataError("CCA input contains non-finite values")
    if ridge < 0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")

    mean_x, mean_y = X.mean(axis=0), Y.mean(axis=0)
    cxx, cyy, cxy = covariances(X, Y, ridge)
    wx = _sym_power(cxx, -0.5)
    cyy_inv = _sym_power(cyy, -1.0)
    m = wx @ cxy @ cyy_inv @ cxy.T @ wx
    m = (m + m.T) / 2
    r2, p = np.linalg.eigh(m)
    order = np.argsort(r2)[::-1]
    r2, p = r2[order], p[:, order]
    rho = np.sqrt(np.clip(r2, 0.0, None))

    k = int(np.sum(rho > RHO_FLOOR))
    k = min(k, n1, n2)
    if max_pairs is not None:
        k = min(k, max_pairs)
    rho, p = rho[:k], p[:, :k]

    a = wx @ p
    b = cyy_inv @ cxy.T @ a / rho
    cx, cy = X - mean_x, Y - mean_y
    a = a / np.sqrt(np.mean((cx @ a) ** 2, axis=0))
    b = b / np.sqrt(np.mean((cy @ b) ** 2, axis=0))

    if k:
        pivot = np.argmax(np.abs(a), axis=0)
        signs = np.sign(a[pivot, np.arange(k)])
        signs[signs == 0] = 1.0
        a, b = a * signs, b * signs
    return CcaModel(mean_x, mean_y, a, b, rho, float(ridge))


def _variates(model: CcaModel, x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[-1] != model.mean_x.shape[0] or y.shape[-1] != model.mean_y.shape[0]:
        raise ValueError(
            f"expected lengths ({model.mean_x.shape[0]}, {model.mean_y.shape[0]}), "
            f"got ({x.shape[-1]}, {y.shape[-1]})")
    return (x - model.mean_x) @ model.basis_a, (y - model.mean_y) @ model.basis_b


def fuse_ffo1(model: CcaModel, x, y) -> np.ndarray:
    """Concatenated canonical variates ``[A^T x_c ; B^T y_c]`` (length 2k)."""
    u, v = _variates(model, x, y)
    return np.concatenate([u, v], axis=-1)


def fuse_ffo2(model: CcaModel, x, y) -> np.ndarray:
    """Summed canonical variates ``A^T x_c + B^T y_c`` (length k)."""
    u, v = _variates(model, x, y)
    return u + v


def fuse(model: CcaModel, x, y, mode: str = FFO2) -> np.ndarray:
    if mode == FFO1:
        return fuse_ffo1(model, x, y)
    if mode == FFO2:
        return fuse_ffo2(model, x, y)
    raise ValueError(f"unknown fusion mode {mode!r}; expected one of {FUSION_MODES}")
