"""Thresholded Euclidean nearest-neighbour identification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np


class EmptyGalleryError(RuntimeError):
    pass


class ThresholdError(ValueError):
    """No same-label pair to derive a threshold from."""


def compute_threshold(labels: Sequence[str], vectors) -> float:
    """Half the largest distance between two entries sharing a label."""
    Z = np.asarray(vectors, dtype=np.float64)
    labels = np.asarray(labels)
    diameter = None
    for lab in np.unique(labels):
        members = Z[labels == lab]
        if len(members) < 2:
            continue
        diff = members[:, None, :] - members[None, :, :]
        d = np.sqrt((diff ** 2).sum(axis=-1)).max()
        diameter = d if diameter is None else max(diameter, d)
    if diameter is None:
        raise ThresholdError("no label has two or more entries; cannot derive a threshold")
    return 0.5 * float(diameter)


@dataclass(frozen=True, eq=False)
class Gallery:
    labels: Tuple[str, ...]
    vectors: np.ndarray  # (entries, length)
    threshold: float = 0.0
    mode: str = "ffo2"

    def __post_init__(self):
        vec = np.atleast_2d(np.asarray(self.vectors, dtype=np.float64))
        object.__setattr__(self, "vectors", vec)
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        if len(self.labels) != vec.shape[0]:
            raise ValueError(
                f"{len(self.labels)} labels for {vec.shape[0]} gallery vectors")
        if self.threshold < 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")

    @classmethod
    def build(cls, labels, vectors, mode: str = "ffo2") -> "Gallery":
        """Gallery with its threshold computed from intra-class spread."""
        return cls(tuple(labels), vectors, compute_threshold(labels, vectors), mode)

    def __len__(self):
        return len(self.labels)

    def distances(self, probe) -> np.ndarray:
        if not self.labels:
            raise EmptyGalleryError("gallery is empty")
        z = np.asarray(probe, dtype=np.float64)
        if z.shape != (self.vectors.shape[1],):
            raise ValueError(
                f"probe length {z.shape} does not match gallery length {self.vectors.shape[1]}")
        return np.sqrt(((self.vectors - z) ** 2).sum(axis=1))


def nearest(gallery: Gallery, probe) -> Tuple[str, float]:
    """Closest entry; exact ties go to the lowest gallery index."""
    dist = gallery.distances(probe)
    i = int(np.argmin(dist))
    return gallery.labels[i], float(dist[i])


def identify(gallery: Gallery, probe) -> Optional[str]:
    """Nearest label if its distance is strictly below the threshold, else
    ``None`` (reject)."""
    label, dist = nearest(gallery, probe)
    return label if dist < gallery.threshold else None
