"""Labeled vector collections shared by every subsystem."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class VectorSet:
    """A finite list of d-dimensional real vectors with stable integer labels.

    Labels are global identities (row indices of the originating data) and
    survive subsetting, so spanner/core-set outputs can always be traced back
    to source rows.
    """

    vectors: np.ndarray
    labels: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=np.float64))
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("vector set has non-finite entries")
        if self.labels is None:
            self.labels = np.arange(len(self.vectors))
        else:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (len(self.vectors),):
                raise ValueError("labels must align with vectors")

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def subset(self, positions) -> "VectorSet":
        pos = np.asarray(positions, dtype=np.int64)
        return VectorSet(self.vectors[pos].copy(), self.labels[pos].copy())

    @staticmethod
    def concat(parts: list["VectorSet"]) -> "VectorSet":
        if not parts:
            raise ValueError("cannot concatenate zero vector sets")
        return VectorSet(
            np.vstack([p.vectors for p in parts]),
            np.concatenate([p.labels for p in parts]),
        )


def as_matrix(vs) -> np.ndarray:
    """Accept a VectorSet, an (n, d) array, or a sequence of vectors."""
    if isinstance(vs, VectorSet):
        return vs.vectors
    return np.atleast_2d(np.asarray(vs, dtype=np.float64))


def as_vector_set(vs) -> VectorSet:
    if isinstance(vs, VectorSet):
        return vs
    return VectorSet(as_matrix(vs))
