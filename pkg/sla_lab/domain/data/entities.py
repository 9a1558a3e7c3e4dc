from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveInt

from sla_lab.domain.errors import ConsistencyError, DimensionError, LabelIndexError


@dataclass(frozen=True)
class Dataset:
    """Images ``[n, H, W, C]`` scaled to ``[0, 1]`` with labels in ``[0, n_classes)``."""

    name: str
    images: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self) -> None:
        # own the arrays; freezing them must not touch the caller's
        object.__setattr__(self, "images", np.array(self.images, copy=True))
        object.__setattr__(self, "labels", np.array(self.labels, copy=True))
        if self.images.ndim != 4:
            raise DimensionError(f"dataset {self.name}: images must be n x H x W x C, got {self.images.shape}")
        if self.labels.shape != (self.images.shape[0],):
            raise ConsistencyError(
                f"dataset {self.name}: {self.images.shape[0]} images but labels of shape {self.labels.shape}"
            )
        bad = np.flatnonzero((self.labels < 0) | (self.labels >= self.n_classes))
        if bad.size:
            row = int(bad[0])
            raise LabelIndexError(
                f"dataset {self.name}: label {int(self.labels[row])} at row {row} outside [0, {self.n_classes})"
            )
        self.images.setflags(write=False)
        self.labels.setflags(write=False)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def image_shape(self) -> tuple:
        return tuple(self.images.shape[1:])

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, indices: np.ndarray, name: str | None = None) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            name=name or self.name,
            images=self.images[indices],
            labels=self.labels[indices],
            n_classes=self.n_classes,
        )


@dataclass(frozen=True)
class Batch:
    """A minibatch of original (untransformed) images."""

    images: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return int(self.labels.shape[0])


class SubsampleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    per_class: PositiveInt
    seed: int = 0
