"""Batch expansion into joint labels ``y * M + j``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from sla_lab.domain.errors import DimensionError, LabelIndexError
from sla_lab.domain.transforms.entities import TransformationSet, transform_batch


@dataclass(frozen=True)
class ExpandedBatch:
    """``B*M`` samples ordered input-major, then by transformation index."""

    images: np.ndarray
    labels: np.ndarray
    transform_index: np.ndarray
    joint_labels: np.ndarray
    n_originals: int
    n_transforms: int


def joint_label(label: int, j: int, n_transforms: int) -> int:
    return label * n_transforms + j


def split_joint_label(joint: int, n_transforms: int) -> Tuple[int, int]:
    return divmod(joint, n_transforms)


def expand_batch(images: np.ndarray, labels: np.ndarray, tset: TransformationSet, n_classes: int) -> ExpandedBatch:
    labels = np.asarray(labels, dtype=np.int64)
    if images.ndim != 4 or labels.shape != (images.shape[0],):
        raise DimensionError(f"images {images.shape} and labels {labels.shape} do not form a batch")
    bad = np.flatnonzero((labels < 0) | (labels >= n_classes))
    if bad.size:
        row = int(bad[0])
        raise LabelIndexError(f"label {int(labels[row])} at row {row} is outside [0, {n_classes})")

    m = tset.size
    views = np.stack([transform_batch(images, t) for t in tset], axis=1)
    expanded = views.reshape((images.shape[0] * m,) + views.shape[2:])
    j = np.tile(np.arange(m, dtype=np.int64), images.shape[0])
    y = np.repeat(labels, m)
    return ExpandedBatch(
        images=expanded,
        labels=y,
        transform_index=j,
        joint_labels=y * m + j,
        n_originals=images.shape[0],
        n_transforms=m,
    )
