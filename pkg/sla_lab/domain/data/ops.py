"""Pure dataset views: class filters, balanced subsamples, synthetic data."""

from __future__ import annotations

import logging
import math
from typing import Sequence, Tuple

import numpy as np

from sla_lab.domain.data.entities import Dataset, SubsampleSpec
from sla_lab.domain.errors import ConfigError, ContractViolation

logger = logging.getLogger(__name__)


def select_classes(ds: Dataset, classes: Sequence[int]) -> Dataset:
    """Keep the listed classes, relabelled ``0..len(classes)-1`` in the given order."""
    classes = [int(c) for c in classes]
    if not classes:
        raise ConfigError(f"dataset {ds.name}: empty class selection")
    if len(set(classes)) != len(classes):
        raise ConfigError(f"dataset {ds.name}: duplicate classes in {classes}")
    present = set(np.unique(ds.labels).tolist())
    unknown = [c for c in classes if c not in present]
    if unknown:
        raise ConfigError(f"dataset {ds.name}: classes {unknown} not present")

    mapping = np.full(ds.n_classes, -1, dtype=np.int64)
    mapping[classes] = np.arange(len(classes))
    new_labels = mapping[ds.labels]
    keep = np.flatnonzero(new_labels >= 0)
    tag = "-".join(str(c) for c in classes)
    return Dataset(
        name=f"{ds.name}[{tag}]",
        images=ds.images[keep].copy(),
        labels=new_labels[keep],
        n_classes=len(classes),
    )


def subsample_per_class(ds: Dataset, spec: SubsampleSpec) -> Dataset:
    """Exactly ``spec.per_class`` examples of every class, chosen by a seeded shuffle.

    Selected examples keep their original relative order.
    """
    rng = np.random.default_rng(spec.seed)
    chosen = []
    counts = ds.class_counts()
    for c in range(ds.n_classes):
        if counts[c] < spec.per_class:
            raise ContractViolation(
                f"dataset {ds.name}: class {c} has {counts[c]} examples, {spec.per_class} requested"
            )
        members = np.flatnonzero(ds.labels == c)
        chosen.append(rng.permutation(members)[: spec.per_class])
    indices = np.sort(np.concatenate(chosen)) if chosen else np.zeros(0, dtype=np.int64)
    logger.debug(f"[data] {ds.name}: {spec.per_class} per class -> {indices.size} examples")
    return ds.subset(indices, name=f"{ds.name}/n{spec.per_class}")


def _synthetic_shape(dim: int) -> Tuple[int, int, int]:
    side = math.isqrt(dim)
    return (side, side, 1) if side * side == dim else (1, dim, 1)


def synthetic_two_class(dim: int, margin: float, count: int, seed: int, noise: float = 1.0) -> Dataset:
    """Two Gaussian clouds on either side of a random hyperplane through the origin.

    Every point sits at least ``margin / 2`` from the hyperplane, so a
    bias-free linear classifier separates the classes exactly. Images are
    ``s x s x 1`` when ``dim == s * s`` (so rotation sets apply) and
    ``1 x dim x 1`` otherwise.
    """
    if margin <= 0:
        raise ConfigError(f"margin must be positive, got {margin}")
    rng = np.random.default_rng(seed)
    normal = rng.standard_normal(dim)
    normal /= np.linalg.norm(normal)
    labels = rng.integers(0, 2, size=count)
    cloud = noise * rng.standard_normal((count, dim))
    cloud -= np.outer(cloud @ normal, normal)
    offset = margin / 2.0 + np.abs(noise * rng.standard_normal(count))
    sign = np.where(labels == 1, 1.0, -1.0)
    points = cloud + np.outer(sign * offset, normal)
    return Dataset(
        name=f"synthetic-d{dim}",
        images=points.reshape((count,) + _synthetic_shape(dim)),
        labels=labels.astype(np.int64),
        n_classes=2,
    )


def as_arrays(ds: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    """Writable ``float64`` images and ``int64`` labels for vectorised training."""
    return np.array(ds.images, dtype=np.float64), np.array(ds.labels, dtype=np.int64)
