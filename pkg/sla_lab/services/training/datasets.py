"""Resolve a ``DatasetSpec`` to concrete train / test datasets."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Tuple

from sla_lab.domain.data import Dataset, SubsampleSpec, select_classes, subsample_per_class, synthetic_two_class
from sla_lab.domain.errors import ConfigError
from sla_lab.infrastructure.idx import load_mnist_idx
from sla_lab.services.training.schemas import DatasetName, DatasetSpec

logger = logging.getLogger(__name__)


def _resolve(data_dir: Path, name: str) -> Path:
    path = Path(name)
    if not path.is_absolute():
        path = data_dir / path
    if path.exists():
        return path
    gz = path.with_name(path.name + ".gz")
    if gz.exists():
        return gz
    raise ConfigError(f"dataset file {path} not found (also tried {gz.name}); set SLA_DATA_DIR")


def load_named(spec: DatasetSpec, data_dir: Path) -> Tuple[Dataset, Dataset]:
    """Train and test splits after class filtering; only the train split is subsampled."""
    if spec.name == DatasetName.SYNTHETIC:
        s = spec.synthetic
        # one generator call keeps train and test on the same hyperplane
        full = synthetic_two_class(s.dim, s.margin, s.train_count + s.test_count, s.seed, noise=s.noise)
        train = full.subset(range(s.train_count), name=f"{full.name}/train")
        test = full.subset(range(s.train_count, s.train_count + s.test_count), name=f"{full.name}/test")
    else:
        data_dir = Path(data_dir)
        train = load_mnist_idx(
            _resolve(data_dir, spec.train_images), _resolve(data_dir, spec.train_labels), name="mnist-train"
        )
        test = load_mnist_idx(
            _resolve(data_dir, spec.test_images), _resolve(data_dir, spec.test_labels), name="mnist-test"
        )

    if spec.classes is not None:
        train = select_classes(train, spec.classes)
        test = select_classes(test, spec.classes)
    if spec.per_class is not None:
        train = subsample_per_class(train, SubsampleSpec(per_class=spec.per_class, seed=spec.subsample_seed))
    logger.info(f"[data] train={train.name} ({len(train)}), test={test.name} ({len(test)}), N={train.n_classes}")
    return train, test
