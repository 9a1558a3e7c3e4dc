"""Objective comparison over seeds and training-set sizes."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from sla_lab.config import settings
from sla_lab.domain.data import Dataset, SubsampleSpec, subsample_per_class
from sla_lab.domain.model import ObjectiveKind, ObjectiveSpec
from sla_lab.services.training import TrainConfig, TrainingService, TransformSetKind, TransformSpec, load_named

logger = logging.getLogger(__name__)

COMPARE_HEADER = ["per_class", "objective", "mode", "mean_accuracy", "seeds"]


@dataclass
class CompareCell:
    per_class: Optional[int]
    objective: ObjectiveKind
    mode: str
    accuracies: List[float] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    def as_row(self) -> list:
        return [
            "" if self.per_class is None else self.per_class,
            self.objective.value,
            self.mode,
            self.mean,
            len(self.accuracies),
        ]


def objective_config(base: TrainConfig, kind: ObjectiveKind, seed: int) -> TrainConfig:
    """``base`` retargeted to ``kind``; the baseline always trains on untransformed images."""
    transforms = TransformSpec(kind=TransformSetKind.IDENTITY) if kind == ObjectiveKind.BASELINE else base.transforms
    return TrainConfig.model_validate(
        {
            **base.model_dump(),
            "objective": ObjectiveSpec(kind=kind, beta=base.objective.beta).model_dump(),
            "transforms": transforms.model_dump(),
            "seed": seed,
        }
    )


def compare(
    base: TrainConfig,
    objectives: Sequence[ObjectiveKind] = tuple(ObjectiveKind),
    seeds: Iterable[int] = (0, 1, 2),
    *,
    per_class: Optional[Sequence[int]] = None,
    datasets: Optional[Tuple[Dataset, Dataset]] = None,
) -> List[CompareCell]:
    """Mean final test accuracy per (subsample size, objective, inference mode).

    ``per_class`` overrides the config's subsample size; each size draws its
    subset once with the config's subsample seed so every objective sees the
    same examples.
    """
    seeds = list(seeds)
    if datasets is None:
        spec = base.dataset.model_copy(update={"per_class": None})
        datasets = load_named(spec, settings().data_dir)
    full_train, test = datasets
    sizes: List[Optional[int]] = list(per_class) if per_class else [base.dataset.per_class]

    service = TrainingService()
    cells: Dict[Tuple[Optional[int], ObjectiveKind, str], CompareCell] = {}
    for n in sizes:
        train = full_train if n is None else subsample_per_class(
            full_train, SubsampleSpec(per_class=n, seed=base.dataset.subsample_seed)
        )
        for kind in objectives:
            for seed in seeds:
                cfg = objective_config(base, ObjectiveKind(kind), seed)
                result = service.run(cfg, datasets=(train, test))
                for mode, acc in result.final.accuracies.items():
                    key = (n, cfg.objective.kind, mode)
                    cells.setdefault(key, CompareCell(n, cfg.objective.kind, mode)).accuracies.append(acc)
            logger.info(
                f"[compare] n={n} {ObjectiveKind(kind).value}: "
                + " ".join(f"{c.mode}={c.mean:.4f}" for k, c in cells.items() if k[:2] == (n, ObjectiveKind(kind)))
            )
    return list(cells.values())
