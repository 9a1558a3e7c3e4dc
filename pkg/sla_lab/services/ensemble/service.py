"""Independent ensembles: K members that differ only in their seed."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from sla_lab.config import settings
from sla_lab.domain.data import Dataset
from sla_lab.domain.errors import ConsistencyError, ContractViolation, ModeError
from sla_lab.domain.model import InferenceMode
from sla_lab.infrastructure.memlog import stage
from sla_lab.services.objectives import ensemble_logits
from sla_lab.services.training import TrainConfig, TrainingResult, TrainingService, evaluate, load_named
from sla_lab.services.training.evaluation import accuracy

logger = logging.getLogger(__name__)


@dataclass
class EnsembleResult:
    seeds: List[int]
    member_accuracies: List[float]
    ensemble_accuracy: float
    member_ag_accuracies: Optional[List[float]] = None
    ensemble_ag_accuracy: Optional[float] = None
    members: List[TrainingResult] = field(default_factory=list, repr=False)

    @property
    def mean_member_accuracy(self) -> float:
        return float(np.mean(self.member_accuracies))


def seeded_configs(cfg: TrainConfig, k: int) -> List[TrainConfig]:
    if k < 1:
        raise ContractViolation(f"an ensemble needs k >= 1 members, got {k}")
    return [cfg.with_seed(cfg.seed + i) for i in range(k)]


def _check_homogeneous(cfgs: Sequence[TrainConfig]) -> None:
    if not cfgs:
        raise ContractViolation("an ensemble needs at least one config")
    ref = cfgs[0].model_dump(mode="json", exclude={"seed"})
    for i, c in enumerate(cfgs[1:], start=1):
        if c.model_dump(mode="json", exclude={"seed"}) != ref:
            raise ConsistencyError(f"ensemble config {i} differs from config 0 in more than its seed")


def _batched(models, images: np.ndarray, tset, aggregate: bool, chunk: int) -> np.ndarray:
    parts = [
        ensemble_logits(models, images[s : s + chunk], tset=tset, aggregate=aggregate)
        for s in range(0, images.shape[0], chunk)
    ]
    if not parts:
        return np.zeros((0, models[0].n_classes))
    return np.concatenate(parts, axis=0)


def run_ensemble(
    cfgs: Sequence[TrainConfig],
    *,
    aggregate: bool = False,
    datasets: Optional[Tuple[Dataset, Dataset]] = None,
    out_dir: Optional[Path] = None,
    workers: Optional[int] = None,
) -> EnsembleResult:
    """Train every member, then score each alone and the logit-averaged ensemble.

    Members train on up to ``workers`` threads; their models are disjoint so
    the result does not depend on scheduling.
    """
    _check_homogeneous(cfgs)
    cfg0 = cfgs[0]
    if aggregate and cfg0.objective.kind.value not in ("sla", "sla_sd"):
        raise ModeError(f"aggregated ensembles need joint-label members, objective is {cfg0.objective.kind.value}")

    with stage("ensemble-load"):
        train, test = datasets if datasets is not None else load_named(cfg0.dataset, settings().data_dir)
    workers = workers or settings().workers
    service = TrainingService()

    def train_member(i: int) -> TrainingResult:
        member_dir = None if out_dir is None else Path(out_dir) / f"member-{i}"
        logger.info(f"[ensemble] member {i + 1}/{len(cfgs)} seed={cfgs[i].seed}")
        return service.run(cfgs[i], out_dir=member_dir, datasets=(train, test))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        members = list(pool.map(train_member, range(len(cfgs))))

    models = [m.model for m in members]
    tset = members[0].tset
    images, labels = np.asarray(test.images), np.asarray(test.labels)
    chunk = cfg0.eval_batch_size

    result = EnsembleResult(
        seeds=[c.seed for c in cfgs],
        member_accuracies=[evaluate(m, test, tset, [InferenceMode.SI], chunk=chunk)[InferenceMode.SI] for m in models],
        ensemble_accuracy=accuracy(_batched(models, images, tset, False, chunk), labels),
        members=members,
    )
    if aggregate:
        result.member_ag_accuracies = [
            evaluate(m, test, tset, [InferenceMode.AG], chunk=chunk)[InferenceMode.AG] for m in models
        ]
        result.ensemble_ag_accuracy = accuracy(_batched(models, images, tset, True, chunk), labels)
    logger.info(
        f"[ensemble] K={len(models)} members={[round(a, 4) for a in result.member_accuracies]} "
        f"IE={result.ensemble_accuracy:.4f}"
        + ("" if result.ensemble_ag_accuracy is None else f" IE+AG={result.ensemble_ag_accuracy:.4f}")
    )
    return result
