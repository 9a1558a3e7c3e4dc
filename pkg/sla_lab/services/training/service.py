"""Training loop: seeded minibatches, one objective, heavy-ball SGD.

The service only coordinates; losses live in ``services.objectives`` and file
formats behind the injected ``CheckpointStore`` / ``MetricsSink`` ports.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np

from sla_lab.config import settings
from sla_lab.domain.data import Batch, Dataset
from sla_lab.domain.errors import ConsistencyError, ContractViolation
from sla_lab.domain.model import SlaModel, build_model, heads_for, modes_for
from sla_lab.domain.ports import CheckpointStore, MetricsRow, MetricsSink
from sla_lab.domain.tensor import sgd_step
from sla_lab.domain.transforms import TransformationSet, expand_batch
from sla_lab.infrastructure.checkpoint import NpzCheckpointStore
from sla_lab.infrastructure.memlog import stage
from sla_lab.infrastructure.metrics import CsvMetricsWriter
from sla_lab.services.objectives import compute_loss
from sla_lab.services.training.datasets import load_named
from sla_lab.services.training.evaluation import accuracy, chunked_logits, evaluate
from sla_lab.services.training.schemas import TrainConfig

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
CHECKPOINT_FILE = "model.npz"
CONFIG_FILE = "config.json"


@dataclass
class TrainingResult:
    model: SlaModel
    tset: TransformationSet
    metrics: List[MetricsRow] = field(default_factory=list)
    test: Optional[Dataset] = None
    run_dir: Optional[Path] = None
    checkpoint: Optional[Path] = None

    @property
    def final(self) -> MetricsRow:
        return self.metrics[-1]


class MinibatchStream:
    """Indices drawn epoch by epoch from seeded permutations.

    A batch that crosses an epoch boundary is topped up from the next
    permutation, so every batch has exactly ``batch_size`` entries.
    """

    def __init__(self, n: int, batch_size: int, rng: np.random.Generator) -> None:
        if n == 0:
            raise ContractViolation("cannot draw minibatches from an empty dataset")
        self._n, self._batch, self._rng = n, batch_size, rng
        self._perm = rng.permutation(n)
        self._pos = 0

    def next(self) -> np.ndarray:
        out, need = [], self._batch
        while need:
            if self._pos == self._n:
                self._perm, self._pos = self._rng.permutation(self._n), 0
            take = min(need, self._n - self._pos)
            out.append(self._perm[self._pos : self._pos + take])
            self._pos += take
            need -= take
        return np.concatenate(out)


class TrainingService:
    def __init__(
        self,
        checkpoint_store: Optional[CheckpointStore] = None,
        sink_factory: Optional[Callable[[Path], MetricsSink]] = None,
    ) -> None:
        self._store = checkpoint_store or NpzCheckpointStore()
        self._sink_factory = sink_factory or (
            lambda path: CsvMetricsWriter(path, wall_time=settings().metrics_wall_time)
        )

    # ─────────────────────────────── setup ──────────────────────────────── #

    def build(self, cfg: TrainConfig, train: Dataset) -> Tuple[SlaModel, TransformationSet]:
        tset = cfg.transform_set()
        # fail on transform / image mismatches before any compute
        expand_batch(train.images[:1], train.labels[:1], tset, train.n_classes)
        model = build_model(
            input_shape=train.image_shape,
            backbone_kind=cfg.backbone.kind,
            sizes=cfg.backbone.sizes(),
            n_classes=train.n_classes,
            n_transforms=tset.size,
            heads=heads_for(cfg.objective.kind),
            seed=cfg.seed,
        )
        return model, tset

    # ─────────────────────────────── run ────────────────────────────────── #

    def run(
        self,
        cfg: TrainConfig,
        out_dir: Optional[Path] = None,
        datasets: Optional[Tuple[Dataset, Dataset]] = None,
    ) -> TrainingResult:
        with stage("load"):
            train, test = datasets if datasets is not None else load_named(cfg.dataset, settings().data_dir)
        if train.n_classes != test.n_classes:
            raise ConsistencyError(f"train has {train.n_classes} classes, test has {test.n_classes}")
        if len(train) == 0:
            raise ContractViolation(f"training set {train.name} is empty")
        model, tset = self.build(cfg, train)
        modes = modes_for(cfg.objective.kind)
        logger.info(
            f"[train] objective={cfg.objective.kind.value} M={tset.size} ({', '.join(tset.names())}) "
            f"N={model.n_classes} params={model.parameter_count()}"
        )

        sink: Optional[MetricsSink] = None
        if out_dir is not None:
            out_dir = Path(out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / CONFIG_FILE).write_text(
                json.dumps(cfg.model_dump(mode="json"), indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            sink = self._sink_factory(out_dir / METRICS_FILE)

        result = TrainingResult(model=model, tset=tset, test=test, run_dir=out_dir)
        stream = MinibatchStream(len(train), cfg.batch_size, np.random.default_rng([cfg.seed, 1]))
        train_images, train_labels = np.asarray(train.images), np.asarray(train.labels)
        train_eval = train if cfg.train_eval_limit is None else train.subset(
            np.arange(min(len(train), cfg.train_eval_limit))
        )
        params = model.parameters()
        total = cfg.total_iterations
        started = time.perf_counter()

        try:
            with stage("train", model):
                for it in range(total):
                    idx = stream.next()
                    batch = Batch(images=train_images[idx], labels=train_labels[idx])
                    breakdown = compute_loss(cfg.objective, model, batch, tset)
                    breakdown.total.backward()
                    lr = sgd_step(params, cfg.optimizer, it, total)

                    step = it + 1
                    if step % cfg.eval_every and step != total:
                        continue
                    train_acc = accuracy(
                        chunked_logits(model, np.asarray(train_eval.images), modes[0], tset, cfg.eval_batch_size),
                        np.asarray(train_eval.labels),
                    )
                    test_acc = evaluate(model, test, tset, modes, chunk=cfg.eval_batch_size)
                    comps = breakdown.components()
                    row = MetricsRow(
                        iteration=step,
                        learning_rate=lr,
                        loss_total=comps["loss_total"],
                        loss_cls=comps["loss_cls"],
                        loss_ss=comps["loss_ss"],
                        loss_kl=comps["loss_kl"],
                        loss_ce_u=comps["loss_ce_u"],
                        acc_train=train_acc,
                        accuracies={m.value: a for m, a in test_acc.items()},
                        wall_time_seconds=time.perf_counter() - started,
                    )
                    result.metrics.append(row)
                    if sink is not None:
                        sink.write(row)
                    logger.info(
                        f"[train] it={step}/{total} lr={lr:.4g} loss={row.loss_total:.4f} train={train_acc:.4f} "
                        + " ".join(f"{k}={v:.4f}" for k, v in row.accuracies.items())
                    )
        finally:
            if sink is not None:
                sink.close()

        if out_dir is not None:
            result.checkpoint = self._store.save(model, out_dir / CHECKPOINT_FILE)
        return result


def run_training(
    cfg: TrainConfig,
    out_dir: Optional[Path] = None,
    datasets: Optional[Tuple[Dataset, Dataset]] = None,
) -> TrainingResult:
    return TrainingService().run(cfg, out_dir=out_dir, datasets=datasets)
