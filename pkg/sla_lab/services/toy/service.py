"""Linear classifiers on raw digit pixels, upright versus rotated.

Three settings on a two-digit task, all with a bias-free linear softmax over
flattened pixels:

* ``upright``: two classes, original images only.
* ``rotated_shared_label``: every image in all four rotations, each keeping
  its digit label. Scored on the rotation-expanded test set.
* ``rotated_sla``: the same rotated images with one label per (digit,
  rotation), eight classes in total. Scored with aggregated inference on
  upright test images; the joint arg-max error on the rotated test set is
  reported alongside.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from sla_lab.domain.data import Dataset, select_classes
from sla_lab.domain.errors import ConfigError
from sla_lab.domain.model import BackboneKind, InferenceMode, ObjectiveKind, ObjectiveSpec, flat_joint_logits
from sla_lab.domain.tensor import no_grad
from sla_lab.domain.transforms import expand_batch
from sla_lab.services.objectives import predict
from sla_lab.services.training import (
    BackboneSpec,
    TrainConfig,
    TrainingService,
    TransformSetKind,
    TransformSpec,
)
from sla_lab.services.training.evaluation import accuracy, chunked_logits

logger = logging.getLogger(__name__)

PAIRS: Tuple[Tuple[int, int], ...] = ((1, 9), (4, 9), (6, 9))
TOY_HEADER = ["pair", "mode", "test_error", "scored_on", "train_error", "joint_error", "iterations", "seed"]


class ToyMode(str, Enum):
    UPRIGHT = "upright"
    ROTATED_SHARED_LABEL = "rotated_shared_label"
    ROTATED_SLA = "rotated_sla"


_SETUP = {
    ToyMode.UPRIGHT: (ObjectiveKind.BASELINE, TransformSetKind.IDENTITY),
    ToyMode.ROTATED_SHARED_LABEL: (ObjectiveKind.DA, TransformSetKind.ROTATION),
    ToyMode.ROTATED_SLA: (ObjectiveKind.SLA, TransformSetKind.ROTATION),
}


@dataclass(frozen=True)
class ToyResult:
    pair: Tuple[int, int]
    mode: ToyMode
    test_error: float
    train_error: float
    joint_error: Optional[float] = None
    iterations: int = 0
    seed: int = 0

    @property
    def scored_on(self) -> str:
        """Test set behind ``test_error``; ``joint_error`` is always on rotated images."""
        return "rotated" if self.mode == ToyMode.ROTATED_SHARED_LABEL else "upright"

    def as_row(self) -> list:
        return [
            f"{self.pair[0]},{self.pair[1]}",
            self.mode.value,
            self.test_error,
            self.scored_on,
            self.train_error,
            self.joint_error,
            self.iterations,
            self.seed,
        ]


def parse_pair(text: str) -> Tuple[int, int]:
    try:
        a, b = (int(p) for p in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"digit pair must look like '6,9', got {text!r}") from exc
    check_pair((a, b))
    return a, b


def check_pair(pair: Sequence[int]) -> None:
    a, b = pair
    if a == b or not (0 <= a < 10 and 0 <= b < 10):
        raise ConfigError(f"digit pair needs two distinct digits in [0, 10), got {tuple(pair)}")


def toy_config(mode: ToyMode, iterations: int, seed: int, batch_size: int = 128) -> TrainConfig:
    objective, transforms = _SETUP[mode]
    return TrainConfig(
        backbone=BackboneSpec(kind=BackboneKind.IDENTITY),
        transforms=TransformSpec(kind=transforms),
        objective=ObjectiveSpec(kind=objective),
        total_iterations=iterations,
        batch_size=batch_size,
        eval_every=iterations,
        seed=seed,
        train_eval_limit=None,
    )


def _rotated_error(model, test: Dataset, tset, joint: bool) -> float:
    expanded = expand_batch(np.asarray(test.images), np.asarray(test.labels), tset, test.n_classes)
    if not joint:
        logits = chunked_logits(model, expanded.images, InferenceMode.SI, None)
        return 1.0 - accuracy(logits, expanded.labels)
    with no_grad():
        flat = np.concatenate(
            [
                flat_joint_logits(model.joint, model.embed(expanded.images[s : s + 500])).data
                for s in range(0, expanded.images.shape[0], 500)
            ]
        )
    predicted_class = predict(flat) // tset.size
    return float(np.mean(predicted_class != expanded.labels))


def toy_experiment(
    pair: Tuple[int, int],
    mode: ToyMode,
    train: Dataset,
    test: Dataset,
    *,
    iterations: int = 5_000,
    seed: int = 0,
) -> ToyResult:
    """Train one bias-free linear classifier on ``pair`` and report its test error."""
    check_pair(pair)
    mode = ToyMode(mode)
    train2, test2 = select_classes(train, pair), select_classes(test, pair)
    cfg = toy_config(mode, iterations, seed)
    run = TrainingService().run(cfg, datasets=(train2, test2))
    model, tset = run.model, run.tset
    train_error = 1.0 - run.final.acc_train

    joint_error = None
    if mode == ToyMode.UPRIGHT:
        test_error = 1.0 - run.final.accuracies[InferenceMode.SI.value]
    elif mode == ToyMode.ROTATED_SHARED_LABEL:
        test_error = _rotated_error(model, test2, tset, joint=False)
    else:
        logits = chunked_logits(model, np.asarray(test2.images), InferenceMode.AG, tset)
        test_error = 1.0 - accuracy(logits, np.asarray(test2.labels))
        joint_error = _rotated_error(model, test2, tset, joint=True)

    result = ToyResult(
        pair=tuple(pair),
        mode=mode,
        test_error=test_error,
        train_error=train_error,
        joint_error=joint_error,
        iterations=iterations,
        seed=seed,
    )
    logger.info(
        f"[toy] pair={pair} mode={mode.value} test_error={test_error:.4f} on {result.scored_on} "
        f"train_error={train_error:.4f}"
    )
    return result


def toy_sweep(
    train: Dataset,
    test: Dataset,
    *,
    pairs: Iterable[Tuple[int, int]] = PAIRS,
    modes: Iterable[ToyMode] = tuple(ToyMode),
    iterations: int = 5_000,
    seed: int = 0,
    on_result: Optional[Callable[[ToyResult], None]] = None,
) -> List[ToyResult]:
    """Every pair in every mode; ``on_result`` sees each result as it finishes."""
    modes = tuple(modes)
    results = []
    for pair in pairs:
        for mode in modes:
            result = toy_experiment(pair, mode, train, test, iterations=iterations, seed=seed)
            if on_result is not None:
                on_result(result)
            results.append(result)
    return results
