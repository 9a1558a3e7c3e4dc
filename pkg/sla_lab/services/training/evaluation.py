"""Top-1 accuracy of a model under each requested inference mode."""

from __future__ import annotations

import logging
from typing import Dict, Iterable, Optional

import numpy as np

from sla_lab.domain.data import Dataset
from sla_lab.domain.errors import ModeError
from sla_lab.domain.model import InferenceMode, SlaModel
from sla_lab.domain.transforms import TransformationSet
from sla_lab.services.objectives import mode_logits, predict

logger = logging.getLogger(__name__)


def supported_modes(model: SlaModel) -> tuple:
    modes = []
    if model.joint is not None or model.u is not None:
        modes.append(InferenceMode.SI)
    if model.joint is not None:
        modes.append(InferenceMode.AG)
        if model.u is not None:
            modes.append(InferenceMode.SD)
    return tuple(modes)


def check_modes(model: SlaModel, modes: Iterable[InferenceMode]) -> list:
    modes = [InferenceMode(m) for m in modes]
    available = supported_modes(model)
    unsupported = [m.value for m in modes if m not in available]
    if unsupported:
        raise ModeError(
            f"model supports {[m.value for m in available]}, cannot evaluate {unsupported}"
        )
    return modes


def chunked_logits(
    model: SlaModel,
    images: np.ndarray,
    mode: InferenceMode,
    tset: Optional[TransformationSet],
    chunk: int = 500,
) -> np.ndarray:
    parts = [mode_logits(model, images[s : s + chunk], mode, tset) for s in range(0, images.shape[0], chunk)]
    if not parts:
        return np.zeros((0, model.n_classes))
    return np.concatenate(parts, axis=0)


def accuracy(logits: np.ndarray, labels: np.ndarray) -> float:
    if labels.shape[0] == 0:
        return 0.0
    return float(np.mean(predict(logits) == labels))


def evaluate(
    model: SlaModel,
    dataset: Dataset,
    tset: Optional[TransformationSet],
    modes: Iterable[InferenceMode],
    *,
    chunk: int = 500,
) -> Dict[InferenceMode, float]:
    modes = check_modes(model, modes)
    results: Dict[InferenceMode, float] = {}
    for mode in modes:
        logits = chunked_logits(model, np.asarray(dataset.images), mode, tset, chunk)
        results[mode] = accuracy(logits, np.asarray(dataset.labels))
    logger.debug(f"[eval] {dataset.name}: " + ", ".join(f"{m.value}={a:.4f}" for m, a in results.items()))
    return results
