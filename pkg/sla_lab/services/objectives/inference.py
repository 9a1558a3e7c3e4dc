"""Inference modes: single (SI), aggregated (AG), self-distilled (SD), ensembles.

All functions return pre-softmax logits; predictions take the arg-max with ties
going to the lowest class index (``np.argmax`` semantics).
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from sla_lab.domain.errors import ConsistencyError, ContractViolation, ModeError
from sla_lab.domain.model import InferenceMode, SlaModel, conditional_logits, flat_joint_logits, head_logits
from sla_lab.domain.tensor import Tensor, no_grad
from sla_lab.domain.transforms import TransformationSet, expand_batch
from sla_lab.services.objectives.service import aggregate_from_joint


def _as_batch(images: np.ndarray) -> tuple:
    single = images.ndim == 3
    return (images[None] if single else images), single


def single_logits(model: SlaModel, images: np.ndarray) -> Tensor:
    """Untransformed input only: column ``j = 0`` of the joint head, else head ``u``."""
    if model.joint is not None:
        return conditional_logits(model.joint, model.embed(images), 0)
    if model.u is None:
        raise ModeError("model has neither a joint head nor head u")
    return head_logits(model.u, model.embed(images))


def sd_logits(model: SlaModel, images: np.ndarray) -> Tensor:
    """Head ``u`` on the untransformed embedding: one forward per image."""
    if model.u is None or model.joint is None:
        raise ModeError("self-distilled inference needs both a joint head and head u")
    return head_logits(model.u, model.embed(images))


def aggregate_logits(model: SlaModel, images: np.ndarray, tset: TransformationSet) -> Tensor:
    """``s_i = (1/M) * sum_j w_ij . f(t_j(x))`` for one image (``[N]``) or a batch (``[B, N]``)."""
    if model.joint is None:
        raise ModeError("aggregated inference needs a joint head")
    batch, single = _as_batch(images)
    if tset.size != model.n_transforms:
        raise ContractViolation(
            f"aggregation over M={tset.size} transformations does not fit a model built for M={model.n_transforms}"
        )
    expanded = expand_batch(batch, np.zeros(batch.shape[0], dtype=np.int64), tset, model.n_classes)
    flat = flat_joint_logits(model.joint, model.embed(expanded.images))
    s = aggregate_from_joint(flat, batch.shape[0], model.n_classes, tset.size)
    return s.reshape(model.n_classes) if single else s


def aggregate_logits_truncated(model: SlaModel, images: np.ndarray, tset: TransformationSet, m: int) -> Tensor:
    """Aggregate over the first ``m`` transformations only (``m = 1`` reproduces SI)."""
    if model.joint is None:
        raise ModeError("aggregated inference needs a joint head")
    batch, single = _as_batch(images)
    sub = tset.truncated(m)
    expanded = expand_batch(batch, np.zeros(batch.shape[0], dtype=np.int64), sub, model.n_classes)
    flat = flat_joint_logits(model.joint, model.embed(expanded.images))
    total: Optional[Tensor] = None
    for j in range(m):
        rows = np.arange(batch.shape[0], dtype=np.int64) * m + j
        cols = [i * model.n_transforms + j for i in range(model.n_classes)]
        term = flat.take(rows, axis=0).take(cols, axis=1)
        total = term if total is None else total + term
    s = total * (1.0 / m)
    return s.reshape(model.n_classes) if single else s


def mode_logits(
    model: SlaModel,
    images: np.ndarray,
    mode: InferenceMode,
    tset: Optional[TransformationSet] = None,
) -> np.ndarray:
    with no_grad():
        if mode == InferenceMode.SI:
            return single_logits(model, images).data
        if mode == InferenceMode.SD:
            return sd_logits(model, images).data
        if mode == InferenceMode.AG:
            if tset is None:
                raise ModeError("aggregated inference needs the transformation set")
            return aggregate_logits(model, images, tset).data
    raise ModeError(f"unknown inference mode {mode!r}")


def ensemble_logits(
    models: Sequence[SlaModel],
    images: np.ndarray,
    *,
    tset: Optional[TransformationSet] = None,
    aggregate: bool = False,
) -> np.ndarray:
    """Element-wise mean of the members' logits.

    Members contribute single-inference logits, or aggregated logits when
    ``aggregate`` is set (independent ensemble of SLA+AG members).
    """
    if not models:
        raise ContractViolation("an ensemble needs at least one member")
    classes = {m.n_classes for m in models}
    if len(classes) != 1:
        raise ConsistencyError(f"ensemble members disagree on the number of classes: {sorted(classes)}")
    mode = InferenceMode.AG if aggregate else InferenceMode.SI
    total: Optional[np.ndarray] = None
    for member in models:
        logits = mode_logits(member, images, mode, tset)
        total = logits.copy() if total is None else total + logits
    return total / len(models)


def predict(logits: np.ndarray) -> np.ndarray:
    return np.argmax(logits, axis=-1)
