"""Training objectives over a minibatch and a transformation set.

Every ``M``-view objective feeds all ``B * M`` transformed samples through the
backbone in one pass. Averaging over those ``B * M`` rows equals the
``(1/M) * sum_j`` of per-transformation batch means because every
transformation contributes exactly ``B`` rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from sla_lab.domain.data import Batch
from sla_lab.domain.errors import ContractViolation, DimensionError
from sla_lab.domain.model import (
    ObjectiveKind,
    ObjectiveSpec,
    SlaModel,
    flat_joint_logits,
    head_logits,
)
from sla_lab.domain.tensor import Parameter, Tensor, cross_entropy, kl_divergence, softmax
from sla_lab.domain.transforms import ExpandedBatch, TransformationSet, expand_batch


@dataclass
class LossBreakdown:
    """Differentiable total plus unweighted component values.

    ``total == classification + self_supervision + distillation_kl
    + beta * distillation_ce`` with absent terms counting as zero.
    """

    total: Tensor
    classification: float
    self_supervision: Optional[float] = None
    distillation_kl: Optional[float] = None
    distillation_ce: Optional[float] = None
    beta: Optional[int] = None

    @property
    def value(self) -> float:
        return self.total.item()

    def weighted_sum(self) -> float:
        return (
            self.classification
            + (self.self_supervision or 0.0)
            + (self.distillation_kl or 0.0)
            + (self.beta or 0) * (self.distillation_ce or 0.0)
        )

    def components(self) -> Dict[str, Optional[float]]:
        return {
            "loss_total": self.value,
            "loss_cls": self.classification,
            "loss_ss": self.self_supervision,
            "loss_kl": self.distillation_kl,
            "loss_ce_u": self.distillation_ce,
        }


def _require(param: Optional[Parameter], what: str, name: str) -> Parameter:
    if param is None:
        raise ContractViolation(f"{what} needs head {name}, which this model does not have")
    return param


def _forward_views(model: SlaModel, batch: Batch, tset: TransformationSet) -> Tuple[ExpandedBatch, Tensor]:
    if tset.size != model.n_transforms and (model.joint is not None or model.v is not None):
        raise DimensionError(f"model was built for M={model.n_transforms}, transformation set has M={tset.size}")
    expanded = expand_batch(batch.images, batch.labels, tset, model.n_classes)
    return expanded, model.embed(expanded.images)


def identity_rows(n_originals: int, n_transforms: int) -> np.ndarray:
    """Positions of the untransformed samples in an expanded batch."""
    return np.arange(n_originals, dtype=np.int64) * n_transforms


def aggregate_from_joint(flat_joint: Tensor, n_originals: int, n_classes: int, n_transforms: int) -> Tensor:
    """``s_i = (1/M) * sum_j w_ij . z_j`` from expanded-batch joint logits.

    ``flat_joint`` is ``[B*M, N*M]`` in input-major order; the result is ``[B, N]``.
    Terms are summed left to right over ``j``.
    """
    total: Optional[Tensor] = None
    for j in range(n_transforms):
        rows = identity_rows(n_originals, n_transforms) + j
        cols = np.arange(n_classes, dtype=np.int64) * n_transforms + j
        term = flat_joint.take(rows, axis=0).take(cols, axis=1)
        total = term if total is None else total + term
    return total * (1.0 / n_transforms)


# ---------------------------------------------------------------------- #
# Objectives                                                             #
# ---------------------------------------------------------------------- #
def loss_baseline(model: SlaModel, batch: Batch) -> LossBreakdown:
    """Plain cross-entropy on untransformed images with head ``u``."""
    u = _require(model.u, "the baseline objective", "u")
    logits = head_logits(u, model.embed(batch.images))
    cls = cross_entropy(logits, batch.labels)
    return LossBreakdown(total=cls, classification=cls.item())


def loss_da(model: SlaModel, batch: Batch, tset: TransformationSet) -> LossBreakdown:
    """Label-preserving augmentation: every view keeps label ``y``."""
    u = _require(model.u, "the augmentation objective", "u")
    expanded, z = _forward_views(model, batch, tset)
    cls = cross_entropy(head_logits(u, z), expanded.labels)
    return LossBreakdown(total=cls, classification=cls.item())


def loss_mt(model: SlaModel, batch: Batch, tset: TransformationSet) -> LossBreakdown:
    """Class head ``u`` plus a separate transformation head ``v`` on shared features."""
    u = _require(model.u, "the multi-task objective", "u")
    v = _require(model.v, "the multi-task objective", "v")
    expanded, z = _forward_views(model, batch, tset)
    cls = cross_entropy(head_logits(u, z), expanded.labels)
    ss = cross_entropy(head_logits(v, z), expanded.transform_index)
    return LossBreakdown(total=cls + ss, classification=cls.item(), self_supervision=ss.item())


def loss_sla(model: SlaModel, batch: Batch, tset: TransformationSet) -> LossBreakdown:
    """Cross-entropy over all ``N*M`` joint labels ``y*M + j``."""
    if model.joint is None:
        raise ContractViolation("the joint-label objective needs a joint head")
    expanded, z = _forward_views(model, batch, tset)
    cls = cross_entropy(flat_joint_logits(model.joint, z), expanded.joint_labels)
    return LossBreakdown(total=cls, classification=cls.item())


def loss_sla_sd(
    model: SlaModel,
    batch: Batch,
    tset: TransformationSet,
    beta: int,
    *,
    teacher_probs: Optional[np.ndarray] = None,
) -> LossBreakdown:
    """Joint-label loss plus distillation of the aggregated prediction into ``u``.

    The aggregated distribution is computed from the same ``B*M`` forwards as
    the joint loss and enters as a constant; ``z`` for head ``u`` is the
    identity view's embedding, so the step costs ``M`` forwards per image.
    ``teacher_probs`` pins the target distribution (finite-difference checks).
    """
    if beta not in (0, 1):
        raise ContractViolation(f"beta must be 0 or 1, got {beta}")
    if model.joint is None:
        raise ContractViolation("self-distillation needs a joint head")
    u = _require(model.u, "self-distillation", "u")

    expanded, z = _forward_views(model, batch, tset)
    flat = flat_joint_logits(model.joint, z)
    sla = cross_entropy(flat, expanded.joint_labels)

    n_orig, m = expanded.n_originals, expanded.n_transforms
    if teacher_probs is None:
        teacher_probs = softmax(aggregate_from_joint(flat.detach(), n_orig, model.n_classes, m))
    student = head_logits(u, z.take(identity_rows(n_orig, m), axis=0))
    kl = kl_divergence(teacher_probs, student)
    ce = cross_entropy(student, batch.labels)

    total = sla + kl + ce * float(beta)
    return LossBreakdown(
        total=total,
        classification=sla.item(),
        distillation_kl=kl.item(),
        distillation_ce=ce.item(),
        beta=beta,
    )


def compute_loss(objective: ObjectiveSpec, model: SlaModel, batch: Batch, tset: TransformationSet) -> LossBreakdown:
    kind = objective.kind
    if kind == ObjectiveKind.BASELINE:
        return loss_baseline(model, batch)
    if kind == ObjectiveKind.DA:
        return loss_da(model, batch, tset)
    if kind == ObjectiveKind.MT:
        return loss_mt(model, batch, tset)
    if kind == ObjectiveKind.SLA:
        return loss_sla(model, batch, tset)
    if kind == ObjectiveKind.SLA_SD:
        return loss_sla_sd(model, batch, tset, objective.beta)
    raise ContractViolation(f"unknown objective {kind!r}")
