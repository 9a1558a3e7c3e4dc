"""Identity checks tying the joint-label objective to its special cases.

With ``w_ij = u_i`` the joint softmax spreads each class evenly over its ``M``
transformations, so the joint loss equals the augmentation loss plus
``ln M``. With ``w_ij = u_i + v_j`` it factorises into the class and
transformation softmaxes and equals the multi-task loss exactly. Gradients
agree once the tied head's gradient is summed over the tied rows.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np

from sla_lab.domain.data import Batch
from sla_lab.domain.model import BackboneKind, SlaModel, build_model, flat_joint_logits
from sla_lab.domain.tensor import Tensor, no_grad, numerical_gradient, relative_error, softmax, zero_grad
from sla_lab.domain.transforms import TransformationSet, expand_batch, rotation_set
from sla_lab.services.objectives import (
    aggregate_from_joint,
    loss_baseline,
    loss_da,
    loss_mt,
    loss_sla,
    loss_sla_sd,
)

logger = logging.getLogger(__name__)

IMAGE_SHAPE = (2, 2, 2)
DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TinyProblem:
    model: SlaModel
    batch: Batch
    tset: TransformationSet


@dataclass
class ReductionReport:
    trials: int
    tolerance: float
    da_loss_deviation: float = 0.0
    mt_loss_deviation: float = 0.0
    da_grad_deviation: float = 0.0
    mt_grad_deviation: float = 0.0
    gradcheck: Dict[str, float] = field(default_factory=dict)

    @property
    def max_deviation(self) -> float:
        return max(self.da_loss_deviation, self.mt_loss_deviation, self.da_grad_deviation, self.mt_grad_deviation)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def tiny_problem(rng: np.random.Generator) -> TinyProblem:
    """Random model with all three heads: ``D <= 8``, ``N <= 3``, ``M <= 4``, batch ``<= 4``."""
    n = int(rng.integers(2, 4))
    m = int(rng.integers(1, 5))
    d = int(rng.integers(2, 9))
    b = int(rng.integers(1, 5))
    tset = rotation_set([0, 90, 180, 270][:m])
    model = build_model(
        input_shape=IMAGE_SHAPE,
        backbone_kind=BackboneKind.LINEAR,
        sizes=[d],
        n_classes=n,
        n_transforms=m,
        heads={"w", "u", "v"},
        seed=int(rng.integers(0, 2**31 - 1)),
    )
    batch = Batch(images=rng.standard_normal((b,) + IMAGE_SHAPE), labels=rng.integers(0, n, size=b))
    return TinyProblem(model, batch, tset)


def tie_to_shared_head(model: SlaModel) -> None:
    """``w_ij = u_i``."""
    model.joint.w.assign(np.repeat(model.u.tensor.data, model.n_transforms, axis=0))


def tie_to_multitask_heads(model: SlaModel) -> None:
    """``w_ij = u_i + v_j``."""
    u, v = model.u.tensor.data, model.v.tensor.data
    model.joint.w.assign((u[:, None, :] + v[None, :, :]).reshape(-1, u.shape[1]))


def _grads(model: SlaModel, loss: Tensor) -> Dict[str, np.ndarray]:
    zero_grad(model.parameters())
    loss.backward()
    out = {p.name: np.zeros(p.shape) if p.tensor.grad is None else p.tensor.grad.copy() for p in model.parameters()}
    zero_grad(model.parameters())
    return out


def _max_abs(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a - b).max(initial=0.0))


def check_problem(problem: TinyProblem) -> Dict[str, float]:
    model, batch, tset = problem.model, problem.batch, problem.tset
    n, m = model.n_classes, model.n_transforms
    backbone = [p.name for p in model.backbone.parameters()]
    dev: Dict[str, float] = {}

    tie_to_shared_head(model)
    sla = loss_sla(model, batch, tset).total
    da = loss_da(model, batch, tset).total
    dev["da_loss"] = abs(sla.item() - math.log(m) - da.item())
    g_sla, g_da = _grads(model, sla), _grads(model, da)
    tied_u = g_sla["head.w"].reshape(n, m, -1).sum(axis=1)
    dev["da_grad"] = max([_max_abs(g_sla[k], g_da[k]) for k in backbone] + [_max_abs(tied_u, g_da["head.u"])])

    tie_to_multitask_heads(model)
    sla = loss_sla(model, batch, tset).total
    mt = loss_mt(model, batch, tset).total
    dev["mt_loss"] = abs(sla.item() - mt.item())
    g_sla, g_mt = _grads(model, sla), _grads(model, mt)
    w = g_sla["head.w"].reshape(n, m, -1)
    dev["mt_grad"] = max(
        [_max_abs(g_sla[k], g_mt[k]) for k in backbone]
        + [_max_abs(w.sum(axis=1), g_mt["head.u"]), _max_abs(w.sum(axis=0), g_mt["head.v"])]
    )
    return dev


def loss_functions(problem: TinyProblem) -> Dict[str, Callable[[], Tensor]]:
    """Every objective as a closure; the distillation target is pinned for finite differences."""
    model, batch, tset = problem.model, problem.batch, problem.tset
    with no_grad():
        expanded = expand_batch(batch.images, batch.labels, tset, model.n_classes)
        flat = flat_joint_logits(model.joint, model.embed(expanded.images))
        teacher = softmax(aggregate_from_joint(flat, expanded.n_originals, model.n_classes, tset.size))
    return {
        "baseline": lambda: loss_baseline(model, batch).total,
        "da": lambda: loss_da(model, batch, tset).total,
        "mt": lambda: loss_mt(model, batch, tset).total,
        "sla": lambda: loss_sla(model, batch, tset).total,
        "sla_sd": lambda: loss_sla_sd(model, batch, tset, 1, teacher_probs=teacher).total,
    }


def gradient_check(problem: TinyProblem, h: float = 1e-5) -> Dict[str, float]:
    """Largest relative error between analytic and central-difference gradients, per objective."""
    errors: Dict[str, float] = {}
    for name, fn in loss_functions(problem).items():
        analytic = _grads(problem.model, fn())
        worst = 0.0
        for p in problem.model.parameters():
            numeric = numerical_gradient(fn, p.tensor, h)
            worst = max(worst, relative_error(analytic[p.name], numeric))
        errors[name] = worst
    return errors


def reduce_check(
    trials: int = 20,
    seed: int = 0,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    with_gradcheck: bool = False,
) -> ReductionReport:
    rng = np.random.default_rng(seed)
    report = ReductionReport(trials=trials, tolerance=tolerance)
    for t in range(trials):
        problem = tiny_problem(rng)
        dev = check_problem(problem)
        report.da_loss_deviation = max(report.da_loss_deviation, dev["da_loss"])
        report.mt_loss_deviation = max(report.mt_loss_deviation, dev["mt_loss"])
        report.da_grad_deviation = max(report.da_grad_deviation, dev["da_grad"])
        report.mt_grad_deviation = max(report.mt_grad_deviation, dev["mt_grad"])
        if with_gradcheck:
            for name, err in gradient_check(tiny_problem(rng)).items():
                report.gradcheck[name] = max(report.gradcheck.get(name, 0.0), err)
        logger.debug(f"[reduce] trial {t}: {dev}")
    logger.info(f"[reduce] {trials} trials, max deviation {report.max_deviation:.3e}")
    return report
