from sla_lab.services.objectives.inference import (
    aggregate_logits,
    aggregate_logits_truncated,
    ensemble_logits,
    mode_logits,
    predict,
    sd_logits,
    single_logits,
)
from sla_lab.services.objectives.service import (
    LossBreakdown,
    aggregate_from_joint,
    compute_loss,
    identity_rows,
    loss_baseline,
    loss_da,
    loss_mt,
    loss_sla,
    loss_sla_sd,
)

__all__ = [
    "LossBreakdown",
    "aggregate_from_joint",
    "aggregate_logits",
    "aggregate_logits_truncated",
    "compute_loss",
    "ensemble_logits",
    "identity_rows",
    "loss_baseline",
    "loss_da",
    "loss_mt",
    "loss_sla",
    "loss_sla_sd",
    "mode_logits",
    "predict",
    "sd_logits",
    "single_logits",
]
