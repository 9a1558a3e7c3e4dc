from sla_lab.domain.model.builder import build_model
from sla_lab.domain.model.entities import (
    Backbone,
    BackboneKind,
    JointHead,
    SlaModel,
    build_backbone,
    conditional_logits,
    embed,
    flat_joint_logits,
    head_logits,
    joint_logits,
)
from sla_lab.domain.model.objective import InferenceMode, ObjectiveKind, ObjectiveSpec, heads_for, modes_for

__all__ = [
    "Backbone",
    "BackboneKind",
    "InferenceMode",
    "JointHead",
    "ObjectiveKind",
    "ObjectiveSpec",
    "SlaModel",
    "build_backbone",
    "build_model",
    "conditional_logits",
    "embed",
    "flat_joint_logits",
    "head_logits",
    "heads_for",
    "joint_logits",
    "modes_for",
]
