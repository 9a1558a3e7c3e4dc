from sla_lab.domain.transforms.batch import ExpandedBatch, expand_batch, joint_label, split_joint_label
from sla_lab.domain.transforms.entities import (
    Transformation,
    TransformationSet,
    TransformKind,
    apply,
    compose,
    transform_batch,
)
from sla_lab.domain.transforms.sets import (
    color_perm_set,
    identity_set,
    parse_channel_order,
    product_set,
    rotation_set,
)

__all__ = [
    "ExpandedBatch",
    "Transformation",
    "TransformationSet",
    "TransformKind",
    "apply",
    "color_perm_set",
    "compose",
    "expand_batch",
    "identity_set",
    "joint_label",
    "parse_channel_order",
    "product_set",
    "rotation_set",
    "split_joint_label",
    "transform_batch",
]
