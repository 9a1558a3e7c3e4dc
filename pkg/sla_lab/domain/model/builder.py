from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from sla_lab.domain.model.entities import BackboneKind, JointHead, SlaModel, build_backbone
from sla_lab.domain.tensor import Parameter


def build_model(
    input_shape: Sequence[int],
    backbone_kind: BackboneKind,
    sizes: Sequence[int],
    n_classes: int,
    n_transforms: int,
    heads: Iterable[str],
    seed: int,
) -> SlaModel:
    """Initialise every parameter from one seeded generator.

    Draw order is fixed (backbone layers, then ``w``, ``u``, ``v``) so a seed
    always yields the same model.
    """
    heads = set(heads)
    rng = np.random.default_rng(seed)
    backbone = build_backbone(backbone_kind, input_shape, sizes, rng)
    d = backbone.embed_dim
    model = SlaModel(backbone=backbone, n_classes=n_classes, n_transforms=n_transforms)
    if "w" in heads:
        w = Parameter.uniform("head.w", (n_classes * n_transforms, d), d, rng)
        model.joint = JointHead(w, n_classes, n_transforms)
    if "u" in heads:
        model.u = Parameter.uniform("head.u", (n_classes, d), d, rng)
    if "v" in heads:
        model.v = Parameter.uniform("head.v", (n_transforms, d), d, rng)
    return model
