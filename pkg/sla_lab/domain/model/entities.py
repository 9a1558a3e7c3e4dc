"""Backbones and classifier heads.

Embeddings are ``z = f(x; theta)``. The joint head stores one bias-free
classifier per (class, transformation) pair as row ``i * M + j`` of a single
``(N*M) x D`` matrix; the auxiliary heads ``u`` (N rows) and ``v`` (M rows) are
also bias-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from sla_lab.domain.errors import DimensionError, LabelIndexError
from sla_lab.domain.tensor import Parameter, Tensor, matmul


class BackboneKind(str, Enum):
    IDENTITY = "identity"   # z is the flattened image
    LINEAR = "linear"       # learned affine projection
    MLP = "mlp"             # affine + ReLU per hidden layer


@dataclass
class Backbone:
    kind: BackboneKind
    input_shape: Tuple[int, int, int]
    layers: List[Tuple[Parameter, Parameter]] = field(default_factory=list)

    @property
    def input_dim(self) -> int:
        return int(np.prod(self.input_shape))

    @property
    def embed_dim(self) -> int:
        if not self.layers:
            return self.input_dim
        return self.layers[-1][0].shape[0]

    def parameters(self) -> List[Parameter]:
        return [p for layer in self.layers for p in layer]

    def describe(self) -> Dict[str, object]:
        return {
            "kind": self.kind.value,
            "input_shape": list(self.input_shape),
            "layer_sizes": [w.shape[0] for w, _ in self.layers],
        }


def build_backbone(
    kind: BackboneKind,
    input_shape: Sequence[int],
    sizes: Sequence[int],
    rng: np.random.Generator,
) -> Backbone:
    """``sizes`` are the hidden widths (MLP) or ``[D]`` (linear); ignored for identity."""
    input_shape = tuple(int(s) for s in input_shape)
    backbone = Backbone(kind, input_shape)
    if kind == BackboneKind.IDENTITY:
        return backbone
    fan_in = int(np.prod(input_shape))
    widths = list(sizes)[:1] if kind == BackboneKind.LINEAR else list(sizes)
    for k, width in enumerate(widths):
        w = Parameter.uniform(f"backbone.{k}.weight", (width, fan_in), fan_in, rng)
        b = Parameter.uniform(f"backbone.{k}.bias", (width,), fan_in, rng)
        backbone.layers.append((w, b))
        fan_in = width
    return backbone


def embed(backbone: Backbone, images: np.ndarray) -> Tensor:
    """Embed one ``H x W x C`` image (-> ``[D]``) or a batch (-> ``[B, D]``)."""
    single = images.ndim == 3
    batch = images[None] if single else images
    if batch.ndim != 4 or tuple(batch.shape[1:]) != backbone.input_shape:
        raise DimensionError(f"backbone expects images of shape {backbone.input_shape}, got {images.shape}")
    h = Tensor(batch.reshape(batch.shape[0], -1))
    for w, b in backbone.layers:
        h = matmul(h, w.tensor.T) + b.tensor
        if backbone.kind == BackboneKind.MLP:
            h = h.relu()
    return h.reshape(backbone.embed_dim) if single else h


@dataclass
class JointHead:
    w: Parameter
    n_classes: int
    n_transforms: int

    def __post_init__(self) -> None:
        if self.w.shape[0] != self.n_classes * self.n_transforms:
            raise DimensionError(
                f"joint head has {self.w.shape[0]} rows, expected {self.n_classes} x {self.n_transforms}"
            )

    @property
    def embed_dim(self) -> int:
        return self.w.shape[1]

    def row(self, i: int, j: int) -> int:
        return i * self.n_transforms + j

    def column_indices(self, j: int) -> List[int]:
        if not 0 <= j < self.n_transforms:
            raise LabelIndexError(f"transformation index {j} outside [0, {self.n_transforms})")
        return [self.row(i, j) for i in range(self.n_classes)]


def _as_batch(z: Tensor, dim: int) -> Tuple[Tensor, bool]:
    single = z.ndim == 1
    zb = z.reshape(1, z.shape[0]) if single else z
    if zb.ndim != 2 or zb.shape[1] != dim:
        raise DimensionError(f"embedding of shape {z.shape} does not match head dimension {dim}")
    return zb, single


def head_logits(weights: Parameter, z: Tensor) -> Tensor:
    """``z @ W^T`` for a bias-free head; accepts ``[D]`` or ``[B, D]``."""
    zb, single = _as_batch(z, weights.shape[1])
    out = matmul(zb, weights.tensor.T)
    return out.reshape(weights.shape[0]) if single else out


def flat_joint_logits(head: JointHead, z: Tensor) -> Tensor:
    """All ``N*M`` joint logits in ``i * M + j`` order."""
    return head_logits(head.w, z)


def joint_logits(head: JointHead, z: Tensor) -> Tensor:
    """Entry ``(i, j)`` is ``w_ij . z``: ``[N, M]`` for one embedding, ``[B, N, M]`` for a batch."""
    flat = flat_joint_logits(head, z)
    if flat.ndim == 1:
        return flat.reshape(head.n_classes, head.n_transforms)
    return flat.reshape(flat.shape[0], head.n_classes, head.n_transforms)


def conditional_logits(head: JointHead, z: Tensor, j: int) -> Tensor:
    """Column ``j`` of the joint logits; its softmax is ``P(i | t_j(x), j)``."""
    columns = head.column_indices(j)
    return flat_joint_logits(head, z).take(columns, axis=-1)


@dataclass
class SlaModel:
    """Backbone plus whichever heads the training objective needs.

    ``forward_count`` counts images pushed through the backbone; evaluation
    code uses it to check inference cost.
    """

    backbone: Backbone
    n_classes: int
    n_transforms: int
    joint: Optional[JointHead] = None
    u: Optional[Parameter] = None
    v: Optional[Parameter] = None
    forward_count: int = 0

    @property
    def embed_dim(self) -> int:
        return self.backbone.embed_dim

    def parameters(self) -> List[Parameter]:
        params = self.backbone.parameters()
        params += [p for p in (self.joint.w if self.joint else None, self.u, self.v) if p is not None]
        return params

    def named_parameters(self) -> Dict[str, Parameter]:
        return {p.name: p for p in self.parameters()}

    def embed(self, images: np.ndarray) -> Tensor:
        self.forward_count += 1 if images.ndim == 3 else images.shape[0]
        return embed(self.backbone, images)

    def parameter_count(self) -> int:
        return sum(math.prod(p.shape) for p in self.parameters())
