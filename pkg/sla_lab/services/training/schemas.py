"""Experiment configuration documents.

A run is described by one YAML (or JSON) file validated into ``TrainConfig``.
Unknown keys are rejected everywhere so a typo never silently falls back to a
default.
"""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, model_validator

from sla_lab.domain.errors import ConfigError
from sla_lab.domain.model import BackboneKind, ObjectiveKind, ObjectiveSpec
from sla_lab.domain.tensor import OptimizerConfig
from sla_lab.domain.transforms import (
    TransformationSet,
    color_perm_set,
    identity_set,
    product_set,
    rotation_set,
)

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DatasetName(str, Enum):
    MNIST = "mnist"
    SYNTHETIC = "synthetic"


class SyntheticSpec(_Strict):
    dim: PositiveInt = 16
    margin: float = Field(6.0, gt=0)
    train_count: int = Field(512, ge=0)
    test_count: int = Field(256, ge=0)
    noise: float = Field(1.0, gt=0)
    seed: int = 0


class DatasetSpec(_Strict):
    name: DatasetName = DatasetName.MNIST
    # file names are resolved against settings().data_dir unless absolute
    train_images: str = "train-images-idx3-ubyte"
    train_labels: str = "train-labels-idx1-ubyte"
    test_images: str = "t10k-images-idx3-ubyte"
    test_labels: str = "t10k-labels-idx1-ubyte"
    classes: Optional[List[int]] = None
    per_class: Optional[PositiveInt] = None
    subsample_seed: int = 0
    synthetic: SyntheticSpec = Field(default_factory=SyntheticSpec)


class BackboneSpec(_Strict):
    kind: BackboneKind = BackboneKind.MLP
    hidden_sizes: List[PositiveInt] = Field(default_factory=lambda: [256])
    embed_dim: Optional[PositiveInt] = None     # linear backbone only

    def sizes(self) -> List[int]:
        if self.kind == BackboneKind.LINEAR:
            return [self.embed_dim or self.hidden_sizes[0]]
        return list(self.hidden_sizes)


class TransformSetKind(str, Enum):
    IDENTITY = "identity"
    ROTATION = "rotation"
    COLORPERM = "colorperm"
    PRODUCT = "product"


class TransformSpec(_Strict):
    kind: TransformSetKind = TransformSetKind.ROTATION
    rotations: Optional[List[int]] = None        # degrees, e.g. [0, 180]
    permutations: Optional[List[str]] = None     # channel orders, e.g. ["RGB", "GBR"]


def build_transform_set(spec: TransformSpec) -> TransformationSet:
    if spec.kind == TransformSetKind.IDENTITY:
        return identity_set()
    if spec.kind == TransformSetKind.ROTATION:
        return rotation_set(spec.rotations)
    if spec.kind == TransformSetKind.COLORPERM:
        return color_perm_set(spec.permutations)
    return product_set(rotation_set(spec.rotations), color_perm_set(spec.permutations))


class TrainConfig(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    backbone: BackboneSpec = Field(default_factory=BackboneSpec)
    transforms: TransformSpec = Field(default_factory=TransformSpec)
    objective: ObjectiveSpec = Field(default_factory=ObjectiveSpec)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)

    total_iterations: PositiveInt = 10_000
    batch_size: PositiveInt = 128
    eval_every: PositiveInt = 1_000
    seed: int = 0

    eval_batch_size: PositiveInt = 500
    train_eval_limit: Optional[PositiveInt] = 2_000   # train accuracy on a fixed prefix

    @model_validator(mode="after")
    def _objective_fits_transforms(self) -> "TrainConfig":
        m = build_transform_set(self.transforms).size
        kind = self.objective.kind
        if kind == ObjectiveKind.SLA_SD and m < 2:
            raise ValueError("sla_sd needs a transformation set with at least two members")
        if kind == ObjectiveKind.BASELINE and m != 1:
            raise ValueError("baseline trains on untransformed images only; use transforms.kind=identity")
        return self

    def transform_set(self) -> TransformationSet:
        return build_transform_set(self.transforms)

    def with_seed(self, seed: int) -> "TrainConfig":
        return self.model_copy(update={"seed": seed})


def parse_train_config(raw: Union[dict, None], source: str = "<config>") -> TrainConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: expected a mapping at the top level")
    try:
        return TrainConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise ConfigError(f"{source}: {where}: {first['msg']}") from exc


def load_train_config(path: Union[str, Path]) -> TrainConfig:
    """Read a YAML or JSON config file (JSON is a YAML subset)."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML/JSON ({exc})") from exc
    return parse_train_config(raw, str(path))
