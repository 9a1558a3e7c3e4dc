from sla_lab.services.training.datasets import load_named
from sla_lab.services.training.evaluation import accuracy, check_modes, evaluate, supported_modes
from sla_lab.services.training.schemas import (
    BackboneSpec,
    DatasetName,
    DatasetSpec,
    SyntheticSpec,
    TrainConfig,
    TransformSetKind,
    TransformSpec,
    build_transform_set,
    load_train_config,
    parse_train_config,
)
from sla_lab.services.training.service import MinibatchStream, TrainingResult, TrainingService, run_training

__all__ = [
    "BackboneSpec",
    "DatasetName",
    "DatasetSpec",
    "MinibatchStream",
    "SyntheticSpec",
    "TrainConfig",
    "TrainingResult",
    "TrainingService",
    "TransformSetKind",
    "TransformSpec",
    "accuracy",
    "build_transform_set",
    "check_modes",
    "evaluate",
    "load_named",
    "load_train_config",
    "parse_train_config",
    "run_training",
    "supported_modes",
]
