from __future__ import annotations

from enum import Enum
from typing import FrozenSet, Literal

from pydantic import BaseModel, ConfigDict


class ObjectiveKind(str, Enum):
    BASELINE = "baseline"
    DA = "da"
    MT = "mt"
    SLA = "sla"
    SLA_SD = "sla_sd"


class InferenceMode(str, Enum):
    SI = "si"   # single inference, untransformed input only
    AG = "ag"   # aggregated over every transformation
    SD = "sd"   # self-distilled head u


_HEADS = {
    ObjectiveKind.BASELINE: frozenset({"u"}),
    ObjectiveKind.DA: frozenset({"u"}),
    ObjectiveKind.MT: frozenset({"u", "v"}),
    ObjectiveKind.SLA: frozenset({"w"}),
    ObjectiveKind.SLA_SD: frozenset({"w", "u"}),
}

_MODES = {
    ObjectiveKind.BASELINE: (InferenceMode.SI,),
    ObjectiveKind.DA: (InferenceMode.SI,),
    ObjectiveKind.MT: (InferenceMode.SI,),
    ObjectiveKind.SLA: (InferenceMode.SI, InferenceMode.AG),
    ObjectiveKind.SLA_SD: (InferenceMode.SI, InferenceMode.AG, InferenceMode.SD),
}


class ObjectiveSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: ObjectiveKind = ObjectiveKind.SLA
    beta: Literal[0, 1] = 1


def heads_for(kind: ObjectiveKind) -> FrozenSet[str]:
    return _HEADS[kind]


def modes_for(kind: ObjectiveKind) -> tuple:
    return _MODES[kind]
