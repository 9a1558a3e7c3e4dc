"""Parameters, the step-decay schedule and heavy-ball SGD."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from sla_lab.domain.errors import ContractViolation, DimensionError
from sla_lab.domain.tensor.tensor import Tensor


@dataclass
class Parameter:
    """A trainable tensor plus its momentum (velocity) buffer."""

    name: str
    tensor: Tensor
    momentum_buffer: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.tensor.requires_grad = True
        self.momentum_buffer = np.zeros_like(self.tensor.data)

    @classmethod
    def uniform(cls, name: str, shape: tuple, fan_in: int, rng: np.random.Generator) -> "Parameter":
        """Uniform in ``[-1/sqrt(fan_in), +1/sqrt(fan_in)]``."""
        bound = 1.0 / math.sqrt(fan_in)
        return cls(name, Tensor(rng.uniform(-bound, bound, size=shape)))

    @classmethod
    def zeros(cls, name: str, shape: tuple) -> "Parameter":
        return cls(name, Tensor(np.zeros(shape)))

    @property
    def shape(self) -> tuple:
        return self.tensor.shape

    def assign(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.tensor.shape:
            raise DimensionError(f"cannot assign {values.shape} to parameter {self.name} of shape {self.tensor.shape}")
        self.tensor.data[...] = values


class OptimizerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    learning_rate: float = Field(0.1, gt=0)
    momentum: float = Field(0.9, ge=0, lt=1)
    weight_decay: float = Field(1e-4, ge=0)
    decay_milestones: List[float] = Field(default_factory=lambda: [0.5, 0.75])
    decay_factor: float = Field(0.1, gt=0)

    @field_validator("decay_milestones")
    @classmethod
    def _increasing_fractions(cls, v: List[float]) -> List[float]:
        if any(not 0.0 < m < 1.0 for m in v):
            raise ValueError("decay milestones must lie strictly between 0 and 1")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("decay milestones must be strictly increasing")
        return v


def learning_rate_at(cfg: OptimizerConfig, iteration: int, total_iterations: int) -> float:
    """Base rate times ``decay_factor`` for every milestone already reached."""
    passed = sum(1 for m in cfg.decay_milestones if iteration >= m * total_iterations)
    return cfg.learning_rate * cfg.decay_factor ** passed


def zero_grad(params: Iterable[Parameter]) -> None:
    for p in params:
        p.tensor.grad = None


def sgd_step(params: Iterable[Parameter], cfg: OptimizerConfig, iteration: int, total_iterations: int) -> float:
    """One heavy-ball step, ``v <- mu*v + (g + wd*p)``, ``p <- p - lr*v``.

    Weight decay is coupled into the gradient and applies to every parameter.
    Gradients are cleared afterwards. Returns the learning rate used.
    """
    params = list(params)
    missing = [p.name for p in params if p.tensor.grad is None]
    if missing:
        raise ContractViolation(f"sgd_step called without gradients for: {', '.join(missing)}")
    lr = learning_rate_at(cfg, iteration, total_iterations)
    for p in params:
        step = p.tensor.grad + cfg.weight_decay * p.tensor.data
        p.momentum_buffer *= cfg.momentum
        p.momentum_buffer += step
        p.tensor.data -= lr * p.momentum_buffer
        p.tensor.grad = None
    return lr
