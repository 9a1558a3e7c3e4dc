from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Optional


@dataclass(frozen=True)
class MetricsRow:
    """One evaluation record. Absent modes / components are ``None``."""

    iteration: int                  # completed steps
    learning_rate: float            # rate used by step ``iteration`` (0-based index iteration - 1)
    loss_total: float
    loss_cls: Optional[float] = None
    loss_ss: Optional[float] = None
    loss_kl: Optional[float] = None
    loss_ce_u: Optional[float] = None
    acc_train: Optional[float] = None
    accuracies: Dict[str, float] = field(default_factory=dict)
    wall_time_seconds: float = 0.0


class MetricsSink(ABC):

    @abstractmethod
    def write(self, row: MetricsRow) -> None: ...

    def close(self) -> None:   # pragma: no cover
        pass
