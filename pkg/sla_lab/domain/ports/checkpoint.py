from __future__ import annotations

from abc import ABC, abstractmethod
from pathlib import Path

from sla_lab.domain.model.entities import SlaModel


class CheckpointStore(ABC):

    @abstractmethod
    def save(self, model: SlaModel, path: Path) -> Path: ...

    @abstractmethod
    def load(self, path: Path) -> SlaModel: ...
