from sla_lab.domain.ports.checkpoint import CheckpointStore
from sla_lab.domain.ports.metrics import MetricsRow, MetricsSink

__all__ = ["CheckpointStore", "MetricsRow", "MetricsSink"]
