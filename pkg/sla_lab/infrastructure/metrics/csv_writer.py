from __future__ import annotations

import csv
import threading
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from sla_lab.domain.ports import MetricsRow, MetricsSink

HEADER = [
    "iteration",
    "lr",
    "loss_total",
    "loss_cls",
    "loss_ss",
    "loss_kl",
    "loss_ce_u",
    "acc_train",
    "acc_si",
    "acc_ag",
    "acc_sd",
    "seconds",
]


def _cell(value: Optional[float]) -> str:
    # repr round-trips floats exactly, so reruns produce identical bytes
    return "" if value is None else repr(float(value))


def format_row(row: MetricsRow, *, wall_time: bool) -> List[str]:
    acc = row.accuracies
    return [
        str(row.iteration),
        _cell(row.learning_rate),
        _cell(row.loss_total),
        _cell(row.loss_cls),
        _cell(row.loss_ss),
        _cell(row.loss_kl),
        _cell(row.loss_ce_u),
        _cell(row.acc_train),
        _cell(acc.get("si")),
        _cell(acc.get("ag")),
        _cell(acc.get("sd")),
        _cell(row.wall_time_seconds) if wall_time else "",
    ]


class CsvMetricsWriter(MetricsSink):
    """Appends rows under the fixed header; writes are serialised per file."""

    def __init__(self, path: Path, *, wall_time: bool = False) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._wall_time = wall_time
        self._lock = threading.Lock()
        with self.path.open("w", newline="") as f:
            csv.writer(f, lineterminator="\n").writerow(HEADER)

    def write(self, row: MetricsRow) -> None:
        with self._lock, self.path.open("a", newline="") as f:
            csv.writer(f, lineterminator="\n").writerow(format_row(row, wall_time=self._wall_time))


def append_table_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    """Append rows to a summary CSV, writing ``header`` first when the file is new."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if fresh:
            writer.writerow(list(header))
        for row in rows:
            writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else str(v)) for v in row])
    return path
