# memlog.py
"""Per-stage wall time, resident memory and backbone forward counts."""

import contextlib
import logging
import os
import time
from dataclasses import dataclass
from typing import Iterator, Optional

import psutil

from sla_lab.domain.model import SlaModel

logger = logging.getLogger("sla_lab.mem")

_PROCESS = psutil.Process(os.getpid())


def rss_mb() -> float:
    """Current resident set size in MiB."""
    return _PROCESS.memory_info().rss / (1024 * 1024)


@dataclass
class StageStats:
    name: str
    seconds: float = 0.0
    rss_delta_mb: float = 0.0
    forwards: Optional[int] = None


@contextlib.contextmanager
def stage(name: str, model: Optional[SlaModel] = None) -> Iterator[StageStats]:
    """Log time + memory (and forwards through ``model``) before/after a stage."""
    stats = StageStats(name)
    start_rss, start = rss_mb(), time.perf_counter()
    start_fwd = model.forward_count if model is not None else 0
    logger.info(f"[{name}] ▶ start  | RSS {start_rss:7.1f} MB")
    try:
        yield stats
    finally:
        end_rss = rss_mb()
        stats.seconds = time.perf_counter() - start
        stats.rss_delta_mb = end_rss - start_rss
        fwd = ""
        if model is not None:
            stats.forwards = model.forward_count - start_fwd
            fwd = f"  forwards={stats.forwards}"
        logger.info(
            f"[{name}] ■ done   | RSS {end_rss:7.1f} MB "
            f"(Δ {stats.rss_delta_mb:+.1f})  t={stats.seconds:5.1f}s{fwd}"
        )
