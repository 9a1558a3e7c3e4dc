"""Softmax-family functions and the two losses every objective is built from."""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from sla_lab.domain.errors import ContractViolation, DimensionError, LabelIndexError, NumericError
from sla_lab.domain.tensor.tensor import LogSoftmax, PickPerRow, Tensor

_NORMALIZATION_TOLERANCE = 1e-9


def log_softmax(logits: Tensor) -> Tensor:
    """Row-wise log-softmax over the last axis (log-sum-exp with max shift)."""
    if logits.ndim == 0 or logits.shape[-1] < 1:
        raise DimensionError(f"log_softmax needs at least one class, got shape {logits.shape}")
    if not np.all(np.isfinite(logits.data)):
        raise NumericError("log_softmax received NaN or infinite logits")
    return LogSoftmax.apply(logits)


def softmax(logits: Union[Tensor, np.ndarray]) -> np.ndarray:
    """Plain probabilities, outside the graph. Used for teachers and reporting."""
    values = logits.data if isinstance(logits, Tensor) else np.asarray(logits, dtype=np.float64)
    shifted = values - values.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _check_labels(labels: np.ndarray, batch: int, classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (batch,):
        raise DimensionError(f"expected {batch} labels, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        raise ContractViolation(f"labels must be integers, got dtype {labels.dtype}")
    bad = np.flatnonzero((labels < 0) | (labels >= classes))
    if bad.size:
        row = int(bad[0])
        raise LabelIndexError(f"label {int(labels[row])} at row {row} is outside [0, {classes})")
    return labels.astype(np.int64)


def cross_entropy(logits: Tensor, labels: Sequence[int]) -> Tensor:
    """Mean over the batch of ``-log_softmax(logits)[b, labels[b]]``."""
    if logits.ndim != 2:
        raise DimensionError(f"cross_entropy expects B x K logits, got shape {logits.shape}")
    batch, classes = logits.shape
    index = _check_labels(np.asarray(labels), batch, classes)
    picked = PickPerRow.apply(log_softmax(logits), index=index)
    return -picked.mean()


def kl_divergence(target_probs: Union[Tensor, np.ndarray], logits: Tensor) -> Tensor:
    """Mean over the batch of ``KL(target || softmax(logits))``.

    The target is always treated as a constant: whatever graph produced it
    receives no gradient from this loss.
    """
    target = np.array(target_probs.data if isinstance(target_probs, Tensor) else target_probs, dtype=np.float64)
    if logits.ndim != 2 or target.shape != logits.shape:
        raise DimensionError(f"kl_divergence target {target.shape} does not match logits {logits.shape}")
    if np.any(target < 0):
        raise ContractViolation("kl_divergence target has negative probabilities")
    row_sums = target.sum(axis=-1)
    off = np.flatnonzero(np.abs(row_sums - 1.0) > _NORMALIZATION_TOLERANCE)
    if off.size:
        row = int(off[0])
        raise ContractViolation(f"kl_divergence target row {row} sums to {row_sums[row]!r}, not 1")

    safe = np.where(target > 0, target, 1.0)
    neg_entropy = Tensor((target * np.log(safe)).sum(axis=-1))
    cross = (log_softmax(logits) * Tensor(target)).sum(axis=-1)
    return (neg_entropy - cross).mean()
