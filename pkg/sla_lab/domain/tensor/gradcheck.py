"""Central finite differences against the reverse-mode engine."""

from __future__ import annotations

from typing import Callable

import numpy as np

from sla_lab.domain.tensor.tensor import Tensor, no_grad


def numerical_gradient(loss_fn: Callable[[], Tensor], tensor: Tensor, h: float = 1e-5) -> np.ndarray:
    """d loss / d tensor by central differences, perturbing ``tensor.data`` in place."""
    grad = np.zeros_like(tensor.data)
    values = tensor.data
    with no_grad():
        for idx in np.ndindex(values.shape):
            original = values[idx]
            values[idx] = original + h
            plus = loss_fn().item()
            values[idx] = original - h
            minus = loss_fn().item()
            values[idx] = original
            grad[idx] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Largest absolute deviation scaled by the largest gradient magnitude."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), 1e-12)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)
