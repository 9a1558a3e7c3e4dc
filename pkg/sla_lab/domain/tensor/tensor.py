"""Dense 64-bit tensors with reverse-mode automatic differentiation.

A ``Tensor`` wraps a NumPy array. Every differentiable operation is a
``Function`` subclass; ``Function.apply`` runs the forward pass and records the
function as the creator of its output so ``Tensor.backward`` can walk the graph
in reverse topological order.

Gradients accumulate: calling ``backward`` twice without clearing adds the two
gradients together. The training loop clears them after every optimizer step.
"""

from __future__ import annotations

import contextlib
import threading
from typing import Any, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from sla_lab.domain.errors import ContractViolation, DimensionError


ArrayLike = Union[np.ndarray, float, int, Sequence[float], Sequence[Sequence[float]]]

_state = threading.local()


def is_grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording on the current thread (evaluation passes)."""
    previous = is_grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


class Function:
    """Base class for differentiable operations.

    ``forward`` receives the raw arrays of the input tensors; ``backward``
    receives dL/d(output) and returns one array (or ``None``) per input.
    """

    def __init__(self, *tensors: "Tensor") -> None:
        self.tensors = tensors

    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *tensors: "Tensor", **kwargs: Any) -> "Tensor":
        func = cls(*tensors)
        out = func.forward(*(t.data for t in tensors), **kwargs)
        requires_grad = is_grad_enabled() and any(t.requires_grad for t in tensors)
        return Tensor(out, creator=func if requires_grad else None, requires_grad=requires_grad)

    @staticmethod
    def unbroadcast(grad: np.ndarray, to_shape: Tuple[int, ...]) -> np.ndarray:
        """Sum out broadcast dimensions so ``grad`` matches ``to_shape``."""
        if grad.shape == to_shape:
            return grad
        while grad.ndim > len(to_shape):
            grad = grad.sum(axis=0)
        for dim, size in enumerate(to_shape):
            if size == 1 and grad.shape[dim] != 1:
                grad = grad.sum(axis=dim, keepdims=True)
        return grad


class Tensor:
    """N-dimensional float64 array plus optional gradient bookkeeping."""

    __array_priority__ = 1000

    def __init__(
        self,
        data: ArrayLike,
        *,
        requires_grad: bool = False,
        creator: Optional[Function] = None,
    ) -> None:
        self.data = np.array(data, dtype=np.float64, copy=True) if creator is None else np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.creator = creator
        self.grad: Optional[np.ndarray] = None

    # ------------------------------------------------------------------ #
    # Introspection                                                      #
    # ------------------------------------------------------------------ #
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError(f"item() needs a single value, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        """Copy of the values, cut from the graph (stop-gradient)."""
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor({self.data!r}{flag})"

    # ------------------------------------------------------------------ #
    # Operators                                                          #
    # ------------------------------------------------------------------ #
    def __add__(self, other: Union["Tensor", float]) -> "Tensor":
        return Add.apply(self, _lift(other))

    __radd__ = __add__

    def __mul__(self, other: Union["Tensor", float]) -> "Tensor":
        return Mul.apply(self, _lift(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        return Mul.apply(self, Tensor(-1.0))

    def __sub__(self, other: Union["Tensor", float]) -> "Tensor":
        return self + (-_lift(other))

    def __rsub__(self, other: Union["Tensor", float]) -> "Tensor":
        return _lift(other) + (-self)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return Sum.apply(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape: int) -> "Tensor":
        return Reshape.apply(self, shape=shape)

    @property
    def T(self) -> "Tensor":
        return Transpose.apply(self)

    def relu(self) -> "Tensor":
        return ReLU.apply(self)

    def take(self, indices: Sequence[int], axis: int) -> "Tensor":
        return Take.apply(self, indices=np.asarray(indices, dtype=np.int64), axis=axis)

    # ------------------------------------------------------------------ #
    # Reverse mode                                                       #
    # ------------------------------------------------------------------ #
    def backward(self) -> None:
        """Accumulate d(self)/d(t) into ``t.grad`` for every reachable ``t``.

        ``self`` must hold exactly one value.
        """
        if self.data.size != 1:
            raise DimensionError(f"backward() needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            raise ContractViolation("backward() called on a value that depends on no trainable tensor")
        order = _topological_order(self)
        grads = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            grad = grads.pop(id(node), None)
            if grad is None:
                continue
            if node.requires_grad:
                node.grad = grad.copy() if node.grad is None else node.grad + grad
            if node.creator is None:
                continue
            inputs = node.creator.tensors
            for inp, inp_grad in zip(inputs, node.creator.backward(grad)):
                if inp_grad is None or not inp.requires_grad:
                    continue
                inp_grad = Function.unbroadcast(inp_grad, inp.shape)
                key = id(inp)
                grads[key] = inp_grad if key not in grads else grads[key] + inp_grad


def _lift(value: Union[Tensor, float, int, np.ndarray]) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _topological_order(root: Tensor) -> List[Tensor]:
    """Iterative DFS; deep MLP graphs would blow the recursion limit otherwise."""
    order: List[Tensor] = []
    seen = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        if node.creator is not None:
            for parent in node.creator.tensors:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
    return order


# ---------------------------------------------------------------------- #
# Operations                                                             #
# ---------------------------------------------------------------------- #
class Add(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a + b

    def backward(self, grad: np.ndarray):
        return grad, grad


class Mul(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a * b

    def backward(self, grad: np.ndarray):
        a, b = (t.data for t in self.tensors)
        return grad * b, grad * a


class MatMul(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a @ b

    def backward(self, grad: np.ndarray):
        a, b = (t.data for t in self.tensors)
        return grad @ b.T, a.T @ grad


class Transpose(Function):
    def forward(self, a: np.ndarray) -> np.ndarray:
        if a.ndim != 2:
            raise DimensionError(f"transpose expects a matrix, got shape {a.shape}")
        return a.T

    def backward(self, grad: np.ndarray):
        return (grad.T,)


class Reshape(Function):
    def forward(self, a: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
        try:
            return a.reshape(shape)
        except ValueError as exc:
            raise DimensionError(f"cannot reshape {a.shape} into {shape}") from exc

    def backward(self, grad: np.ndarray):
        return (grad.reshape(self.tensors[0].shape),)


class ReLU(Function):
    def forward(self, a: np.ndarray) -> np.ndarray:
        return np.maximum(a, 0.0)

    def backward(self, grad: np.ndarray):
        return (grad * (self.tensors[0].data > 0),)


class Sum(Function):
    def forward(self, a: np.ndarray, axis: Optional[int], keepdims: bool) -> np.ndarray:
        self.axis, self.keepdims = axis, keepdims
        return np.asarray(a.sum(axis=axis, keepdims=keepdims))

    def backward(self, grad: np.ndarray):
        shape = self.tensors[0].shape
        if self.axis is not None and not self.keepdims:
            grad = np.expand_dims(grad, self.axis)
        return (np.broadcast_to(grad, shape).copy(),)


class Take(Function):
    """Select entries along one axis (rows of a batch, columns of a head)."""

    def forward(self, a: np.ndarray, indices: np.ndarray, axis: int) -> np.ndarray:
        self.indices, self.axis = indices, axis
        try:
            return np.take(a, indices, axis=axis)
        except IndexError as exc:
            raise DimensionError(f"take along axis {axis} out of range for shape {a.shape}") from exc

    def backward(self, grad: np.ndarray):
        out = np.zeros(self.tensors[0].shape)
        moved = np.moveaxis(out, self.axis, 0)
        np.add.at(moved, self.indices, np.moveaxis(grad, self.axis, 0))
        return (out,)


class PickPerRow(Function):
    """``out[b] = a[b, index[b]]`` for a 2-D ``a``."""

    def forward(self, a: np.ndarray, index: np.ndarray) -> np.ndarray:
        self.index = index
        return a[np.arange(a.shape[0]), index]

    def backward(self, grad: np.ndarray):
        out = np.zeros(self.tensors[0].shape)
        out[np.arange(out.shape[0]), self.index] = grad
        return (out,)


class LogSoftmax(Function):
    """Log-softmax over the last axis, shifted by the row maximum."""

    def forward(self, a: np.ndarray) -> np.ndarray:
        shifted = a - a.max(axis=-1, keepdims=True)
        self.out = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
        return self.out

    def backward(self, grad: np.ndarray):
        probs = np.exp(self.out)
        return (grad - probs * grad.sum(axis=-1, keepdims=True),)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of an ``m x k`` and a ``k x n`` tensor."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return MatMul.apply(a, b)
