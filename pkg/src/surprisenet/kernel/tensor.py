"""Reverse-mode autodiff over numpy arrays.

Just enough machinery for the model: dense matmul, elementwise activations,
concatenation, reductions, dropout, and a fused softmax cross-entropy. Every
op records a backward closure; calling :meth:`Tensor.backward` on a scalar
loss walks the tape in reverse topological order and accumulates gradients
into every tensor that requires them.

Default dtype is float32; float64 graphs are supported so finite-difference
verification can run above the float32 noise floor.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Iterator, Sequence

import numpy as np

DEFAULT_DTYPE = np.float32


class KernelError(RuntimeError):
    """Misuse of the autodiff tape (shape mismatch, non-scalar backward, ...)."""


_grad_enabled = True


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable tape recording inside the block (inference fast path)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


class Tensor:
    """A node in the computation graph wrapping a numpy array."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        name: str | None = None,
        dtype=None,
    ) -> None:
        arr = np.asarray(data, dtype=dtype if dtype is not None else None)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(DEFAULT_DTYPE)
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None

    # -- basic introspection -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{tag})"

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False, dtype=self.data.dtype)

    # -- graph plumbing --------------------------------------------------------

    def _accumulate(self, g: np.ndarray) -> None:
        g = _unbroadcast(g, self.data.shape)
        if self.grad is None:
            self.grad = np.array(g, dtype=self.data.dtype, copy=True)
        else:
            self.grad = self.grad + g.astype(self.data.dtype, copy=False)

    def backward(self) -> None:
        """Backpropagate from a scalar loss through the recorded graph."""
        if self.data.size != 1:
            raise KernelError(
                f"backward requires a scalar loss, got shape {self.data.shape}"
            )
        if not self.requires_grad:
            raise KernelError(
                "backward called on a tensor with no recorded graph; "
                "compute a loss from parameters first"
            )
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self._accumulate(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- operator sugar --------------------------------------------------------

    def __add__(self, other) -> "Tensor":
        return add(self, _as_tensor(other, self.dtype))

    def __radd__(self, other) -> "Tensor":
        return add(_as_tensor(other, self.dtype), self)

    def __sub__(self, other) -> "Tensor":
        return sub(self, _as_tensor(other, self.dtype))

    def __rsub__(self, other) -> "Tensor":
        return sub(_as_tensor(other, self.dtype), self)

    def __mul__(self, other) -> "Tensor":
        return mul(self, _as_tensor(other, self.dtype))

    def __rmul__(self, other) -> "Tensor":
        return mul(_as_tensor(other, self.dtype), self)

    def __neg__(self) -> "Tensor":
        return mul(self, _as_tensor(-1.0, self.dtype))

    def __matmul__(self, other) -> "Tensor":
        return matmul(self, other)


def _as_tensor(value, dtype) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=dtype))


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a gradient back down to the shape it was broadcast from."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _make(
    data: np.ndarray,
    parents: tuple[Tensor, ...],
    backward: Callable[[np.ndarray], None],
) -> Tensor:
    out = Tensor(data, dtype=data.dtype)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(p for p in parents if p.requires_grad)
        out._backward = backward
    return out


# ---------------------------------------------------------------------------
# Ops
# ---------------------------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    data = a.data + b.data

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g)
        if b.requires_grad:
            b._accumulate(g)

    return _make(data, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    data = a.data - b.data

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g)
        if b.requires_grad:
            b._accumulate(-g)

    return _make(data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    data = a.data * b.data

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g * b.data)
        if b.requires_grad:
            b._accumulate(g * a.data)

    return _make(data, (a, b), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise KernelError(
            f"matmul expects 2-D operands, got {a.data.shape} @ {b.data.shape}"
        )
    if a.data.shape[1] != b.data.shape[0]:
        raise KernelError(f"matmul shape mismatch: {a.data.shape} @ {b.data.shape}")
    data = a.data @ b.data

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    return _make(data, (a, b), backward)


def transpose(a: Tensor) -> Tensor:
    data = a.data.T

    def backward(g: np.ndarray) -> None:
        a._accumulate(g.T)

    return _make(np.ascontiguousarray(data), (a,), backward)


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    data = np.empty_like(x)
    pos = x >= 0
    data[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    data[~pos] = ex / (1.0 + ex)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * data * (1.0 - data))

    return _make(data, (a,), backward)


def tanh(a: Tensor) -> Tensor:
    data = np.tanh(a.data)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * (1.0 - data * data))

    return _make(data, (a,), backward)


def exp(a: Tensor) -> Tensor:
    data = np.exp(a.data)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * data)

    return _make(data, (a,), backward)


def log(a: Tensor) -> Tensor:
    data = np.log(a.data)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g / a.data)

    return _make(data, (a,), backward)


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    if not tensors:
        raise KernelError("concat needs at least one tensor")
    data = np.concatenate([t.data for t in tensors], axis=axis)
    widths = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + widths)

    def backward(g: np.ndarray) -> None:
        for t, start, stop in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(start, stop)
                t._accumulate(g[tuple(sl)])

    return _make(data, tuple(tensors), backward)


def tsum(a: Tensor) -> Tensor:
    data = np.asarray(a.data.sum(), dtype=a.data.dtype)

    def backward(g: np.ndarray) -> None:
        a._accumulate(np.broadcast_to(g, a.data.shape))

    return _make(data, (a,), backward)


def tmean(a: Tensor) -> Tensor:
    size = a.data.size
    data = np.asarray(a.data.mean(), dtype=a.data.dtype)

    def backward(g: np.ndarray) -> None:
        a._accumulate(np.broadcast_to(g / size, a.data.shape))

    return _make(data, (a,), backward)


def dropout(a: Tensor, rate: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: zero activations w.p. ``rate``, scale the rest."""
    if not 0.0 <= rate < 1.0:
        raise KernelError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return a
    keep = (rng.random(a.data.shape) >= rate).astype(a.data.dtype)
    scale = np.asarray(1.0 / (1.0 - rate), dtype=a.data.dtype)
    data = a.data * keep * scale

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * keep * scale)

    return _make(data, (a,), backward)


def log_softmax_rows(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax_rows(x: np.ndarray) -> np.ndarray:
    shifted = np.exp(x - x.max(axis=1, keepdims=True))
    return shifted / shifted.sum(axis=1, keepdims=True)


def softmax_cross_entropy(
    logits: Tensor,
    targets: np.ndarray,
    class_weights: np.ndarray | None = None,
) -> Tensor:
    """Weighted-mean cross-entropy between logit rows and integer targets.

    The mean is weighted per target class and normalized by the weight sum, so
    unit weights reduce to the plain mean.
    """
    if logits.data.ndim != 2:
        raise KernelError(f"logits must be 2-D, got shape {logits.data.shape}")
    targets = np.asarray(targets, dtype=np.int64)
    n, v = logits.data.shape
    if targets.shape != (n,):
        raise KernelError(f"expected {n} targets, got shape {targets.shape}")
    if targets.size and (targets.min() < 0 or targets.max() >= v):
        raise KernelError("target index out of range")
    if class_weights is None:
        weights = np.ones(n, dtype=logits.data.dtype)
    else:
        class_weights = np.asarray(class_weights, dtype=logits.data.dtype)
        if class_weights.shape != (v,):
            raise KernelError(f"class_weights must have shape ({v},)")
        weights = class_weights[targets]
    log_probs = log_softmax_rows(logits.data)
    nll = -log_probs[np.arange(n), targets]
    weight_sum = weights.sum()
    data = np.asarray((weights * nll).sum() / weight_sum, dtype=logits.data.dtype)

    def backward(g: np.ndarray) -> None:
        grad = np.exp(log_probs)
        grad[np.arange(n), targets] -= 1.0
        grad *= (weights / weight_sum)[:, None]
        logits._accumulate(g * grad)

    return _make(data, (logits,), backward)


def zeros(shape: tuple[int, ...], dtype=DEFAULT_DTYPE) -> Tensor:
    return Tensor(np.zeros(shape, dtype=dtype))
