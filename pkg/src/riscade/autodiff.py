"""Reverse-mode automatic differentiation over dense float64 arrays.

The tape is implicit: every differentiable operation records its parent
tensors and a closure that pushes the output adjoint back to them.  A fresh
graph is built on every forward pass, so data-dependent control flow (such
as an unrolled ODE solve) differentiates exactly.  Calling :func:`backward`
consumes the tape.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, ShapeError

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block (evaluation-only forwards)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    """N-dimensional float64 array with an optional gradient buffer.

    Leaves created through :meth:`parameter` own a zeroed gradient buffer;
    intermediate nodes receive one lazily during :func:`backward`.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None

    @classmethod
    def parameter(cls, data) -> "Tensor":
        """A trainable leaf: requires grad and owns a zeroed grad buffer."""
        t = cls(data, requires_grad=True)
        t.grad = np.zeros_like(t.data)
        return t

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def zero_grad(self) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        else:
            self.grad.fill(0.0)

    def item(self) -> float:
        return float(self.data)

    def sum(self) -> "Tensor":
        return tsum(self)

    # Arithmetic sugar.  Scalars fold into a single affine node.
    def __add__(self, other):
        if isinstance(other, Tensor):
            return add(self, other)
        return affine(self, 1.0, float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Tensor):
            return sub(self, other)
        return affine(self, 1.0, -float(other))

    def __rsub__(self, other):
        return affine(self, -1.0, float(other))

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return affine(self, float(other), 0.0)

    __rmul__ = __mul__

    def __neg__(self):
        return affine(self, -1.0, 0.0)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"


def _node(data: np.ndarray, parents: Sequence[Tensor], backward) -> Tensor:
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(p for p in parents if p.requires_grad)
        out._backward = backward
    return out


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64)
    else:
        t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `g` down to `shape`, undoing numpy broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gd, sd) in enumerate(zip(g.shape, shape)) if sd == 1 and gd != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def add(a: Tensor, b: Tensor) -> Tensor:
    data = a.data + b.data

    def backward(g):
        if a.requires_grad:
            _accumulate(a, _unbroadcast(g, a.data.shape))
        if b.requires_grad:
            _accumulate(b, _unbroadcast(g, b.data.shape))

    return _node(data, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    data = a.data - b.data

    def backward(g):
        if a.requires_grad:
            _accumulate(a, _unbroadcast(g, a.data.shape))
        if b.requires_grad:
            _accumulate(b, _unbroadcast(-g, b.data.shape))

    return _node(data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    data = a.data * b.data

    def backward(g):
        if a.requires_grad:
            _accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            _accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    return _node(data, (a, b), backward)


def affine(a: Tensor, scale: float, shift: float) -> Tensor:
    """scale * a + shift with scalar constants, as a single node."""
    data = a.data * scale + shift

    def backward(g):
        if a.requires_grad:
            _accumulate(a, g * scale)

    return _node(data, (a,), backward)


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)

    def backward(g):
        if a.requires_grad:
            _accumulate(a, g * (1.0 - y * y))

    return _node(y, (a,), backward)


def sigmoid(a: Tensor) -> Tensor:
    y = 1.0 / (1.0 + np.exp(-a.data))

    def backward(g):
        if a.requires_grad:
            _accumulate(a, g * y * (1.0 - y))

    return _node(y, (a,), backward)


# Activation table for the fused dense op: name -> (f, df-from-output).
_ACTIVATIONS = {
    "identity": (lambda z: z, None),
    "tanh": (np.tanh, lambda y: 1.0 - y * y),
    "sigmoid": (lambda z: 1.0 / (1.0 + np.exp(-z)), lambda y: y * (1.0 - y)),
}


def activations() -> tuple[str, ...]:
    return tuple(_ACTIVATIONS)


def dense(x: Tensor, weight: Tensor, bias: Tensor, activation: str = "identity") -> Tensor:
    """Fused affine map plus pointwise activation.

    x: (..., in), weight: (out, in), bias: (out,) -> (..., out).
    Fusing keeps the tape short, which dominates training speed here.
    """
    if activation not in _ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    if weight.data.ndim != 2 or bias.data.shape != (weight.data.shape[0],):
        raise ShapeError("weight must be (out, in) and bias (out,)")
    if x.data.shape[-1] != weight.data.shape[1]:
        raise ShapeError(
            f"input dim {x.data.shape[-1]} != layer in-dim {weight.data.shape[1]}"
        )
    act, dact = _ACTIVATIONS[activation]
    y = act(x.data @ weight.data.T + bias.data)

    def backward(g):
        dpre = g if dact is None else g * dact(y)
        if x.requires_grad:
            _accumulate(x, dpre @ weight.data)
        if weight.requires_grad or bias.requires_grad:
            d2 = dpre.reshape(-1, dpre.shape[-1])
            if weight.requires_grad:
                x2 = x.data.reshape(-1, x.data.shape[-1])
                _accumulate(weight, d2.T @ x2)
            if bias.requires_grad:
                _accumulate(bias, d2.sum(axis=0))

    return _node(y, (x, weight, bias), backward)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    parts = [t.data for t in tensors]
    data = np.concatenate(parts, axis=axis)
    sizes = [p.shape[axis] for p in parts]
    offsets = np.cumsum(sizes)[:-1]

    def backward(g):
        pieces = np.split(g, offsets, axis=axis)
        for t, piece in zip(tensors, pieces):
            if t.requires_grad:
                _accumulate(t, piece)

    return _node(data, tuple(tensors), backward)


def tsum(a: Tensor) -> Tensor:
    """Full reduction to a scalar."""
    data = np.asarray(a.data.sum())

    def backward(g):
        if a.requires_grad:
            _accumulate(a, np.broadcast_to(g, a.data.shape))

    return _node(data, (a,), backward)


def backward(loss: Tensor) -> None:
    """Populate gradients of every reachable leaf with d(loss)/d(leaf).

    `loss` must be a scalar on an active (not yet consumed) tape.  The
    walk releases each node's tape entry, so a second call raises.
    """
    if loss.data.size != 1:
        raise ContractError(f"loss must be scalar, got shape {loss.data.shape}")
    if loss._backward is None:
        raise ContractError("loss is not on an active tape")

    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))

    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        fn = node._backward
        if fn is None or node.grad is None:
            continue
        fn(node.grad)
        node._backward = None
        node._parents = ()
        node.grad = None  # intermediate adjoints are not kept
