"""Dense layers, sequential stacks, and the Adam optimizer."""

from __future__ import annotations

import numpy as np

from . import autodiff
from .autodiff import Tensor
from .errors import ContractError, ShapeError


def _semi_orthogonal(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    u, _, vt = np.linalg.svd(rng.standard_normal(shape), full_matrices=False)
    return u if u.shape == shape else vt


class DenseLayer:
    """Affine map with a pointwise activation.

    weight is (out, in), bias is (out,).  `activation` is one of
    {"tanh", "sigmoid", "identity"}.
    """

    def __init__(self, weight: Tensor, bias: Tensor, activation: str = "identity"):
        if activation not in autodiff.activations():
            raise ValueError(f"unknown activation {activation!r}")
        if weight.data.ndim != 2:
            raise ShapeError("weight must be 2-D (out, in)")
        if bias.data.shape != (weight.data.shape[0],):
            raise ShapeError("bias shape must match weight rows")
        self.weight = weight
        self.bias = bias
        self.activation = activation

    @classmethod
    def init(cls, in_dim: int, out_dim: int, activation: str, rng: np.random.Generator) -> "DenseLayer":
        """Semi-orthogonal weights, zero bias.

        Orthogonal rows/columns keep the layer's gain at one, so signals
        survive the deep all-tanh stacks used here; fan-in-scaled uniform
        init attenuates each layer by ~1/sqrt(3) and measurably stalls
        training.
        """
        weight = Tensor.parameter(_semi_orthogonal(rng, (out_dim, in_dim)))
        bias = Tensor.parameter(np.zeros(out_dim))
        return cls(weight, bias, activation)

    @classmethod
    def identity(cls, dim: int) -> "DenseLayer":
        """The exact identity map (linear, W=I, b=0)."""
        return cls(Tensor.parameter(np.eye(dim)), Tensor.parameter(np.zeros(dim)), "identity")

    @property
    def in_dim(self) -> int:
        return self.weight.data.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.data.shape[0]

    def __call__(self, x: Tensor) -> Tensor:
        return autodiff.dense(x, self.weight, self.bias, self.activation)

    def parameters(self) -> list[Tensor]:
        return [self.weight, self.bias]


class Sequential:
    """A chain of dense layers applied in order."""

    def __init__(self, layers: list[DenseLayer]):
        if not layers:
            raise ValueError("Sequential needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise ShapeError(
                    f"layer chain breaks: {prev.out_dim} -> {nxt.in_dim}"
                )
        self.layers = layers

    @classmethod
    def init(cls, dims: list[int], activation: str, rng: np.random.Generator) -> "Sequential":
        layers = [
            DenseLayer.init(d_in, d_out, activation, rng)
            for d_in, d_out in zip(dims, dims[1:])
        ]
        return cls(layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def __call__(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x

    def parameters(self) -> list[Tensor]:
        return [p for layer in self.layers for p in layer.parameters()]


class Adam:
    """Adam with bias correction.  `lr` is mutable so schedules can drive it."""

    def __init__(self, params: list[Tensor], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        ids = [id(p) for p in params]
        if len(set(ids)) != len(ids):
            raise ContractError("a parameter was registered more than once")
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = [np.zeros_like(p.data) for p in params]
        self._v = [np.zeros_like(p.data) for p in params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, m, v in zip(self.params, self._m, self._v):
            if p.grad is None:
                raise ContractError("parameter has no gradient; run backward first")
            g = p.grad
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
