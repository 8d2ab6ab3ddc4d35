"""Fixed-step integration of learned dynamics and the Runge-Kutta-shaped
residual block.

Both paths are built from taped tensor ops, so gradients flow through the
unrolled solver steps exactly (discretize-then-optimize).
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .autodiff import Tensor
from .errors import DivergenceError, ShapeError
from .nn import DenseLayer, Sequential


class DynamicsNet(Sequential):
    """Learned autonomous hidden-state dynamics f(xi): three
    width-preserving tanh layers."""

    @classmethod
    def init(cls, dim: int, rng: np.random.Generator) -> "DynamicsNet":
        return cls.init_dims([dim, dim, dim, dim], rng)

    @classmethod
    def init_dims(cls, dims: list[int], rng: np.random.Generator) -> "DynamicsNet":
        if dims[0] != dims[-1]:
            raise ShapeError("dynamics must preserve the state dimension")
        net = Sequential.init(dims, "tanh", rng)
        # start at f = 0 so the initial flow is the identity; the output
        # layer un-freezes the rest after the first optimizer step
        net.layers[-1].weight.data[...] = 0.0
        return cls(net.layers)


def _check_finite(xi: Tensor) -> None:
    if not np.all(np.isfinite(xi.data)):
        raise DivergenceError("ODE state became non-finite")


def ode_solve(f: Callable[[Tensor], Tensor], xi0: Tensor,
              t_start: float, t_end: float, steps: int) -> Tensor:
    """Classic RK4 integration of d(xi)/dt = f(xi) over [t_start, t_end]
    with `steps` uniform steps.  Differentiable through the unrolled loop."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t_end < t_start:
        raise ValueError("t_end must be >= t_start")
    h = (t_end - t_start) / steps
    xi = xi0
    for _ in range(steps):
        k1 = f(xi)
        k2 = f(xi + (0.5 * h) * k1)
        k3 = f(xi + (0.5 * h) * k2)
        k4 = f(xi + h * k3)
        xi = xi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(xi)
    return xi


class RKResidualBlock:
    """Dimension-preserving residual block patterned on one RK4 step:

    out = x + (h/6)(k1 + 2 k2 + 2 k3 + k4) with k1 = s1(x),
    k2 = s2(x + h/2 k1), k3 = s3(x + h/2 k2), k4 = s4(x + h k3).

    The four stage networks carry independent weights.
    """

    def __init__(self, stages: list[DenseLayer], step: float = 1.0):
        if len(stages) != 4:
            raise ShapeError("an RK residual block has exactly four stages")
        dim = stages[0].in_dim
        for s in stages:
            if s.in_dim != dim or s.out_dim != dim:
                raise ShapeError("all stages must preserve the block dimension")
        self.stages = stages
        self.step = float(step)

    @classmethod
    def init(cls, dim: int, rng: np.random.Generator,
             step: float = 1.0, activation: str = "tanh") -> "RKResidualBlock":
        stages = [DenseLayer.init(dim, dim, activation, rng) for _ in range(4)]
        return cls(stages, step)

    @property
    def dim(self) -> int:
        return self.stages[0].in_dim

    def __call__(self, x: Tensor) -> Tensor:
        if x.data.shape[-1] != self.dim:
            raise ShapeError(f"input dim {x.data.shape[-1]} != block dim {self.dim}")
        h = self.step
        s1, s2, s3, s4 = self.stages
        k1 = s1(x)
        k2 = s2(x + (0.5 * h) * k1)
        k3 = s3(x + (0.5 * h) * k2)
        k4 = s4(x + h * k3)
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def parameters(self) -> list[Tensor]:
        return [p for s in self.stages for p in s.parameters()]
