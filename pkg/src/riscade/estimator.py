"""The two-stage estimator.

Stage one walks the frame block by block: between blocks the hidden state
evolves under learned dynamics (RK4-integrated), at each block a GRU folds
in the observed input, and a decoder emits the sub-sampled channel
estimate.  Stage two lifts each per-block estimate to all elements through
two RK-shaped residual blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff
from .autodiff import Tensor, concat, tsum
from .errors import ContractError, ShapeError
from .nn import DenseLayer, Sequential
from .ode import DynamicsNet, RKResidualBlock, ode_solve
from .pilot import FrameSchedule


class GruCell:
    """Gated recurrent update; each gate is a two-layer network
    (affine -> tanh -> affine -> gate activation) on the concatenated
    [hidden, input] vector."""

    def __init__(self, gate_r: Sequential, gate_z: Sequential, gate_u: Sequential):
        self.gate_r = gate_r
        self.gate_z = gate_z
        self.gate_u = gate_u

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator) -> "GruCell":
        def gate(out_activation: str) -> Sequential:
            return Sequential([
                DenseLayer.init(hidden_dim + input_dim, hidden_dim, "tanh", rng),
                DenseLayer.init(hidden_dim, hidden_dim, out_activation, rng),
            ])

        return cls(gate_r=gate("sigmoid"), gate_z=gate("sigmoid"), gate_u=gate("tanh"))

    @property
    def hidden_dim(self) -> int:
        return self.gate_r.out_dim

    @property
    def input_dim(self) -> int:
        return self.gate_r.in_dim - self.hidden_dim

    def __call__(self, u_prev: Tensor, x: Tensor) -> Tensor:
        if u_prev.data.shape[-1] != self.hidden_dim:
            raise ShapeError("hidden state has wrong dimension")
        if x.data.shape[-1] != self.input_dim:
            raise ShapeError("input has wrong dimension")
        hx = concat([u_prev, x])
        r = self.gate_r(hx)
        z = self.gate_z(hx)
        u_tilde = self.gate_u(concat([r * u_prev, x]))
        return (1.0 - z) * u_prev + z * u_tilde

    def parameters(self) -> list[Tensor]:
        return (self.gate_r.parameters() + self.gate_z.parameters()
                + self.gate_u.parameters())


class ExtraNet:
    """Antenna-domain extrapolator: a linear lift from the sub-sampled
    width to the full width, then two RK residual blocks at full width."""

    def __init__(self, lift: DenseLayer, blocks: list[RKResidualBlock]):
        if len(blocks) != 2:
            raise ShapeError("the extrapolator uses exactly two RK blocks")
        for b in blocks:
            if b.dim != lift.out_dim:
                raise ShapeError("RK blocks must run at the lifted width")
        self.lift = lift
        self.blocks = blocks

    @classmethod
    def init(cls, in_dim: int, out_dim: int, rng: np.random.Generator,
             step: float = 1.0) -> "ExtraNet":
        lift = DenseLayer.init(in_dim, out_dim, "identity", rng)
        blocks = [RKResidualBlock.init(out_dim, rng, step=step) for _ in range(2)]
        # zeroed stages make both blocks start as the identity, so the
        # extrapolator begins as the linear lift and grows nonlinearity
        for block in blocks:
            for stage in block.stages:
                stage.weight.data[...] = 0.0
        return cls(lift, blocks)

    def __call__(self, x: Tensor) -> Tensor:
        y = self.lift(x)
        for block in self.blocks:
            y = block(y)
        return y

    def parameters(self) -> list[Tensor]:
        return self.lift.parameters() + [p for b in self.blocks for p in b.parameters()]


@dataclass(eq=False)
class EstimatorParams:
    """The four trainable groups: hidden-state dynamics, GRU, decoder,
    extrapolator, plus the dimension bookkeeping that chains them:
    input 2*M*N_s -> hidden -> 2*M*N_s -> 2*M*N."""

    m: int
    n: int
    n_s: int
    hidden_dim: int
    dynamics: DynamicsNet
    gru: GruCell
    decoder: Sequential
    extra: ExtraNet
    ode_steps: int = 1

    def __post_init__(self):
        d_sub = 2 * self.m * self.n_s
        d_full = 2 * self.m * self.n
        if self.gru.input_dim != d_sub:
            raise ShapeError("GRU input dim must be 2*M*N_s")
        if self.gru.hidden_dim != self.hidden_dim:
            raise ShapeError("GRU hidden dim mismatch")
        if self.dynamics.in_dim != self.hidden_dim:
            raise ShapeError("dynamics dim must equal the hidden dim")
        if self.decoder.in_dim != self.hidden_dim or self.decoder.out_dim != d_sub:
            raise ShapeError("decoder must map hidden -> 2*M*N_s")
        if self.extra.lift.in_dim != d_sub or self.extra.blocks[-1].dim != d_full:
            raise ShapeError("extrapolator must map 2*M*N_s -> 2*M*N")
        if self.ode_steps < 1:
            raise ValueError("ode_steps must be >= 1")

    @classmethod
    def init(cls, m: int, n: int, n_s: int, rng: np.random.Generator,
             hidden_dim: int | None = None, rk_step: float = 1.0,
             ode_steps: int = 1) -> "EstimatorParams":
        d_sub = 2 * m * n_s
        d_full = 2 * m * n
        d_h = d_sub if hidden_dim is None else hidden_dim
        decoder_dims = [d_h] + [d_sub] * 6
        return cls(
            m=m, n=n, n_s=n_s, hidden_dim=d_h,
            dynamics=DynamicsNet.init(d_h, rng),
            gru=GruCell.init(d_sub, d_h, rng),
            decoder=Sequential.init(decoder_dims, "tanh", rng),
            extra=ExtraNet.init(d_sub, d_full, rng, step=rk_step),
            ode_steps=ode_steps,
        )

    @property
    def input_dim(self) -> int:
        return 2 * self.m * self.n_s

    @property
    def output_dim(self) -> int:
        return 2 * self.m * self.n

    def named_parameters(self) -> dict[str, dict[str, Tensor]]:
        """Per-group name -> tensor maps, in a fixed order."""

        def seq(net) -> dict[str, Tensor]:
            out = {}
            for i, layer in enumerate(net.layers):
                out[f"layer{i}.weight"] = layer.weight
                out[f"layer{i}.bias"] = layer.bias
            return out

        gru = {}
        for gname, gate in (("r", self.gru.gate_r), ("z", self.gru.gate_z),
                            ("u", self.gru.gate_u)):
            for name, t in seq(gate).items():
                gru[f"gate_{gname}.{name}"] = t
        extra = {"lift.weight": self.extra.lift.weight,
                 "lift.bias": self.extra.lift.bias}
        for bi, block in enumerate(self.extra.blocks):
            for si, stage in enumerate(block.stages):
                extra[f"block{bi}.stage{si}.weight"] = stage.weight
                extra[f"block{bi}.stage{si}.bias"] = stage.bias
        return {
            "dynamics": seq(self.dynamics),
            "gru": gru,
            "decoder": seq(self.decoder),
            "extra": extra,
        }

    def parameters(self) -> list[Tensor]:
        return [t for group in self.named_parameters().values() for t in group.values()]

    def value_snapshot(self) -> dict[str, np.ndarray]:
        return {
            f"{g}/{name}": t.data.copy()
            for g, group in self.named_parameters().items()
            for name, t in group.items()
        }

    def load_values(self, snapshot: dict[str, np.ndarray]) -> None:
        for g, group in self.named_parameters().items():
            for name, t in group.items():
                value = snapshot[f"{g}/{name}"]
                if value.shape != t.data.shape:
                    raise ShapeError(f"checkpointed shape mismatch for {g}/{name}")
                t.data[...] = value

    def meta(self) -> dict:
        return {
            "m": self.m, "n": self.n, "n_s": self.n_s,
            "hidden_dim": self.hidden_dim,
            "rk_step": self.extra.blocks[0].step,
            "ode_steps": self.ode_steps,
        }


def interpolate_sequence(params: EstimatorParams, x_seq: np.ndarray,
                         schedule: FrameSchedule | None = None) -> list[Tensor]:
    """Time-domain pass: per-block sub-sampled channel estimates.

    x_seq is (L, D_x) or (B, L, D_x); block n lives at t = n, the hidden
    state starts at zero and is integrated across each unit block gap
    before the GRU folds in x(n).  Returns L tensors of width 2*M*N_s.
    """
    x_seq = np.asarray(x_seq, dtype=np.float64)
    if x_seq.ndim == 2:
        num_blocks = x_seq.shape[0]
        block_at = lambda i: Tensor(x_seq[i])
        hidden0 = np.zeros(params.hidden_dim)
    elif x_seq.ndim == 3:
        num_blocks = x_seq.shape[1]
        block_at = lambda i: Tensor(x_seq[:, i])
        hidden0 = np.zeros((x_seq.shape[0], params.hidden_dim))
    else:
        raise ShapeError("x_seq must be (L, D_x) or (B, L, D_x)")
    if x_seq.shape[-1] != params.input_dim:
        raise ShapeError("x width must be 2*M*N_s")
    if schedule is not None and schedule.num_blocks != num_blocks:
        raise ContractError("x_seq length does not match the schedule")

    u = Tensor(hidden0)
    outputs: list[Tensor] = []
    for i in range(num_blocks):
        u_mid = ode_solve(params.dynamics, u, float(i), float(i + 1), params.ode_steps)
        u = params.gru(u_mid, block_at(i))
        outputs.append(params.decoder(u))
    return outputs


def extrapolate(params: EstimatorParams, c_sub_hat: Tensor) -> Tensor:
    """Antenna-domain pass: lift one sub-sampled estimate to all elements."""
    return params.extra(c_sub_hat)


def forward_sequence(params: EstimatorParams, x_seq: np.ndarray,
                     schedule: FrameSchedule | None = None
                     ) -> tuple[list[Tensor], list[Tensor]]:
    sub = interpolate_sequence(params, x_seq, schedule)
    full = [extrapolate(params, c) for c in sub]
    return sub, full


def loss(params: EstimatorParams, batch, gamma: float = 1.0
         ) -> tuple[Tensor, Tensor, Tensor]:
    """Joint loss on one batch.

    `batch` is (x, c_sub, c_full) with shapes (B, L, 2MN_s), (B, L, 2MN_s),
    (B, L, 2MN).  Both terms are squared-error sums over the stacked
    real/imag values, scaled by 1 / (B * M * N_dim * L); the total is
    loss_t + gamma * loss_a.
    """
    x, c_sub, c_full = batch
    x = np.asarray(x, dtype=np.float64)
    c_sub = np.asarray(c_sub, dtype=np.float64)
    c_full = np.asarray(c_full, dtype=np.float64)
    if x.ndim != 3:
        raise ShapeError("batch arrays must be (B, L, feature)")
    if c_sub.shape[:2] != x.shape[:2] or c_full.shape[:2] != x.shape[:2]:
        raise ShapeError("batch sequences must agree on (B, L)")
    if c_sub.shape[-1] != 2 * params.m * params.n_s:
        raise ShapeError("sub-sampled labels have wrong width")
    if c_full.shape[-1] != 2 * params.m * params.n:
        raise ShapeError("full labels have wrong width")

    batch_size, num_blocks = x.shape[:2]
    sub_hat, full_hat = forward_sequence(params, x)

    sq_t: Tensor | None = None
    sq_a: Tensor | None = None
    for i in range(num_blocks):
        dt = sub_hat[i] - Tensor(c_sub[:, i])
        da = full_hat[i] - Tensor(c_full[:, i])
        st = tsum(dt * dt)
        sa = tsum(da * da)
        sq_t = st if sq_t is None else sq_t + st
        sq_a = sa if sq_a is None else sq_a + sa

    loss_t = sq_t * (1.0 / (batch_size * params.m * params.n_s * num_blocks))
    loss_a = sq_a * (1.0 / (batch_size * params.m * params.n * num_blocks))
    loss_s = loss_t + gamma * loss_a
    return loss_t, loss_a, loss_s


def predict_full(params: EstimatorParams, x_seq: np.ndarray) -> np.ndarray:
    """Tape-free forward; returns full-channel estimates as (B, L, 2MN)
    (or (L, 2MN) for a single sequence)."""
    with autodiff.no_grad():
        _, full = forward_sequence(params, x_seq)
    stacked = np.stack([t.data for t in full])
    if stacked.ndim == 3:       # (L, B, D) -> (B, L, D)
        return np.transpose(stacked, (1, 0, 2))
    return stacked
