"""Frame scheduling, pilot observation synthesis, and least-squares coarse
estimation.

Within each pilot block only the selected RIS elements are switched on,
the BS collects n_p pilot-symbol observations, and a row-orthonormal
control matrix Gamma makes the least-squares inverse a single product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexmat import vec
from .errors import ContractError, ScheduleError, ShapeError


@dataclass(frozen=True)
class FrameSchedule:
    """Pilot placement for one frame.

    Block and element indices are 1-based, matching the frame convention
    n = 1..L used throughout.
    """

    num_blocks: int                   # L
    pilot_blocks: tuple[int, ...]     # sorted subset of 1..L
    selected_elements: tuple[int, ...]  # sorted subset of 1..N, size N_s
    num_elements: int                 # N
    pilot_len: int                    # N_p
    power: float = 1.0                # P

    def __post_init__(self):
        blocks = self.pilot_blocks
        if not blocks or list(blocks) != sorted(set(blocks)):
            raise ScheduleError("pilot blocks must be a sorted non-empty set")
        if blocks[0] < 1 or blocks[-1] > self.num_blocks:
            raise ScheduleError("pilot blocks must lie within 1..L")
        elems = self.selected_elements
        if not elems or list(elems) != sorted(set(elems)):
            raise ScheduleError("selected elements must be a sorted non-empty set")
        if elems[0] < 1 or elems[-1] > self.num_elements:
            raise ScheduleError("selected elements must lie within 1..N")
        if self.pilot_len < self.num_selected:
            raise ScheduleError(
                f"pilot length {self.pilot_len} < selected-element count {self.num_selected}"
            )
        if self.power <= 0:
            raise ScheduleError("pilot power must be positive")

    @property
    def num_selected(self) -> int:
        return len(self.selected_elements)

    @property
    def r_t(self) -> float:
        return len(self.pilot_blocks) / self.num_blocks

    @property
    def r_a(self) -> float:
        return self.num_selected / self.num_elements

    @property
    def element_index(self) -> np.ndarray:
        """0-based column indices of the selected elements."""
        return np.asarray(self.selected_elements, dtype=int) - 1

    def to_dict(self) -> dict:
        return {
            "num_blocks": self.num_blocks,
            "pilot_blocks": list(self.pilot_blocks),
            "selected_elements": list(self.selected_elements),
            "num_elements": self.num_elements,
            "pilot_len": self.pilot_len,
            "power": self.power,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FrameSchedule":
        return cls(
            num_blocks=int(d["num_blocks"]),
            pilot_blocks=tuple(int(b) for b in d["pilot_blocks"]),
            selected_elements=tuple(int(e) for e in d["selected_elements"]),
            num_elements=int(d["num_elements"]),
            pilot_len=int(d["pilot_len"]),
            power=float(d["power"]),
        )


def _round_count(rate: float, size: int) -> int:
    # round-half-up, floored at 1 (Python's round() would round half to even)
    return max(1, int(np.floor(rate * size + 0.5)))


def _uniform_stride(size: int, count: int) -> tuple[int, ...]:
    stride = size // count
    return tuple(1 + k * stride for k in range(count))


def build_schedule(num_blocks: int, r_t: float, num_elements: int, r_a: float,
                   pilot_len: int | None = None, power: float = 1.0) -> FrameSchedule:
    """Uniformly strided pilot blocks and selected elements.

    Both sets start at index 1 with stride floor(size / count); pilot_len
    defaults to the selected-element count (the minimum admitting a
    row-orthonormal Gamma).
    """
    if not (0 < r_t <= 1) or not (0 < r_a <= 1):
        raise ScheduleError("sampling rates must lie in (0, 1]")
    n_pilot = _round_count(r_t, num_blocks)
    n_sel = _round_count(r_a, num_elements)
    if pilot_len is None:
        pilot_len = n_sel
    return FrameSchedule(
        num_blocks=num_blocks,
        pilot_blocks=_uniform_stride(num_blocks, n_pilot),
        selected_elements=_uniform_stride(num_elements, n_sel),
        num_elements=num_elements,
        pilot_len=pilot_len,
        power=power,
    )


def make_gamma(n_selected: int, pilot_len: int) -> np.ndarray:
    """First n_selected rows of the pilot_len-point unitary DFT matrix.

    Rows are orthonormal (Gamma Gamma^H = I) and every entry has modulus
    1/sqrt(pilot_len), i.e. phase-only control up to the common scaling.
    """
    if pilot_len < n_selected:
        raise ScheduleError("pilot length must be >= selected-element count")
    k = np.arange(n_selected).reshape(-1, 1)
    n = np.arange(pilot_len).reshape(1, -1)
    return np.exp(-2j * np.pi * k * n / pilot_len) / np.sqrt(pilot_len)


@dataclass(frozen=True)
class PilotObservation:
    """Received pilot matrix for one pilot block."""

    block: int                 # block index in 1..L
    Y: np.ndarray              # (M, N_p)
    gamma: np.ndarray          # (N_s, N_p)
    noise_var: float           # sigma_n^2
    pilot_len: int             # N_p
    power: float               # P


def snr_to_noise_var(power: float, snr_db: float | None) -> float:
    """SNR is defined as pilot power over noise variance; None means noiseless."""
    if snr_db is None:
        return 0.0
    return power / (10.0 ** (snr_db / 10.0))


def observe(C_block: np.ndarray, block: int, schedule: FrameSchedule,
            snr_db: float | None, rng: np.random.Generator) -> PilotObservation:
    """Synthesize Y = sqrt(P / N_p) C[:, selected] Gamma + V for one pilot
    block, with V iid circular complex normal of variance sigma_n^2."""
    if block not in schedule.pilot_blocks:
        raise ContractError(f"block {block} is not a pilot block")
    C_block = np.asarray(C_block, dtype=np.complex128)
    if C_block.shape[1] != schedule.num_elements:
        raise ShapeError("cascade block has wrong number of columns")
    C_sel = C_block[:, schedule.element_index]
    gamma = make_gamma(schedule.num_selected, schedule.pilot_len)
    noise_var = snr_to_noise_var(schedule.power, snr_db)
    Y = np.sqrt(schedule.power / schedule.pilot_len) * (C_sel @ gamma)
    if noise_var > 0:
        m, n_p = Y.shape
        V = np.sqrt(noise_var / 2.0) * (
            rng.standard_normal((m, n_p)) + 1j * rng.standard_normal((m, n_p))
        )
        Y = Y + V
    return PilotObservation(block=block, Y=Y, gamma=gamma, noise_var=noise_var,
                            pilot_len=schedule.pilot_len, power=schedule.power)


def ls_estimate(obs: PilotObservation) -> np.ndarray:
    """Least-squares coarse estimate sqrt(N_p / P) Y Gamma^H, shape (M, N_s).

    Exact when noiseless because Gamma Gamma^H = I.
    """
    return np.sqrt(obs.pilot_len / obs.power) * (obs.Y @ obs.gamma.conj().T)


def to_real_stack(c: np.ndarray) -> np.ndarray:
    """Layout of complex vectors on the network side: [Re(c); Im(c)]."""
    c = np.asarray(c, dtype=np.complex128).ravel()
    return np.concatenate([c.real, c.imag])


def from_real_stack(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size % 2 != 0:
        raise ShapeError("stacked vector must have even length")
    half = x.size // 2
    return x[:half] + 1j * x[half:]


def build_network_input(estimates: dict[int, np.ndarray],
                        schedule: FrameSchedule) -> np.ndarray:
    """Per-block network inputs x(n), shape (L, 2 M N_s).

    Pilot blocks carry the real/imag-stacked vectorized LS estimate; all
    other blocks are zero.  `estimates` maps pilot block -> (M, N_s) matrix.
    """
    missing = [b for b in schedule.pilot_blocks if b not in estimates]
    if missing:
        raise ContractError(f"missing LS estimates for pilot blocks {missing}")
    first = np.asarray(estimates[schedule.pilot_blocks[0]])
    dim = 2 * first.size
    x = np.zeros((schedule.num_blocks, dim))
    for block in schedule.pilot_blocks:
        est = np.asarray(estimates[block], dtype=np.complex128)
        if est.size * 2 != dim:
            raise ShapeError("inconsistent estimate sizes across pilot blocks")
        x[block - 1] = to_real_stack(vec(est))
    return x
