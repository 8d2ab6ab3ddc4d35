"""Synthetic time-varying cascaded channel between a ULA base station and a
single-antenna user via a planar reflecting surface.

The BS-RIS link H is a time-invariant line-of-sight rank-1 matrix; the
RIS-UE link g(n) is a multipath sum whose per-path Doppler phase advances
linearly with the block index n.  The cascade C(n) = H diag(g(n)) is the
estimation target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .complexmat import matmul
from .errors import ShapeError

LIGHT_SPEED = 299_792_458.0


@dataclass(frozen=True)
class ScenarioParams:
    """Physical and system constants for one simulation scenario.

    `d` defaults to half the carrier wavelength.  Speeds are in m/s,
    frequencies in Hz, periods in seconds.
    """

    m: int = 2                 # BS antennas (ULA)
    n_v: int = 4               # RIS vertical extent
    n_h: int = 4               # RIS horizontal extent
    l_g: int = 5               # RIS-UE scattering paths
    speed: float = 100.0 / 3.6  # UE speed, 100 km/h
    carrier_hz: float = 28e9
    light_speed: float = LIGHT_SPEED
    sample_period_s: float = 50e-9   # 1 / (20 MHz bandwidth)
    block_uses: int = 200            # channel uses per quasi-static block
    spacing: float | None = None     # element spacing; None -> lambda/2

    def __post_init__(self):
        if min(self.m, self.n_v, self.n_h, self.l_g, self.block_uses) < 1:
            raise ValueError("counts must be >= 1")
        for name in ("carrier_hz", "light_speed", "sample_period_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        if self.spacing is not None and self.spacing <= 0:
            raise ValueError("spacing must be positive")

    @property
    def n(self) -> int:
        """Total RIS element count."""
        return self.n_v * self.n_h

    @property
    def wavelength(self) -> float:
        return self.light_speed / self.carrier_hz

    @property
    def d(self) -> float:
        return self.spacing if self.spacing is not None else self.wavelength / 2.0

    @property
    def block_period_s(self) -> float:
        return self.block_uses * self.sample_period_s


@dataclass(frozen=True)
class RayParams:
    """Ray parameters for one channel draw: the LoS BS-RIS ray plus l_g
    RIS-UE scattering paths."""

    alpha: complex              # BS-RIS complex gain
    psi: float                  # AoD at the BS (rad)
    phi_h: float                # RIS azimuth for H (rad)
    varphi_h: float             # RIS elevation for H (rad)
    beta: np.ndarray            # (l_g,) complex path gains
    tau: np.ndarray             # (l_g,) path delays (s)
    theta: np.ndarray           # (l_g,) motion-incidence angles (rad)
    phi_g: np.ndarray           # (l_g,) RIS azimuths for g (rad)
    varphi_g: np.ndarray        # (l_g,) RIS elevations for g (rad)

    def __post_init__(self):
        n_paths = len(self.beta)
        for name in ("tau", "theta", "phi_g", "varphi_g"):
            if len(getattr(self, name)) != n_paths:
                raise ShapeError(f"{name} must have one entry per path")


def draw_rays(scenario: ScenarioParams, rng: np.random.Generator,
              theta_range_deg: float = 20.0) -> RayParams:
    """Parametric ray draw: azimuths uniform(-pi/2, pi/2), elevations
    uniform(pi/4, 3pi/4), unit-variance circular complex gains, delays
    uniform(0, 100 ns), motion angles uniform within +/- theta_range_deg."""

    def cgain(size=None):
        return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)

    l_g = scenario.l_g
    theta_range = np.deg2rad(theta_range_deg)
    return RayParams(
        alpha=complex(cgain()),
        psi=rng.uniform(-np.pi / 2, np.pi / 2),
        phi_h=rng.uniform(-np.pi / 2, np.pi / 2),
        varphi_h=rng.uniform(np.pi / 4, 3 * np.pi / 4),
        beta=cgain(l_g),
        tau=rng.uniform(0.0, 100e-9, size=l_g),
        theta=rng.uniform(-theta_range, theta_range, size=l_g),
        phi_g=rng.uniform(-np.pi / 2, np.pi / 2, size=l_g),
        varphi_g=rng.uniform(np.pi / 4, 3 * np.pi / 4, size=l_g),
    )


def steering_ula(m: int, psi: float, d: float, wavelength: float) -> np.ndarray:
    """ULA steering vector (m, 1): entry k = exp(j 2 pi / lambda * d * k * sin psi)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    k = np.arange(m)
    return np.exp(1j * 2 * np.pi * d / wavelength * k * np.sin(psi)).reshape(m, 1)


def steering_upa(n_v: int, n_h: int, phi: float, varphi: float,
                 d: float, wavelength: float) -> np.ndarray:
    """UPA steering vector (n_v * n_h, 1) as elevation (x) azimuth Kronecker
    product; phase steps cos(varphi) vertically and sin(phi) cos(varphi)
    horizontally."""
    if n_v < 1 or n_h < 1:
        raise ValueError("array extents must be >= 1")
    step = 2 * np.pi * d / wavelength
    a_el = np.exp(1j * step * np.arange(n_v) * np.cos(varphi))
    a_az = np.exp(1j * step * np.arange(n_h) * np.sin(phi) * np.cos(varphi))
    return np.kron(a_el, a_az).reshape(n_v * n_h, 1)


def make_H(rays: RayParams, scenario: ScenarioParams) -> np.ndarray:
    """Rank-1 LoS BS-RIS channel: sqrt(MN) alpha a_A(psi) a_R(phi, varphi)^H."""
    a_bs = steering_ula(scenario.m, rays.psi, scenario.d, scenario.wavelength)
    a_ris = steering_upa(scenario.n_v, scenario.n_h, rays.phi_h, rays.varphi_h,
                         scenario.d, scenario.wavelength)
    return np.sqrt(scenario.m * scenario.n) * rays.alpha * (a_bs @ a_ris.conj().T)


def doppler_phase_step(scenario: ScenarioParams, theta: np.ndarray) -> np.ndarray:
    """Per-block Doppler phase increment 2 pi (v f / c) cos(theta) L_c T_s."""
    doppler_hz = scenario.speed * scenario.carrier_hz / scenario.light_speed
    return 2 * np.pi * doppler_hz * np.cos(theta) * scenario.block_period_s


def make_g(rays: RayParams, scenario: ScenarioParams, n: int) -> np.ndarray:
    """RIS-UE channel (n_total, 1) at block n (1-based):

    sqrt(N / L_g) * sum_i beta_i exp(j (n * dphi_i - 2 pi f tau_i)) a_R,i
    where dphi_i is the per-block Doppler phase step of path i.
    """
    if n < 1:
        raise ValueError("block index n is 1-based")
    phases = n * doppler_phase_step(scenario, rays.theta) \
        - 2 * np.pi * scenario.carrier_hz * rays.tau
    coeff = rays.beta * np.exp(1j * phases)
    g = np.zeros((scenario.n, 1), dtype=np.complex128)
    for i in range(scenario.l_g):
        a_ris = steering_upa(scenario.n_v, scenario.n_h, rays.phi_g[i],
                             rays.varphi_g[i], scenario.d, scenario.wavelength)
        g += coeff[i] * a_ris
    return np.sqrt(scenario.n / scenario.l_g) * g


def make_cascade(H: np.ndarray, g_seq: list[np.ndarray]) -> np.ndarray:
    """Cascaded sequence C(n) = H diag(g(n)) stacked as (L, M, N)."""
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 2:
        raise ShapeError("H must be 2-D")
    out = np.empty((len(g_seq), H.shape[0], H.shape[1]), dtype=np.complex128)
    for i, g in enumerate(g_seq):
        g = np.asarray(g, dtype=np.complex128).reshape(-1)
        if g.shape[0] != H.shape[1]:
            raise ShapeError(f"g length {g.shape[0]} != H columns {H.shape[1]}")
        out[i] = H * g[np.newaxis, :]  # right-multiplying by diag(g) scales columns
    return out


@dataclass(frozen=True, eq=False)
class ChannelSample:
    """One frame's ground truth: rays, H, the g(n) sequence, and the cascade."""

    rays: RayParams
    H: np.ndarray               # (M, N)
    g_seq: np.ndarray           # (L, N)
    C_seq: np.ndarray = field(default=None)  # (L, M, N); derived when omitted

    def __post_init__(self):
        if self.C_seq is None:
            cascade = make_cascade(self.H, list(self.g_seq[:, :, np.newaxis]))
            object.__setattr__(self, "C_seq", cascade)
        if self.C_seq.shape[0] != self.g_seq.shape[0]:
            raise ShapeError("C_seq and g_seq lengths differ")

    @property
    def num_blocks(self) -> int:
        return self.C_seq.shape[0]


def draw_channel_sample(scenario: ScenarioParams, num_blocks: int,
                        rng: np.random.Generator) -> ChannelSample:
    """Draw rays and materialize H, {g(n)} and {C(n)} for one frame."""
    rays = draw_rays(scenario, rng)
    H = make_H(rays, scenario)
    g_seq = np.stack([make_g(rays, scenario, n).ravel() for n in range(1, num_blocks + 1)])
    return ChannelSample(rays=rays, H=H, g_seq=g_seq)


def vectorize_cascade(C: np.ndarray) -> np.ndarray:
    """Column-major vectorization c(n) = vec(C(n)); the network input/label
    layout depends on this order, so it is fixed here."""
    C = np.asarray(C, dtype=np.complex128)
    if C.ndim != 2:
        raise ShapeError("expected one M x N cascade matrix")
    return C.flatten(order="F")


# matmul re-exported so cascade identities can be checked through the same
# shape-checked product used elsewhere.
__all__ = [
    "ScenarioParams", "RayParams", "ChannelSample",
    "draw_rays", "draw_channel_sample",
    "steering_ula", "steering_upa", "make_H", "make_g", "make_cascade",
    "doppler_phase_step", "vectorize_cascade", "matmul",
]
