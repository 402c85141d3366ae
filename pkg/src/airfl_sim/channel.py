"""Scenario constants, device geometry, and cascaded-channel arithmetic.

The uplink from device i reaches the parameter server only through the RIS:
its effective channel is beta_i * h_p^H Theta h_r_i, where beta_i is the
product of the large-scale amplitude gains of the RIS-PS and device-RIS
links and h_p, h_r_i are i.i.d. CN(0, I_N) small-scale vectors, redrawn
every communication round (block fading).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rngstream import RngStream, complex_gaussian

# Amplitude gain at the 1 m reference distance, per link (+6 dB power each,
# folding in antenna/element gains).  Puts the default scenario in the regime
# where noise is visible at 0 dBm but does not swamp the other error terms.
DEFAULT_REFERENCE_GAIN = 10.0 ** (6.0 / 20.0)


@dataclass(frozen=True)
class SystemConfig:
    """All scenario constants for one experiment.

    Powers are in watts and apply per device (targets and interferers
    alike); the noise variance is always derived as noise_psd * bandwidth,
    never stored.
    """

    K: int = 20                    # target devices
    M: int = 10                    # interferers
    N: int = 256                   # RIS elements
    P_max: float = 1e-3            # W (0 dBm)
    noise_psd: float = 1e-17       # W/Hz (-140 dBm/Hz)
    bandwidth: float = 1e6         # Hz
    G: float = 1.0                 # gradient Euclidean-norm bound
    pathloss_exponent: float = 2.2
    ps_ris_distance: float = 200.0       # m
    device_disk_radius: float = 300.0    # m
    reference_gain: float = DEFAULT_REFERENCE_GAIN  # amplitude gain at 1 m
    seed: int = 0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.M < 0:
            raise ValueError(f"M must be >= 0, got {self.M}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        for name in ("P_max", "noise_psd", "bandwidth", "G",
                     "ps_ris_distance", "reference_gain"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.device_disk_radius < 0:
            raise ValueError("device_disk_radius must be >= 0")
        if self.pathloss_exponent < 0:
            raise ValueError("pathloss_exponent must be >= 0")

    @property
    def sigma2(self) -> float:
        """Noise variance sigma^2 = noise_psd * bandwidth, watts."""
        return self.noise_psd * self.bandwidth

    @property
    def n_devices(self) -> int:
        return self.K + self.M


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading draw shared by every operation in a round.

    h_p: (N,) RIS-to-PS small-scale vector.
    h_r: (K+M, N) device-to-RIS small-scale vectors, targets first.
    beta: (K+M,) large-scale amplitude coefficients.
    """

    h_p: np.ndarray
    h_r: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        if self.h_r.ndim != 2 or self.h_r.shape[1] != self.h_p.shape[0]:
            raise ValueError("h_r must be (devices, N) matching h_p length")
        if self.beta.shape != (self.h_r.shape[0],):
            raise ValueError("beta length must equal number of devices")
        if np.any(self.beta <= 0):
            raise ValueError("beta entries must be positive")


def amplitude_path_gain(distance: float, exponent: float, reference_gain: float) -> float:
    """Amplitude-domain path gain g0 * d^(-exponent/2).

    The power gain is then g0^2 * d^(-exponent).  Distances below the 1 m
    reference are rejected; callers clamp instead where a degenerate
    geometry is legitimate.
    """
    if distance < 1.0:
        raise ValueError(f"distance must be >= 1 m, got {distance}")
    return reference_gain * distance ** (-exponent / 2.0)


def draw_geometry(config: SystemConfig, stream: RngStream) -> np.ndarray:
    """Place all K+M devices uniformly in the disk around the RIS.

    Returns the (K+M,) vector of large-scale coefficients
    beta_i = gain(PS-RIS distance) * gain(device_i-RIS distance), the
    product of the two links' amplitude gains.  Device-RIS distances below
    1 m are clamped to 1 m.  Geometry is meant to be drawn once per
    experiment and held fixed; only small-scale fading is redrawn per round.
    """
    gen = stream.generator()
    n = config.n_devices
    # uniform over the disk: r = R * sqrt(u)
    r = config.device_disk_radius * np.sqrt(gen.uniform(size=n))
    r = np.maximum(r, 1.0)
    g_ps = amplitude_path_gain(config.ps_ris_distance, config.pathloss_exponent,
                               config.reference_gain)
    g_dev = config.reference_gain * r ** (-config.pathloss_exponent / 2.0)
    return g_ps * g_dev


def draw_realization(config: SystemConfig, betas: np.ndarray,
                     stream: RngStream) -> ChannelRealization:
    """Draw fresh i.i.d. small-scale vectors for one communication round."""
    betas = np.asarray(betas, dtype=float)
    if betas.shape != (config.n_devices,):
        raise ValueError(
            f"betas must have length K+M={config.n_devices}, got {betas.shape}")
    gen = stream.generator()
    h_p = complex_gaussian(gen, config.N)
    h_r = complex_gaussian(gen, (config.n_devices, config.N))
    return ChannelRealization(h_p=h_p, h_r=h_r, beta=betas)


def cascade_coefficients(h_p: np.ndarray, phases, h_r: np.ndarray) -> np.ndarray:
    """Complex reflection sums h_p^H Theta h_r for one or many devices.

    ``h_r`` may be a single (N,) vector or a (devices, N) matrix; the result
    is a complex scalar or (devices,) vector.
    """
    reflected = np.conj(h_p) * phases.reflection
    if h_r.shape[-1] != h_p.shape[0]:
        raise ValueError("h_r length must match h_p")
    return h_r @ reflected


def effective_coefficient(h_p: np.ndarray, phases, h_r: np.ndarray) -> float:
    """Re{ h_p^H Theta h_r }: the real cascaded gain of one device."""
    return float(np.real(cascade_coefficients(h_p, phases, np.asarray(h_r))))


def aggregation_coefficient(beta: float, p: float, lam: float, u: float) -> float:
    """beta * sqrt(p) * u / lambda, the gain multiplying one device's signal."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if p < 0:
        raise ValueError(f"power must be nonnegative, got {p}")
    return beta * np.sqrt(p) * u / lam
