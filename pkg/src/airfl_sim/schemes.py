"""Transmit-power, RIS-weight, and denoising-factor selection.

Two proposed schemes make the gradient estimate unbiased despite
heterogeneous large-scale fading:

* power inversion -- each device scales its amplitude by 1/beta_k so all
  effective gains match the weakest device; RIS weights are uniform.
* weighted full power -- every device transmits at maximum power and the
  imbalance is offset inside the RIS alignment weights w_k = 1/(beta_k
  sqrt(P_k)).

Both choose the denoising factor lambda so that the expected aggregation
gain of every target is exactly 1/K.  Baselines (best-effort-voting power
control with random / round-robin phases, and a per-realization minimum-MSE
denoiser) are parameterized through the same value type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, SystemConfig, cascade_coefficients
from .ris import RisPhases

SCHEME_POWER_INVERSION = "power_inversion"
SCHEME_WEIGHTED_FULL_POWER = "weighted_full_power"
SCHEME_BEV = "bev"
SCHEME_BEV_MIN_MSE = "bev_min_mse"

PROPOSED_SCHEMES = (SCHEME_POWER_INVERSION, SCHEME_WEIGHTED_FULL_POWER)

# phase policies a scheme can be paired with
PHASE_ALIGNED = "aligned"
PHASE_RANDOM = "random"
PHASE_ROUND_ROBIN = "round_robin"


@dataclass(frozen=True)
class SchemeParams:
    """Transmit amplitudes, RIS weights, and denoising factor of one scheme.

    sqrt_p: (K,) per-target amplitude scaling sqrt(p_k).
    w: (K,) RIS weight factors (used only by the aligned phase policy).
    lam: denoising factor lambda > 0.
    interferer_sqrt_p: (M,) worst-case interferer amplitudes sqrt(P_m).
    """

    scheme_id: str
    sqrt_p: np.ndarray
    w: np.ndarray
    lam: float
    interferer_sqrt_p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sqrt_p", np.asarray(self.sqrt_p, dtype=float))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        object.__setattr__(self, "interferer_sqrt_p",
                           np.asarray(self.interferer_sqrt_p, dtype=float))
        if self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if np.any(self.w <= 0):
            raise ValueError("RIS weights must be positive")
        if np.any(self.sqrt_p < 0):
            raise ValueError("transmit amplitudes must be nonnegative")


def _check_betas(config: SystemConfig, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape[0] < config.K:
        raise ValueError(f"need at least K={config.K} beta values")
    if np.any(beta[:config.K] <= 0):
        raise ValueError("target beta values must be positive")
    return beta


def power_inversion_params(config: SystemConfig, beta) -> SchemeParams:
    """Scheme that inverts large-scale fading at the transmitter.

    sqrt(p_k) = zeta / beta_k with zeta = min_k(sqrt(P_k) beta_k) / G, unit
    RIS weights, and lambda = pi N sqrt(K) min_k(sqrt(P_k) beta_k) / (4 G).
    The power constraint p_k ||g||^2 <= p_k G^2 <= P_k holds by construction
    and the expected aggregation gain of every target is 1/K.
    """
    beta = _check_betas(config, beta)
    alpha = beta[:config.K] * np.sqrt(config.P_max)
    zeta = alpha.min() / config.G
    lam = np.pi * config.N * np.sqrt(config.K) * alpha.min() / (4.0 * config.G)
    return SchemeParams(
        scheme_id=SCHEME_POWER_INVERSION,
        sqrt_p=zeta / beta[:config.K],
        w=np.ones(config.K),
        lam=float(lam),
        interferer_sqrt_p=np.full(config.M, np.sqrt(config.P_max)),
    )


def weighted_full_power_params(config: SystemConfig, beta) -> SchemeParams:
    """Scheme that keeps full power and inverts fading in the RIS weights.

    sqrt(p_k) = sqrt(P_k) / G, w_k = 1 / (beta_k sqrt(P_k)), and
    lambda = pi N K / (4 G sqrt(sum w_k^2)); unbiased like power inversion
    but with better interference and noise suppression.
    """
    beta = _check_betas(config, beta)
    alpha = beta[:config.K] * np.sqrt(config.P_max)
    w = 1.0 / alpha
    lam = np.pi * config.N * config.K / (4.0 * config.G * np.sqrt((w**2).sum()))
    return SchemeParams(
        scheme_id=SCHEME_WEIGHTED_FULL_POWER,
        sqrt_p=np.full(config.K, np.sqrt(config.P_max) / config.G),
        w=w,
        lam=float(lam),
        interferer_sqrt_p=np.full(config.M, np.sqrt(config.P_max)),
    )


def bev_params(config: SystemConfig, beta, lambda_rule: str = "match_mean",
               phase_policy: str = PHASE_RANDOM, lam: float | None = None) -> SchemeParams:
    """Best-effort-voting power control: everyone transmits at maximum power.

    The cited policy fixes only the transmit side, so the receiver's
    denoising factor is a declared choice here:

    * ``match_mean`` picks lambda so the device-averaged expected
      aggregation gain equals 1/K under the paired phase policy.  For
      random phases that expectation is zero, so the rule falls back to
      matching the RMS of the aggregate gain instead,
      lambda = sqrt(N/2 * sum_k beta_k^2 p_k).
    * ``fixed`` uses the caller-supplied ``lam``.
    """
    beta = _check_betas(config, beta)
    sqrt_p = np.full(config.K, np.sqrt(config.P_max) / config.G)
    gains = beta[:config.K] * sqrt_p
    if lambda_rule == "fixed":
        if lam is None or lam <= 0:
            raise ValueError("fixed lambda rule requires a positive lam")
        lam_value = float(lam)
    elif lambda_rule == "match_mean":
        if phase_policy == PHASE_ALIGNED:
            # E[u_k] = pi N / (4 sqrt(K)) under unit weights
            lam_value = np.pi * config.N / (4.0 * np.sqrt(config.K)) * gains.sum()
        elif phase_policy == PHASE_ROUND_ROBIN:
            # aligned device rotates; mean over the schedule
            lam_value = np.pi * config.N / (4.0 * config.K) * gains.sum()
        elif phase_policy == PHASE_RANDOM:
            lam_value = np.sqrt(config.N / 2.0 * (gains**2).sum())
        else:
            raise ValueError(f"unknown phase policy {phase_policy!r}")
    else:
        raise ValueError(f"unknown lambda rule {lambda_rule!r}")
    return SchemeParams(
        scheme_id=SCHEME_BEV,
        sqrt_p=sqrt_p,
        w=np.ones(config.K),
        lam=float(lam_value),
        interferer_sqrt_p=np.full(config.M, np.sqrt(config.P_max)),
    )


def params_for(scheme_id: str, config: SystemConfig, beta,
               phase_policy: str = PHASE_ALIGNED) -> SchemeParams:
    """Build the parameters of any scheme by id.

    The min-MSE variant starts from BEV powers; its per-realization lambda
    is substituted by the caller round by round.
    """
    if scheme_id == SCHEME_POWER_INVERSION:
        return power_inversion_params(config, beta)
    if scheme_id == SCHEME_WEIGHTED_FULL_POWER:
        return weighted_full_power_params(config, beta)
    if scheme_id == SCHEME_BEV:
        return bev_params(config, beta, "match_mean", phase_policy)
    if scheme_id == SCHEME_BEV_MIN_MSE:
        return SchemeParams(
            scheme_id=SCHEME_BEV_MIN_MSE,
            sqrt_p=np.full(config.K, np.sqrt(config.P_max) / config.G),
            w=np.ones(config.K),
            lam=1.0,
            interferer_sqrt_p=np.full(config.M, np.sqrt(config.P_max)))
    raise ValueError(f"unknown scheme {scheme_id!r}")


def realized_gains(config: SystemConfig, realization: ChannelRealization,
                   phases: RisPhases, sqrt_p) -> tuple[np.ndarray, np.ndarray]:
    """Per-device real cascaded gains beta_i * sqrt(p_i) * u_i (lambda = 1).

    Returns (targets (K,), interferers (M,)); interferers at maximum power.
    """
    u = np.real(cascade_coefficients(realization.h_p, phases, realization.h_r))
    b_t = realization.beta[:config.K] * np.asarray(sqrt_p, dtype=float) * u[:config.K]
    b_m = realization.beta[config.K:] * np.sqrt(config.P_max) * u[config.K:]
    return b_t, b_m


def conditional_mse(lam: float, gain_targets, gain_interferers,
                    grad_power: float, noise_power: float, K: int) -> float:
    """MSE of the gradient estimate conditioned on realized gains.

    Gradients are modeled as i.i.d. with per-device power ``grad_power``;
    ``noise_power`` is the post-real-part noise energy sigma^2 * D / 2.
    """
    b_t = np.asarray(gain_targets, dtype=float)
    b_m = np.asarray(gain_interferers, dtype=float)
    return float(grad_power * ((b_t / lam - 1.0 / K) ** 2).sum()
                 + ((b_m**2).sum() + noise_power) / lam**2)


def min_mse_denoiser(config: SystemConfig, realization: ChannelRealization,
                     phases: RisPhases, sqrt_p, grad_power: float,
                     dim: int) -> float:
    """Denoising factor minimizing the conditional MSE for one realization.

    Least squares in x = 1/lambda gives

        lambda* = K * (grad_power * sum b_k^2 + sum b_m^2 + sigma^2 dim / 2)
                  / (grad_power * sum b_k),

    with b_i the realized gains.  Degenerate cases (all-zero or nonpositive
    signal correlation, where no positive minimizer exists) return 1.0.
    """
    b_t, b_m = realized_gains(config, realization, phases, sqrt_p)
    noise_power = config.sigma2 * dim / 2.0
    num = grad_power * b_t.sum() / config.K
    den = grad_power * (b_t**2).sum() + (b_m**2).sum() + noise_power
    if num <= 0.0 or den <= 0.0:
        return 1.0
    return float(den / num)
