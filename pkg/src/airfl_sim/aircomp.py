"""One over-the-air aggregation round: superposition, interference, noise.

Gradient entries ride on the real dimension of the complex baseband; the
estimate is Re{y}/lambda, so only the real parts of the cascaded gains
enter and the complex noise contributes half its power.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, cascade_coefficients
from .ris import RisPhases
from .rngstream import RngStream
from .schemes import SchemeParams

logger = logging.getLogger(__name__)

INTERFERENCE_MODES = ("random_unit", "zero_gradient_attack", "constant_unit")


@dataclass(frozen=True)
class GradientSet:
    """Local gradients of the K targets and the M unit-norm interferers."""

    targets: np.ndarray      # (K, D)
    interferers: np.ndarray  # (M, D), rows have unit Euclidean norm

    def __post_init__(self):
        t = np.atleast_2d(np.asarray(self.targets, dtype=float))
        i = np.asarray(self.interferers, dtype=float)
        if i.size == 0:
            i = np.zeros((0, t.shape[1]))
        i = np.atleast_2d(i)
        object.__setattr__(self, "targets", t)
        object.__setattr__(self, "interferers", i)
        if i.shape[0] and i.shape[1] != t.shape[1]:
            raise ValueError("interferers must share the gradient dimension")
        if i.shape[0]:
            norms = np.linalg.norm(i, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-9):
                raise ValueError("interference rows must have unit norm")

    @property
    def dim(self) -> int:
        return self.targets.shape[1]


@dataclass(frozen=True)
class RoundErrorStats:
    """Estimation error of one round and its squared norm."""

    epsilon: np.ndarray
    sq_norm: float


def make_interference(mode: str, M: int, D: int, context=None,
                      stream: RngStream | None = None) -> np.ndarray:
    """Build M unit-norm interference vectors of dimension D.

    random_unit: isotropic directions.  zero_gradient_attack: every
    interferer sends -context/||context|| (the attacker knows the previous
    round's aggregate and pushes it toward zero); with no usable context the
    mode falls back to random_unit and logs it.  constant_unit: the first
    basis vector.
    """
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    if mode not in INTERFERENCE_MODES:
        raise ValueError(f"unknown interference mode {mode!r}")
    if M == 0:
        return np.zeros((0, D))
    if mode == "zero_gradient_attack":
        c = None if context is None else np.asarray(context, dtype=float)
        if c is None or np.linalg.norm(c) == 0:
            logger.warning("zero-gradient attack has no context; "
                           "falling back to random_unit interference")
            mode = "random_unit"
        else:
            return np.tile(-c / np.linalg.norm(c), (M, 1))
    if mode == "constant_unit":
        out = np.zeros((M, D))
        out[:, 0] = 1.0
        return out
    if stream is None:
        raise ValueError("random_unit interference requires a stream")
    raw = stream.generator().standard_normal((M, D))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def ideal_round(grads: GradientSet) -> np.ndarray:
    """Error-free aggregation: the arithmetic mean of the target gradients."""
    return grads.targets.mean(axis=0)


def ota_round(grads: GradientSet, realization: ChannelRealization,
              phases: RisPhases, params: SchemeParams, sigma2: float,
              stream: RngStream) -> tuple[np.ndarray, RoundErrorStats]:
    """Simulate one over-the-air aggregation round.

    All devices share the single block-fading realization and phase
    configuration.  Returns the denoised gradient estimate and the error
    against the ideal mean.
    """
    if params.lam <= 0:
        raise ValueError("lambda must be positive")
    K = params.sqrt_p.shape[0]
    M = params.interferer_sqrt_p.shape[0]
    if grads.targets.shape[0] != K or grads.interferers.shape[0] != M:
        raise ValueError("gradient set does not match scheme dimensions")
    if realization.h_r.shape[0] != K + M:
        raise ValueError("realization does not cover all devices")

    c = cascade_coefficients(realization.h_p, phases, realization.h_r)
    gain_t = realization.beta[:K] * params.sqrt_p * c[:K]
    gain_m = realization.beta[K:] * params.interferer_sqrt_p * c[K:]
    y = gain_t @ grads.targets + 1j * 0.0
    if M:
        y = y + gain_m @ grads.interferers
    if sigma2 > 0:
        gen = stream.generator()
        noise = gen.standard_normal(grads.dim) + 1j * gen.standard_normal(grads.dim)
        y = y + noise * np.sqrt(sigma2 / 2.0)
    g_hat = np.real(y) / params.lam
    epsilon = g_hat - ideal_round(grads)
    return g_hat, RoundErrorStats(epsilon=epsilon,
                                  sq_norm=float(epsilon @ epsilon))
