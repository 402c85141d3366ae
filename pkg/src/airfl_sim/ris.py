"""RIS phase-shift policies: coherent alignment, baselines, hardware effects."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RisPhases:
    """Per-element phase shifts theta_n, normalized to [0, 2*pi).

    The induced reflection matrix is diag(e^{j theta_1}, ..., e^{j theta_N});
    all entries have unit modulus by construction.
    """

    theta: np.ndarray

    def __post_init__(self):
        theta = np.mod(np.asarray(self.theta, dtype=float), TWO_PI)
        # np.mod maps tiny negative angles to exactly 2*pi; fold them back
        theta[theta >= TWO_PI] = 0.0
        object.__setattr__(self, "theta", theta)

    @property
    def n_elements(self) -> int:
        return self.theta.shape[0]

    @property
    def reflection(self) -> np.ndarray:
        """Diagonal of the reflection matrix, e^{j theta_n}."""
        return np.exp(1j * self.theta)


def alignment_phases(h_p: np.ndarray, h_r_targets: np.ndarray,
                     w: np.ndarray) -> RisPhases:
    """Weighted coherent alignment rule.

    theta_n = -angle(conj(h_p[n])) + angle(sum_k w_k * conj(h_r_targets[k, n])).

    With these phases the effective gain of every target device is positive
    in expectation while any channel independent of the targets' keeps zero
    mean, which is what statistically suppresses interference.  The rule is
    invariant to a common positive rescaling of ``w`` (only the angle of the
    weighted sum matters).  A zero-magnitude weighted sum at some element is
    a probability-zero event under continuous fading; its angle is taken as
    0 so Monte Carlo loops stay total.
    """
    w = np.asarray(w, dtype=float)
    h_r_targets = np.atleast_2d(np.asarray(h_r_targets))
    if np.any(w <= 0):
        raise ValueError("weight factors must be positive")
    if w.shape[0] != h_r_targets.shape[0]:
        raise ValueError("one weight per target channel required")
    if h_r_targets.shape[1] != h_p.shape[0]:
        raise ValueError("channel vector lengths must agree")
    weighted = (w[:, None] * np.conj(h_r_targets)).sum(axis=0)
    theta = -np.angle(np.conj(h_p)) + np.angle(weighted)
    return RisPhases(theta)


def random_phases(n: int, stream) -> RisPhases:
    """i.i.d. uniform phases on [0, 2*pi) -- the non-configured baseline."""
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    return RisPhases(stream.generator().uniform(0.0, TWO_PI, size=n))


def round_robin_phases(h_p: np.ndarray, h_r_k: np.ndarray) -> RisPhases:
    """Align to a single scheduled device (K=1 case of the coherent rule).

    The caller rotates the scheduled device's channel in, one per round.
    """
    return alignment_phases(h_p, np.asarray(h_r_k)[None, :], np.ones(1))


def quantize_phases(phases: RisPhases, bits: int) -> RisPhases:
    """Snap each phase to the nearest multiple of 2*pi / 2^bits.

    Ties go toward the smaller grid value; the per-element error is at most
    pi / 2^bits.  Idempotent.
    """
    if bits < 1:
        raise ValueError(f"bits must be >= 1, got {bits}")
    levels = 2 ** bits
    step = TWO_PI / levels
    idx = np.ceil(phases.theta / step - 0.5)
    return RisPhases(np.mod(idx, levels) * step)


def jitter_phases(phases: RisPhases, deviation: float, stream) -> RisPhases:
    """Add i.i.d. uniform phase noise on [-deviation, +deviation]."""
    if deviation < 0:
        raise ValueError("deviation must be >= 0")
    if deviation == 0:
        return phases
    noise = stream.generator().uniform(-deviation, deviation, size=phases.n_elements)
    return RisPhases(phases.theta + noise)
