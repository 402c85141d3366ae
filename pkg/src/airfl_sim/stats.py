"""Closed-form moments of the small set of distributions the analysis needs.

Each function here has a Monte Carlo oracle contract exercised in the test
suite: the closed form must agree with an independent sampled estimate.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def rayleigh_ratio_moment(rho: float) -> float:
    """E[x^2 / y] for a correlated pair of unit-power Rayleigh variables.

    x and y have mean sqrt(pi)/2 and variance (4 - pi)/4 (i.e. E[x^2] =
    E[y^2] = 1); their correlation coefficient is defined through the
    squared magnitudes, rho = E[x^2 y^2] - 1.  The moment evaluates to
    (sqrt(pi)/2) * (2 - rho).

    Only rho in [0, 1] is supported: that is the range realized by the
    |a| / |a + b| constructions this moment is used for.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    return 0.5 * np.sqrt(np.pi) * (2.0 - rho)


def min_exponential_rate(rate1: float, rate2: float) -> float:
    """Rate of min(x, y) for independent exponentials with the given rates."""
    if rate1 <= 0 or rate2 <= 0:
        raise ValueError(f"rates must be positive, got ({rate1}, {rate2})")
    return rate1 + rate2


def uniform_sum_pdf(z):
    """Density of x + y for independent x, y ~ U(0, 2*pi).

    Triangular on [0, 4*pi]: z / (4*pi^2) below 2*pi, (4*pi - z) / (4*pi^2)
    above, zero elsewhere.  Vectorized over ``z``.
    """
    z = np.asarray(z, dtype=float)
    rising = (z >= 0) & (z < TWO_PI)
    falling = (z >= TWO_PI) & (z <= 2 * TWO_PI)
    out = np.zeros_like(z)
    out = np.where(rising, z / TWO_PI**2, out)
    out = np.where(falling, (2 * TWO_PI - z) / TWO_PI**2, out)
    return out if out.ndim else float(out)


def uniform_diff_pdf(z):
    """Density of x - y for independent x, y ~ U(0, 2*pi).

    Triangular on [-2*pi, 2*pi] with peak 1/(2*pi) at zero.  Vectorized.
    """
    z = np.asarray(z, dtype=float)
    rising = (z >= -TWO_PI) & (z < 0)
    falling = (z >= 0) & (z <= TWO_PI)
    out = np.zeros_like(z)
    out = np.where(rising, (TWO_PI + z) / TWO_PI**2, out)
    out = np.where(falling, (TWO_PI - z) / TWO_PI**2, out)
    return out if out.ndim else float(out)
