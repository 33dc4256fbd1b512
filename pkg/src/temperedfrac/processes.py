"""Closed-form densities and transforms of the underlying processes.

The Brownian generator is the full Laplacian d^2/dx^2, so the heat kernel
has variance 2t:

    g(x, y, t) = exp(-(y-x)^2 / (4t)) / sqrt(4 pi t).

All drifted and folded densities below follow that scaling convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import erfcx

from .core import DriftSpec

__all__ = [
    "EvalPoint",
    "heat_kernel",
    "drifted_density",
    "folded_drifted_density",
    "sign_weight",
    "g_laplace",
    "mittag_leffler_half",
]


@dataclass(frozen=True)
class EvalPoint:
    """Source x, target y, and time t > 0 of a density evaluation."""

    x: float
    y: float
    t: float

    def __post_init__(self) -> None:
        if not self.t > 0.0:
            raise ValueError(f"t must be > 0, got {self.t}")


def heat_kernel(pt: EvalPoint) -> float:
    """Gaussian transition density with mean x and variance 2t."""
    d = pt.y - pt.x
    return math.exp(-d * d / (4.0 * pt.t)) / math.sqrt(4.0 * math.pi * pt.t)


def drifted_density(pt: EvalPoint, d: DriftSpec) -> float:
    """Density at y of B(t) + mu*t + x: the heat kernel shifted by mu*t."""
    z = pt.y - pt.x - d.mu * pt.t
    return math.exp(-z * z / (4.0 * pt.t)) / math.sqrt(4.0 * math.pi * pt.t)


def folded_drifted_density(pt: EvalPoint, d: DriftSpec) -> float:
    """Density at y >= x of |B(t) + mu*t| + x: a sum of two tilted Gaussians.

    On the diagonal y = x it equals exp(-eta*t)/sqrt(pi*t) with eta = mu^2/4.
    """
    if pt.y < pt.x:
        raise ValueError(f"folded density needs y >= x, got y={pt.y} < x={pt.x}")
    if pt.x < 0.0:
        raise ValueError(f"folded density needs x >= 0, got x={pt.x}")
    z1 = pt.y - pt.x - d.mu * pt.t
    z2 = pt.y - pt.x + d.mu * pt.t
    norm = math.sqrt(4.0 * math.pi * pt.t)
    return (math.exp(-z1 * z1 / (4.0 * pt.t)) + math.exp(-z2 * z2 / (4.0 * pt.t))) / norm


def sign_weight(x: float, y: float) -> float:
    """+1 on the closed set x <= y, -1 on x > y."""
    return 1.0 if x <= y else -1.0


def g_laplace(x: float, y: float, lam: float) -> float:
    """Laplace transform in t of the heat kernel: exp(-|y-x| sqrt(lam)) / (2 sqrt(lam))."""
    if not lam > 0.0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    s = math.sqrt(lam)
    return math.exp(-abs(y - x) * s) / (2.0 * s)


def mittag_leffler_half(z: float) -> float:
    """E_{1/2}(-z) = exp(z^2) erfc(z) for z >= 0.

    Decreases monotonically from 1 to 0; evaluated through the scaled
    complementary error function, which avoids overflow of exp(z^2).
    """
    if z < 0.0:
        raise ValueError(f"z must be >= 0, got {z}")
    return float(erfcx(z))
