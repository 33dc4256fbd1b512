"""Transform symbols and the spectral solver for the tempered Riesz diffusion.

Transform convention: the forward transform uses exp(+i*g*x),

    F(g) = int exp(i*g*x) f(x) dx,

so the tempered Riesz derivative acts as multiplication by the real, even,
nonpositive symbol

    psi(g) = C_alpha * 2|g| * (eta^2 + g^2)^(-(1-alpha)/2)
                      * sin((1 - alpha) * arctan(|g|/eta)),

with C_alpha = -1 / (2 cos(pi*alpha/2)).  For eta -> 0 the symbol tends to
-|g|^alpha, the untempered symmetric-stable case.  The normalizing constant
is kept independent of eta: only the eta -> 0 limit pins it down, and this
choice keeps psi <= 0 for every (alpha, eta).

Discrete fields sample one period of length n*h (grid spacing h, n nodes);
the frequency lattice is g_k = 2*pi*k/(n*h), the exact DFT frequencies for
that period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Grid1D, NumericalError, SampledField, TemperParams

__all__ = [
    "SpectralField",
    "laplace_symbol",
    "riesz_constant",
    "riesz_multiplier",
    "riesz_multiplier_expanded",
    "spectral_field",
    "riesz_apply",
    "solve_riesz_diffusion",
    "diffusion_grid",
]

_ALPHA_MAX = 0.999  # cos(pi*alpha/2) -> 0 as alpha -> 1


def laplace_symbol(lam, p: TemperParams):
    """Laplace exponent (eta + lam)^alpha - eta^alpha of the jump kernel.

    Equals int (1 - exp(-lam*y)) pi(dy); nonnegative, increasing and concave
    in lam >= 0.
    """
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0.0):
        raise ValueError("lambda must be >= 0")
    out = (p.eta + lam_arr) ** p.alpha - p.eta**p.alpha
    return out if isinstance(lam, np.ndarray) else float(out)


def riesz_constant(p: TemperParams) -> float:
    """Normalizing constant -1/(2 cos(pi*alpha/2)), independent of eta."""
    if p.alpha > _ALPHA_MAX:
        raise ValueError(
            f"alpha={p.alpha} too close to 1: the normalizing constant diverges"
        )
    return -1.0 / (2.0 * math.cos(math.pi * p.alpha / 2.0))


def riesz_multiplier(gamma, p: TemperParams):
    """Fourier symbol psi(g) of the tempered Riesz derivative.

    Even, psi(0) = 0, psi <= 0.  The eta = 0 branch returns -|g|^alpha
    directly instead of evaluating arctan(|g|/0).
    """
    g = np.abs(np.asarray(gamma, dtype=float))
    if p.eta == 0.0:
        out = -np.power(g, p.alpha)
    else:
        a, eta = p.alpha, p.eta
        theta = np.arctan2(g, eta)
        out = (
            riesz_constant(p)
            * 2.0
            * g
            * (eta * eta + g * g) ** (-(1.0 - a) / 2.0)
            * np.sin((1.0 - a) * theta)
        )
    return out if isinstance(gamma, np.ndarray) else float(out)


def riesz_multiplier_expanded(gamma, p: TemperParams):
    """Angle-difference expansion of psi(g); equal to riesz_multiplier.

    Uses |g|*cos(alpha*theta) - eta*sin(alpha*theta) with
    theta = arctan(|g|/eta); requires eta > 0.
    """
    if p.eta <= 0.0:
        raise ValueError("the expanded form needs eta > 0")
    g = np.abs(np.asarray(gamma, dtype=float))
    a, eta = p.alpha, p.eta
    theta = np.arctan2(g, eta)
    out = (
        riesz_constant(p)
        * 2.0
        * g
        * (eta * eta + g * g) ** (-(1.0 - a / 2.0))
        * (g * np.cos(a * theta) - eta * np.sin(a * theta))
    )
    return out if isinstance(gamma, np.ndarray) else float(out)


# ---------------------------------------------------------------------------
# discrete fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralField:
    """Real samples paired with their discrete Fourier data.

    coeffs[k] approximates int exp(i*freqs[k]*x) f(x) dx on one period.
    """

    grid: Grid1D
    values: np.ndarray
    freqs: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        n = self.grid.n
        for name in ("values", "freqs", "coeffs"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have length {n}, got {arr.shape}")


def _forward(values: np.ndarray, grid: Grid1D) -> tuple[np.ndarray, np.ndarray]:
    n, h = grid.n, grid.h
    freqs = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    coeffs = h * np.exp(1j * freqs * grid.lo) * n * np.fft.ifft(values)
    return freqs, coeffs


def _inverse(coeffs: np.ndarray, freqs: np.ndarray, grid: Grid1D) -> np.ndarray:
    n, h = grid.n, grid.h
    return np.fft.fft(coeffs * np.exp(-1j * freqs * grid.lo)) / (n * h)


def spectral_field(field: SampledField) -> SpectralField:
    """Attach discrete Fourier coefficients and frequencies to a field."""
    freqs, coeffs = _forward(field.values, field.grid)
    return SpectralField(field.grid, field.values, freqs, coeffs)


def riesz_apply(field: SpectralField, p: TemperParams) -> SpectralField:
    """Apply the tempered Riesz derivative as a Fourier multiplier.

    The field must be periodized: near-zero values at both domain edges.
    """
    vmax = max(1.0, float(np.max(np.abs(field.values))))
    edge = max(abs(float(field.values[0])), abs(float(field.values[-1])))
    if edge > 1e-10 * vmax:
        raise ValueError(
            f"boundary values ~{edge:.2e} are not negligible: periodization violated"
        )
    psi = riesz_multiplier(field.freqs, p)
    new_coeffs = field.coeffs * psi
    out = _inverse(new_coeffs, field.freqs, field.grid)
    scale = max(1.0, float(np.max(np.abs(out.real))))
    if float(np.max(np.abs(out.imag))) > 1e-9 * scale:
        raise NumericalError("inverse transform left a non-negligible imaginary part")
    return SpectralField(field.grid, out.real, field.freqs, new_coeffs)


# ---------------------------------------------------------------------------
# diffusion solver
# ---------------------------------------------------------------------------

def diffusion_grid(t: float, p: TemperParams, n: int | None = None) -> Grid1D:
    """Symmetric periodic grid sized for the diffusion at time t.

    Half-width 10*(1 + t^(1/alpha)); n is a power of two >= 2^10, chosen so
    the spectrum exp(t*psi) has decayed at the Nyquist frequency unless that
    would exceed 2^22 points.
    """
    if t <= 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    half_width = 10.0 * (1.0 + t ** (1.0 / p.alpha))
    if n is None:
        # want |psi(g_max)| * t ~ |g_max|^alpha * t >= 30 at g_max = pi*n/(2W)
        g_needed = (30.0 / t) ** (1.0 / p.alpha)
        n_needed = g_needed * 2.0 * half_width / math.pi
        n = int(min(2**22, max(2**10, 2 ** math.ceil(math.log2(max(n_needed, 1.0))))))
    h = 2.0 * half_width / n
    return Grid1D(-half_width, -half_width + (n - 1) * h, n)


def solve_riesz_diffusion(t: float, grid: Grid1D, p: TemperParams) -> SampledField:
    """Density at time t of the diffusion driven by the tempered Riesz operator.

    Inverse transform of exp(t * psi(g_k)) from a unit point mass at the
    origin.  The window must be wide enough: if the trapezoid mass over it
    deviates from 1 by more than 1e-4, the grid is rejected.
    """
    if t <= 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    n, h = grid.n, grid.h
    freqs = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    spectrum = np.exp(t * riesz_multiplier(freqs, p))
    u = np.fft.fft(spectrum * np.exp(-1j * freqs * grid.lo)) / (n * h)
    u = u.real
    mass = float(np.trapezoid(u, grid.points))
    if abs(mass - 1.0) > 1e-4:
        raise NumericalError(
            f"solution mass {mass:.6f} deviates from 1 by more than 1e-4: "
            "grid too small or too coarse"
        )
    return SampledField(grid, u)
