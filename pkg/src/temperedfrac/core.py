"""Shared parameter, grid, and sampling types used by every other module.

All types are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


class NumericalError(RuntimeError):
    """A numerical procedure failed to meet its accuracy contract.

    Raised for quadrature non-convergence, mass-check failures and similar
    conditions where the inputs were valid but the computation could not be
    completed to the requested accuracy.  Input validation problems raise
    ValueError instead.
    """


@dataclass(frozen=True)
class TemperParams:
    """Fractional order alpha in (0, 1) and tempering rate eta >= 0.

    eta = 0 recovers the untempered (classical) operators.
    """

    alpha: float
    eta: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (math.isfinite(self.eta) and self.eta >= 0.0):
            raise ValueError(f"eta must be finite and >= 0, got {self.eta}")


@dataclass(frozen=True)
class DriftSpec:
    """Drift mu and start point x0 of a drifted Brownian motion.

    The tempering rate eta = mu^2/4 is always recomputed from mu, never
    stored, so inconsistent (mu, eta) pairs cannot be constructed.
    """

    mu: float
    x0: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")
        if not math.isfinite(self.x0):
            raise ValueError(f"x0 must be finite, got {self.x0}")

    @property
    def eta(self) -> float:
        return 0.25 * self.mu * self.mu

    @property
    def sqrt_eta(self) -> float:
        return 0.5 * abs(self.mu)


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D grid: n points lo + i*h with h = (hi - lo)/(n - 1)."""

    lo: float
    hi: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"grid needs at least 2 points, got n={self.n}")
        if not self.hi > self.lo:
            raise ValueError(f"grid needs hi > lo, got [{self.lo}, {self.hi}]")

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return self.lo + self.h * np.arange(self.n)


def make_grid(lo: float, hi: float, n: int) -> Grid1D:
    """Build a uniform grid with exact endpoints; rejects n < 2 or hi <= lo."""
    return Grid1D(float(lo), float(hi), int(n))


def _frozen_array(values, n: int | None = None) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if n is not None and arr.shape != (n,):
        raise ValueError(f"expected {n} values, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SampledField:
    """Real samples, one per node of a uniform grid."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.values, self.grid.n)
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must all be finite")
        object.__setattr__(self, "values", arr)


def sample_on_grid(f: Callable[[float], float], grid: Grid1D) -> SampledField:
    """Sample f at every grid node; rejects non-finite values at any node."""
    pts = grid.points
    try:
        vals = np.asarray(f(pts), dtype=float)
        if vals.shape != pts.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(f(x)) for x in pts])
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.isfinite(vals)][0]
        raise ValueError(f"f is not finite at grid node x={bad}")
    return SampledField(grid, vals)


@dataclass(frozen=True)
class QuadConfig:
    """Accuracy controls for the singular increment quadratures.

    eps        inner cutoff: on [0, eps] the increment is replaced by its
               Taylor term and integrated against exact kernel moments
    wmax       outer truncation; None means "choose from the tail bound",
               which needs f_sup when eta = 0 (power-law tail)
    abs_tol    target absolute error
    max_subdiv adaptive subdivision cap for the middle region
    f_sup      optional user-supplied sup-norm bound on f, used only for
               tail truncation estimates
    """

    eps: float = 1e-6
    wmax: float | None = None
    abs_tol: float = 1e-8
    max_subdiv: int = 2000
    f_sup: float | None = None

    def __post_init__(self) -> None:
        if not self.eps > 0.0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if self.wmax is not None and not self.wmax > self.eps:
            raise ValueError(f"wmax must exceed eps, got {self.wmax} <= {self.eps}")
        if not self.abs_tol > 0.0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.max_subdiv < 1:
            raise ValueError(f"max_subdiv must be >= 1, got {self.max_subdiv}")
        if self.f_sup is not None and not self.f_sup >= 0.0:
            raise ValueError(f"f_sup must be >= 0, got {self.f_sup}")
