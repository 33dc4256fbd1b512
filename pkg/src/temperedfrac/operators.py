"""Tempered fractional derivative operators.

Pointwise operators (Marchaud, upper/lower Weyl, symmetric Riesz) evaluate
increment integrals

    int_0^inf  (difference of f around x) * kernel(w) dw

against the jump kernel

    pi(w) = alpha * exp(-eta*w) / (Gamma(1-alpha) * w^(alpha+1))

and, for the Weyl/Riesz forms, the additional order-(alpha-1) kernel

    m(w)  = exp(-eta*w) / (Gamma(1-alpha) * w^alpha).

The quadrature splits three ways:

  [0, eps]      increment replaced by its Taylor term (f'(x)*w, or
                -f''(x)*w^2 for second differences) and integrated against
                exact kernel moments (lower incomplete gamma);
  [eps, wmax]   adaptive Gauss-Kronrod subdivision, log-substituted on wide
                ranges;
  [wmax, inf)   the f(x) part of the increment is integrated analytically
                (upper incomplete gamma tail mass); the remaining f(x -+ w)
                part is dropped, with worst case bounded by f_sup times the
                tail mass.

Sign conventions: the backward-difference form uses f(x) - f(x-w) and the
forward form f(x) - f(x+w), so that both one-sided operators annihilate
constants, act on exp(s*x) as positive multiples of the symbol, and are
mirror images of each other under x -> -x.  The symmetric Riesz form uses
the second difference 2*f(x) - f(x-w) - f(x+w).

Time-fractional derivatives of order 1/2 use the L1 product-integration
scheme for the Caputo form (piecewise-linear interpolant, exact kernel
moments); the Riemann-Liouville value adds the initial-value term
f(0) * t^(-1/2) / sqrt(pi) analytically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.signal import fftconvolve
from scipy.special import gamma as _gamma, gammainc, gammaincc

from .core import Grid1D, NumericalError, QuadConfig, SampledField, TemperParams
from .spectral import riesz_constant

__all__ = [
    "TimeSeries",
    "marchaud_tempered",
    "weyl_plus_tempered",
    "weyl_minus_tempered",
    "riesz_tempered_pointwise",
    "caputo_half",
    "rl_half",
    "tempered_rl_half",
    "evaluate_on_grid",
]

_ETA_T_OVERFLOW = 700.0  # exp overflow guard for the tempered RL definition


# ---------------------------------------------------------------------------
# kernel moments and tail masses (closed forms)
# ---------------------------------------------------------------------------

def _upper_gamma(a: float, z: float) -> float:
    # Gamma(a, z) for a > 0
    return _gamma(a) * gammaincc(a, z)


def _lower_gamma(a: float, z: float) -> float:
    return _gamma(a) * gammainc(a, z)


def _pi_tail_mass(p: TemperParams, w: float) -> float:
    """int_w^inf pi(s) ds via Gamma(-alpha, .) recurrence."""
    a, eta = p.alpha, p.eta
    if eta == 0.0:
        return w ** (-a) / _gamma(1.0 - a)
    return (w ** (-a) * math.exp(-eta * w) - eta**a * _upper_gamma(1.0 - a, eta * w)) / _gamma(1.0 - a)


def _m_tail_mass(p: TemperParams, w: float) -> float:
    """int_w^inf m(s) ds; only used multiplied by eta, so eta = 0 returns 0."""
    a, eta = p.alpha, p.eta
    if eta == 0.0:
        return 0.0
    return eta ** (a - 1.0) * _upper_gamma(1.0 - a, eta * w) / _gamma(1.0 - a)


def _head_moment(p: TemperParams, eps: float, order: int, with_eta_term: bool) -> float:
    """int_0^eps w^order * kernel(w) dw for the combined kernel.

    order = 1 pairs with first differences, order = 2 with second ones.
    For the jump kernel the integrand is w^(order-alpha-1)*exp(-eta*w),
    whose head integral is eta^(alpha-order) * lower_gamma(order-alpha, .).
    """
    a, eta = p.alpha, p.eta
    ga1 = _gamma(1.0 - a)
    if eta == 0.0:
        out = a / ga1 * eps ** (order - a) / (order - a)
        if with_eta_term:
            pass  # the eta * m(w) term vanishes at eta = 0
        return out
    out = a / ga1 * eta ** (a - order) * _lower_gamma(order - a, eta * eps)
    if with_eta_term:
        out += eta / ga1 * eta ** (a - order - 1) * _lower_gamma(order + 1 - a, eta * eps)
    return out


def _combined_kernel(p: TemperParams, with_eta_term: bool) -> Callable[[np.ndarray], np.ndarray]:
    a, eta = p.alpha, p.eta
    ga1 = _gamma(1.0 - a)

    def kern(w):
        out = a * np.exp(-eta * w) * w ** (-a - 1.0) / ga1
        if with_eta_term and eta > 0.0:
            out = out + eta * np.exp(-eta * w) * w ** (-a) / ga1
        return out

    return kern


def _tail_mass(p: TemperParams, w: float, with_eta_term: bool) -> float:
    out = _pi_tail_mass(p, w)
    if with_eta_term:
        out += p.eta * _m_tail_mass(p, w)
    return out


def _choose_wmax(p: TemperParams, q: QuadConfig, f_scale: float, with_eta_term: bool) -> float:
    """Smallest truncation point with 2*f_sup*tail_mass < abs_tol/10."""
    if q.wmax is not None:
        return q.wmax
    f_sup = q.f_sup if q.f_sup is not None else max(1.0, f_scale)
    target = q.abs_tol / 10.0
    if p.eta == 0.0:
        if q.f_sup is None:
            raise ValueError(
                "eta = 0 has a power-law kernel tail: supply QuadConfig.f_sup "
                "or an explicit QuadConfig.wmax"
            )
        # 2*f_sup*w^-alpha/Gamma(1-alpha) < target
        return (2.0 * f_sup / (_gamma(1.0 - p.alpha) * target)) ** (1.0 / p.alpha)
    w = max(1.0, 2.0 * q.eps)
    for _ in range(200):
        if 2.0 * f_sup * _tail_mass(p, w, with_eta_term) < target:
            return w
        w *= 1.5
    raise NumericalError("could not find a truncation point meeting the tail bound")


# ---------------------------------------------------------------------------
# adaptive middle region
# ---------------------------------------------------------------------------

def _quad_piece(g: Callable, a: float, b: float, q: QuadConfig) -> tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                g, a, b, epsabs=q.abs_tol / 4.0, epsrel=1e-11, limit=q.max_subdiv
            )
        except integrate.IntegrationWarning as exc:
            raise NumericalError(
                f"quadrature did not converge on [{a:g}, {b:g}] within "
                f"max_subdiv={q.max_subdiv}: {exc}"
            ) from None
    if not math.isfinite(val):
        raise NumericalError("quadrature produced a non-finite value (unbounded f?)")
    return val, err


def _middle_integral(g: Callable, lo: float, hi: float, q: QuadConfig) -> tuple[float, float]:
    """Adaptive integral of g on [lo, hi]; log-substituted beyond w = 1."""
    if hi <= lo:
        return 0.0, 0.0
    split = min(hi, max(1.0, 4.0 * lo))
    val, err = _quad_piece(g, lo, split, q)
    if hi > split:
        if hi / split > 50.0:
            gv, ge = _quad_piece(lambda u: g(math.exp(u)) * math.exp(u), math.log(split), math.log(hi), q)
        else:
            gv, ge = _quad_piece(g, split, hi, q)
        val += gv
        err += ge
    return val, err


# ---------------------------------------------------------------------------
# increment integral driver
# ---------------------------------------------------------------------------

def _finite(v: float, where: str) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise NumericalError(f"f evaluated to a non-finite value {where}")
    return v


def _increment_integral(
    f: Callable[[float], float],
    x: float,
    p: TemperParams,
    q: QuadConfig,
    side: str,
    with_eta_term: bool,
) -> float:
    """Integrate the requested difference of f against the combined kernel.

    side = "minus"  : f(x) - f(x-w)
    side = "plus"   : f(x) - f(x+w)
    side = "second" : 2 f(x) - f(x-w) - f(x+w)
    """
    fx = _finite(f(x), f"at x={x}")
    delta = q.eps / 10.0
    kern = _combined_kernel(p, with_eta_term)

    if side == "second":
        fdd = (_finite(f(x + delta), "near x") - 2.0 * fx + _finite(f(x - delta), "near x")) / delta**2
        head = -fdd * _head_moment(p, q.eps, 2, with_eta_term)

        def diff(w):
            return 2.0 * fx - f(x - w) - f(x + w)

        n_dropped = 2.0
    else:
        fd = (_finite(f(x + delta), "near x") - _finite(f(x - delta), "near x")) / (2.0 * delta)
        sgn = 1.0 if side == "minus" else -1.0
        head = sgn * fd * _head_moment(p, q.eps, 1, with_eta_term)

        if side == "minus":
            def diff(w):
                return fx - f(x - w)
        else:
            def diff(w):
                return fx - f(x + w)

        n_dropped = 1.0

    wmax = _choose_wmax(p, q, abs(fx), with_eta_term)
    mid, mid_err = _middle_integral(lambda w: diff(w) * kern(w), q.eps, wmax, q)

    tail_mass = _tail_mass(p, wmax, with_eta_term)
    tail = (2.0 if side == "second" else 1.0) * fx * tail_mass

    total = head + mid + tail
    if not math.isfinite(total):
        raise NumericalError("increment integral is non-finite (unbounded f?)")

    if q.wmax is None:
        # auto-truncation promises the abs_tol contract
        dropped = n_dropped * (q.f_sup if q.f_sup is not None else max(1.0, abs(fx))) * tail_mass
        if mid_err + dropped > q.abs_tol:
            raise NumericalError(
                f"estimated error {mid_err + dropped:.3e} exceeds abs_tol={q.abs_tol:g}"
            )
    return total


# ---------------------------------------------------------------------------
# pointwise operators
# ---------------------------------------------------------------------------

def marchaud_tempered(
    f: Callable[[float], float], x: float, p: TemperParams, q: QuadConfig | None = None
) -> float:
    """Backward-difference jump-kernel derivative int (f(x) - f(x-w)) pi(dw).

    Acts on exp(s*x) as ((eta+s)^alpha - eta^alpha) * exp(s*x); for eta = 0
    this is the classical Marchaud derivative.
    """
    q = q or QuadConfig()
    return _increment_integral(f, x, p, q, "minus", with_eta_term=False)


def weyl_plus_tempered(
    f: Callable[[float], float], x: float, p: TemperParams, q: QuadConfig | None = None
) -> float:
    """Upper Weyl derivative in two-kernel increment form.

    Equals the Marchaud term plus eta times the order-(alpha-1) correction;
    acts on exp(s*x) as s*(eta+s)^(alpha-1) * exp(s*x).
    """
    q = q or QuadConfig()
    return _increment_integral(f, x, p, q, "minus", with_eta_term=True)


def weyl_minus_tempered(
    f: Callable[[float], float], x: float, p: TemperParams, q: QuadConfig | None = None
) -> float:
    """Lower (forward-looking) Weyl derivative in increment form.

    Mirror image of weyl_plus_tempered: equal to it after reflecting both f
    and x.  Acts on exp(s*x), s < eta, as -s*(eta-s)^(alpha-1) * exp(s*x).
    """
    q = q or QuadConfig()
    return _increment_integral(f, x, p, q, "plus", with_eta_term=True)


def _weyl_plus_correction(
    f: Callable[[float], float], x: float, p: TemperParams, q: QuadConfig | None = None
) -> float:
    """Order-(alpha-1) backward increment integral int (f(x)-f(x-w)) m(w) dw.

    Internal: exists only for the decomposition check
    weyl_plus = marchaud + eta * correction.
    """
    q = q or QuadConfig()
    if p.eta == 0.0:
        return 0.0
    fx = _finite(f(x), f"at x={x}")
    delta = q.eps / 10.0
    fd = (f(x + delta) - f(x - delta)) / (2.0 * delta)
    a, eta = p.alpha, p.eta
    ga1 = _gamma(1.0 - a)
    head = fd * eta ** (a - 2.0) * _lower_gamma(2.0 - a, eta * q.eps) / ga1
    wmax = _choose_wmax(p, q, abs(fx), with_eta_term=True)
    mid, _ = _middle_integral(
        lambda w: (fx - f(x - w)) * np.exp(-eta * w) * w ** (-a) / ga1, q.eps, wmax, q
    )
    tail = fx * _m_tail_mass(p, wmax)
    return head + mid + tail


def riesz_tempered_pointwise(
    f: Callable[[float], float], x: float, p: TemperParams, q: QuadConfig | None = None
) -> float:
    """Symmetric second-difference form of the tempered Riesz derivative.

    riesz_constant(p) times the integral of 2 f(x) - f(x-w) - f(x+w)
    against both kernels; cos(g*x) is an eigenfunction with eigenvalue
    riesz_multiplier(g, p).
    """
    q = q or QuadConfig()
    raw = _increment_integral(f, x, p, q, "second", with_eta_term=True)
    return riesz_constant(p) * raw


_GRID_OPS = {
    "marchaud": marchaud_tempered,
    "weyl+": weyl_plus_tempered,
    "weyl-": weyl_minus_tempered,
    "riesz": riesz_tempered_pointwise,
}


def evaluate_on_grid(
    kind: str,
    f: Callable[[float], float],
    grid: Grid1D,
    p: TemperParams,
    q: QuadConfig | None = None,
) -> SampledField:
    """Apply one of the pointwise operators at every node of a grid."""
    try:
        op = _GRID_OPS[kind]
    except KeyError:
        raise ValueError(f"unknown operator {kind!r}; choose from {sorted(_GRID_OPS)}") from None
    vals = [op(f, float(x), p, q) for x in grid.points]
    return SampledField(grid, np.array(vals))


# ---------------------------------------------------------------------------
# time-fractional derivatives of order 1/2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeSeries:
    """Samples of f on a uniform time grid starting at t = 0."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.grid.lo != 0.0:
            raise ValueError(f"time grid must start at 0, got lo={self.grid.lo}")
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("time series values must all be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def f0(self) -> float:
        return float(self.values[0])

    @classmethod
    def from_function(cls, f: Callable[[float], float], grid: Grid1D) -> "TimeSeries":
        pts = grid.points
        try:
            vals = np.asarray(f(pts), dtype=float)
            if vals.shape != pts.shape:
                raise TypeError
        except (TypeError, ValueError):
            vals = np.array([float(f(t)) for t in pts])
        return cls(grid, vals)


def l1_half_kernel(n: int) -> np.ndarray:
    """L1 convolution weights b_j = (j+1)^(1/2) - j^(1/2), j = 0..n-1."""
    j = np.arange(n, dtype=float)
    return np.sqrt(j + 1.0) - np.sqrt(j)


def caputo_half_stack(values: np.ndarray, h: float) -> np.ndarray:
    """L1 Caputo-1/2 derivative along axis 0 of a sample stack.

    values has the t = 0 slice first; the output drops it and has one fewer
    slice, aligned with t_1 .. t_{n-1}.
    """
    n = values.shape[0]
    if n < 3:
        raise ValueError(f"need at least 3 time nodes, got {n}")
    df = np.diff(values, axis=0)
    b = l1_half_kernel(n - 1)
    shape = [1] * df.ndim
    shape[0] = n - 1
    conv = fftconvolve(df, b.reshape(shape), axes=0)[: n - 1]
    return conv * h ** (-0.5) / _gamma(1.5)


def _interior_grid(grid: Grid1D) -> Grid1D:
    return Grid1D(grid.h, grid.hi, grid.n - 1)


def caputo_half(ts: TimeSeries) -> SampledField:
    """Caputo derivative of order 1/2 at the interior nodes t_i > 0.

    Exact for piecewise-linear f; annihilates constants.
    """
    vals = caputo_half_stack(ts.values, ts.grid.h)
    return SampledField(_interior_grid(ts.grid), vals)


def rl_half(ts: TimeSeries) -> SampledField:
    """Riemann-Liouville derivative of order 1/2 at interior nodes.

    Computed as the Caputo value plus the analytic initial-value term
    f(0) * t^(-1/2) / sqrt(pi); the singular t = 0 node is not emitted.
    """
    cap = caputo_half(ts)
    t = cap.grid.points
    return SampledField(cap.grid, cap.values + ts.f0 / np.sqrt(np.pi * t))


def tempered_rl_half(ts: TimeSeries, eta: float) -> SampledField:
    """Tempered Riemann-Liouville derivative of order 1/2.

    exp(-eta*t) * RL^(1/2)[exp(eta*s) f(s)](t) - sqrt(eta) * f(t) on the
    interior nodes.  Grids with eta * t_max > 700 are rejected because the
    tilting exponentials overflow.
    """
    if eta < 0.0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    if eta * ts.grid.hi > _ETA_T_OVERFLOW:
        raise ValueError(
            f"eta*t reaches {eta * ts.grid.hi:.1f} > {_ETA_T_OVERFLOW:g}: "
            "exp(eta*t) would overflow; rescale the problem or shrink the grid"
        )
    t = ts.grid.points
    tilted = TimeSeries(ts.grid, np.exp(eta * t) * ts.values)
    rl = rl_half(tilted)
    ti = rl.grid.points
    vals = np.exp(-eta * ti) * rl.values - math.sqrt(eta) * ts.values[1:]
    return SampledField(rl.grid, vals)
