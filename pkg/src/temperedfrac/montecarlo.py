"""Samplers and estimators for the subordinators and drifted endpoints.

Conventions match the closed forms in processes: Brownian endpoints are
sqrt(2t) * N (variance 2t).  The stable subordinator of order 1/2 uses the
exact hitting-time representation S = t^2 / (2 N^2), whose Laplace
transform is exp(-t sqrt(lam)); general orders use the Kanter positive
stable construction.  Tempering is by rejection: a stable proposal S is
accepted with probability exp(-eta*S), which yields the tempered law with
overall acceptance rate exp(-t*eta^alpha).

Reproducibility: batches are generated in fixed-size chunks whose RNG
streams are spawned from (seed, chunk-index).  Threads only consume the
chunk queue, so any thread count produces the identical sample array, and
estimators reduce with numpy's pairwise summation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import DriftSpec, TemperParams

__all__ = [
    "SampleBatch",
    "EstimateWithError",
    "RejectionInfo",
    "sample_stable_half",
    "sample_positive_stable",
    "sample_tempered_subordinator",
    "sample_drifted_endpoint",
    "sample_reflected_endpoint",
    "sample_inverse_stable_half",
    "stable_half_batch",
    "tempered_subordinator_batch",
    "drifted_batch",
    "reflected_batch",
    "inverse_half_batch",
    "empirical_laplace",
    "ks_statistic",
    "ks_critical_value",
]

_CHUNK = 1 << 16
_MAX_TEMPER_EXPONENT = 30.0  # acceptance exp(-t*eta^alpha) starves beyond this


@dataclass(frozen=True)
class SampleBatch:
    """Monte Carlo draws with the metadata needed to reproduce them."""

    process: str
    params: dict = field(repr=False)
    t: float
    seed: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("samples must be a nonempty 1-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must all be finite")
        object.__setattr__(self, "samples", arr)

    @property
    def n(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    stderr: float
    n: int

    def __post_init__(self) -> None:
        if self.stderr < 0.0:
            raise ValueError("stderr must be >= 0")
        if self.n < 2:
            raise ValueError("estimates need at least 2 samples")


@dataclass(frozen=True)
class RejectionInfo:
    """Bookkeeping of a rejection sampler run."""

    proposals: int
    accepted: int

    @property
    def rate(self) -> float:
        return self.accepted / self.proposals


# ---------------------------------------------------------------------------
# scalar draws
# ---------------------------------------------------------------------------

def _nonzero_normal(rng: np.random.Generator) -> float:
    z = rng.standard_normal()
    while z == 0.0:
        z = rng.standard_normal()
    return z


def sample_stable_half(t: float, rng: np.random.Generator) -> float:
    """One draw of the 1/2-stable subordinator at time t: S = t^2/(2 N^2)."""
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    z = _nonzero_normal(rng)
    return t * t / (2.0 * z * z)


def _kanter_std(alpha: float, u: np.ndarray, e: np.ndarray) -> np.ndarray:
    # standard positive stable, E exp(-lam S) = exp(-lam^alpha); u in (0, pi)
    a = alpha
    A = (np.sin((1.0 - a) * u) ** (1.0 - a) * np.sin(a * u) ** a / np.sin(u)) ** (1.0 / (1.0 - a))
    return (A / e) ** ((1.0 - a) / a)


def sample_positive_stable(alpha: float, t: float, rng: np.random.Generator) -> float:
    """One draw of the alpha-stable subordinator at time t.

    Laplace transform exp(-t*lam^alpha).  alpha = 1/2 uses the exact
    hitting-time representation; other orders use the Kanter construction.
    """
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    if alpha == 0.5:
        return sample_stable_half(t, rng)
    u = rng.uniform(0.0, np.pi)
    e = rng.exponential(1.0)
    return t ** (1.0 / alpha) * float(_kanter_std(alpha, np.asarray(u), np.asarray(e)))


def _check_temper_feasible(p: TemperParams, t: float) -> None:
    if t * p.eta**p.alpha > _MAX_TEMPER_EXPONENT:
        raise ValueError(
            f"t*eta^alpha = {t * p.eta ** p.alpha:.1f} > {_MAX_TEMPER_EXPONENT:g}: "
            f"rejection acceptance exp(-t*eta^alpha) is vanishingly small"
        )


def sample_tempered_subordinator(p: TemperParams, t: float, rng: np.random.Generator) -> float:
    """One draw of the tempered (relativistic) subordinator at time t.

    Rejection from the stable proposal with acceptance prob exp(-eta*S).
    """
    _check_temper_feasible(p, t)
    while True:
        s = sample_positive_stable(p.alpha, t, rng)
        if p.eta == 0.0 or rng.uniform() <= math.exp(-p.eta * s):
            return s


def sample_drifted_endpoint(d: DriftSpec, t: float, rng: np.random.Generator) -> float:
    """x0 + mu*t + sqrt(2t)*N."""
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    return d.x0 + d.mu * t + math.sqrt(2.0 * t) * rng.standard_normal()


def sample_reflected_endpoint(d: DriftSpec, t: float, rng: np.random.Generator) -> float:
    """x0 + |sqrt(2t)*N + mu*t|, requires x0 >= 0."""
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    if d.x0 < 0.0:
        raise ValueError(f"reflected endpoint needs x0 >= 0, got {d.x0}")
    return d.x0 + abs(math.sqrt(2.0 * t) * rng.standard_normal() + d.mu * t)


def sample_inverse_stable_half(t: float, rng: np.random.Generator) -> float:
    """Inverse 1/2-stable subordinator at t: equal in law to |sqrt(2t)*N|."""
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    return abs(math.sqrt(2.0 * t) * rng.standard_normal())


# ---------------------------------------------------------------------------
# deterministic chunked batches
# ---------------------------------------------------------------------------

def _chunk_sizes(n: int) -> list[int]:
    full, rest = divmod(n, _CHUNK)
    return [_CHUNK] * full + ([rest] if rest else [])


def _run_chunks(
    draw_chunk: Callable[[np.random.Generator, int, int], np.ndarray],
    n: int,
    seed: int,
    threads: int,
) -> list[np.ndarray]:
    """Generate chunks on spawned streams; order is by chunk index.

    draw_chunk(rng, size, index) must depend only on its own stream, so the
    concatenated result is identical for every thread count.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    sizes = _chunk_sizes(n)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def work(i: int) -> np.ndarray:
        return draw_chunk(np.random.default_rng(streams[i]), sizes[i], i)

    if threads <= 1 or len(sizes) == 1:
        return [work(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, range(len(sizes))))


def _normals_nonzero(rng: np.random.Generator, m: int) -> np.ndarray:
    z = rng.standard_normal(m)
    while np.any(z == 0.0):
        bad = z == 0.0
        z[bad] = rng.standard_normal(int(bad.sum()))
    return z


def stable_half_batch(t: float, n: int, seed: int, threads: int = 1) -> SampleBatch:
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t}")

    def chunk(rng, m, _i):
        z = _normals_nonzero(rng, m)
        return t * t / (2.0 * z * z)

    samples = np.concatenate(_run_chunks(chunk, n, seed, threads))
    if not np.all(samples > 0.0):
        raise ValueError("subordinator samples must be positive")
    return SampleBatch("stable_half", {"t": t}, t, seed, samples)


def _stable_chunk(p: TemperParams, t: float, rng: np.random.Generator, m: int) -> np.ndarray:
    if p.alpha == 0.5:
        z = _normals_nonzero(rng, m)
        return t * t / (2.0 * z * z)
    u = rng.uniform(0.0, np.pi, m)
    e = rng.exponential(1.0, m)
    return t ** (1.0 / p.alpha) * _kanter_std(p.alpha, u, e)


def tempered_subordinator_batch(
    p: TemperParams, t: float, n: int, seed: int, threads: int = 1
) -> tuple[SampleBatch, RejectionInfo]:
    """Tempered subordinator draws plus rejection bookkeeping."""
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    _check_temper_feasible(p, t)
    sizes = _chunk_sizes(n)
    proposals = [0] * len(sizes)

    def chunk(rng, m, i):
        if p.eta == 0.0:
            proposals[i] = m
            return _stable_chunk(p, t, rng, m)
        accepted: list[np.ndarray] = []
        got = 0
        rate = math.exp(-t * p.eta**p.alpha)
        while got < m:
            block = max(64, int(1.3 * (m - got) / rate))
            s = _stable_chunk(p, t, rng, block)
            keep = rng.uniform(size=block) <= np.exp(-p.eta * s)
            sel = s[keep]
            need = m - got
            if sel.size >= need:
                # count proposals only up to the one producing the last accept
                proposals[i] += int(np.flatnonzero(keep)[need - 1]) + 1
                accepted.append(sel[:need])
                got = m
            else:
                proposals[i] += block
                accepted.append(sel)
                got += sel.size
        return np.concatenate(accepted)

    samples = np.concatenate(_run_chunks(chunk, n, seed, threads))
    if not np.all(samples > 0.0):
        raise ValueError("subordinator samples must be positive")
    info = RejectionInfo(proposals=sum(proposals), accepted=n)
    batch = SampleBatch(
        "tempered_subordinator", {"alpha": p.alpha, "eta": p.eta, "t": t}, t, seed, samples
    )
    return batch, info


def drifted_batch(d: DriftSpec, t: float, n: int, seed: int, threads: int = 1) -> SampleBatch:
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t}")

    def chunk(rng, m, _i):
        return d.x0 + d.mu * t + math.sqrt(2.0 * t) * rng.standard_normal(m)

    samples = np.concatenate(_run_chunks(chunk, n, seed, threads))
    return SampleBatch("drifted", {"mu": d.mu, "x0": d.x0, "t": t}, t, seed, samples)


def reflected_batch(d: DriftSpec, t: float, n: int, seed: int, threads: int = 1) -> SampleBatch:
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    if d.x0 < 0.0:
        raise ValueError(f"reflected endpoint needs x0 >= 0, got {d.x0}")

    def chunk(rng, m, _i):
        return d.x0 + np.abs(math.sqrt(2.0 * t) * rng.standard_normal(m) + d.mu * t)

    samples = np.concatenate(_run_chunks(chunk, n, seed, threads))
    if not np.all(samples >= d.x0):
        raise ValueError("reflected samples must be >= x0")
    return SampleBatch("reflected", {"mu": d.mu, "x0": d.x0, "t": t}, t, seed, samples)


def inverse_half_batch(t: float, n: int, seed: int, threads: int = 1) -> SampleBatch:
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t}")

    def chunk(rng, m, _i):
        return np.abs(math.sqrt(2.0 * t) * rng.standard_normal(m))

    samples = np.concatenate(_run_chunks(chunk, n, seed, threads))
    return SampleBatch("inverse_half", {"t": t}, t, seed, samples)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def empirical_laplace(batch: SampleBatch, lam: float) -> EstimateWithError:
    """Sample mean and standard error of exp(-lam * sample)."""
    if lam < 0.0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    vals = np.exp(-lam * batch.samples)
    n = vals.size
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return EstimateWithError(mean, stderr, n)


def ks_statistic(batch: SampleBatch, cdf: Callable[[float], float]) -> float:
    """Sup distance between the empirical CDF of the batch and cdf.

    Rejects a cdf that is not monotone on the sorted sample points.
    """
    xs = np.sort(batch.samples)
    try:
        fs = np.asarray(cdf(xs), dtype=float)
        if fs.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        fs = np.array([float(cdf(x)) for x in xs])
    if np.any(np.diff(fs) < -1e-12):
        raise ValueError("cdf is not monotone on the sorted sample points")
    n = xs.size
    upper = np.max(np.arange(1, n + 1) / n - fs)
    lower = np.max(fs - np.arange(0, n) / n)
    return float(max(upper, lower))


def ks_critical_value(n: int, level: float = 0.01) -> float:
    """Asymptotic Kolmogorov critical value sqrt(-ln(level/2)/2)/sqrt(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    return math.sqrt(-0.5 * math.log(level / 2.0)) / math.sqrt(n)
