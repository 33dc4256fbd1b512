"""Figure rendering for the CLI report path.

Every helper writes a single PNG/PDF next to the delimited output.  The Agg
backend is forced so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_curve", "save_histogram", "save_residual_map"]


def save_curve(path: str, x: np.ndarray, ys: dict, xlabel: str, ylabel: str, title: str) -> None:
    """Line plot of one or more named curves over a common abscissa."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, y in ys.items():
        ax.plot(x, y, lw=1.4, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(ys) > 1:
        ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_histogram(
    path: str,
    samples: np.ndarray,
    title: str,
    overlay: tuple[np.ndarray, np.ndarray] | None = None,
    bins: int = 120,
) -> None:
    """Normalized histogram of samples with an optional density overlay."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.hist(samples, bins=bins, density=True, alpha=0.55, color="tab:blue", label="samples")
    if overlay is not None:
        ax.plot(overlay[0], overlay[1], "r-", lw=1.4, label="closed form")
        ax.legend(frameon=False)
    ax.set_xlabel("value")
    ax.set_ylabel("density")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_residual_map(
    path: str, tvals: np.ndarray, yvals: np.ndarray, residual: np.ndarray, title: str
) -> None:
    """Heat map of |residual| over a (t, y) lattice."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    pc = ax.pcolormesh(yvals, tvals, np.abs(residual), shading="auto", cmap="viridis")
    fig.colorbar(pc, ax=ax, label="|residual|")
    ax.set_xlabel("y")
    ax.set_ylabel("t")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
