"""Figures written next to the delimited report output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

CLIP_LOW = -20.0


def heatmap_figure(grid: np.ndarray, extent: tuple[float, float, float, float], path, title: str = ""):
    """Weighted log-modulus over a region; rows of ``grid`` run up the imaginary axis."""
    finite = grid[np.isfinite(grid)]
    vmax = float(finite.max()) if finite.size else 0.0
    shown = np.clip(np.where(np.isneginf(grid), CLIP_LOW, grid), CLIP_LOW, vmax)
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(shown, origin="lower", extent=extent, cmap="viridis", aspect="equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    if title:
        ax.set_title(title, fontsize=9)
    fig.colorbar(im, ax=ax, label="log |f| - alpha|z|^2/2")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def ring_contrib_figure(log_contribs, fitted_exponent: float, fit_window: int, path, title: str = ""):
    """Ring contributions on log-log axes with the fitted power law over the outer window."""
    logs = np.asarray(log_contribs, dtype=float)
    rings = np.arange(1, logs.size)
    fig, ax = plt.subplots(figsize=(6, 4))
    ok = np.isfinite(logs[1:])
    ax.plot(np.log(rings[ok]), logs[1:][ok], "o", ms=3, label="ring contribution")
    tail = rings[-fit_window:]
    tail_logs = logs[-fit_window:]
    good = np.isfinite(tail_logs)
    if np.isfinite(fitted_exponent) and good.sum() >= 2:
        x = np.log(tail[good])
        c = np.mean(tail_logs[good] - fitted_exponent * x)
        ax.plot(x, c + fitted_exponent * x, "-", label=f"slope {fitted_exponent:.3f}")
    ax.set_xlabel("log ring")
    ax.set_ylabel("log contribution")
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
