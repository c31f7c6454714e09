"""Figure rendering for the CLI report path (headless matplotlib)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_curves(curves, path, title: str | None = None):
    """Spectral-efficiency curves on one axes, saved as a PNG."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for curve in curves:
        label = curve.meta.get("scheme", "curve")
        extras = []
        if "cluster_size" in curve.meta:
            extras.append(f"K={curve.meta['cluster_size']}")
        sir_db = curve.meta.get("sir_db")
        if sir_db is not None:
            extras.append("SIR=inf" if np.isinf(sir_db) else f"SIR={sir_db:.1f} dB")
        if extras:
            label += " (" + ", ".join(extras) + ")"
        ax.plot(curve.snr_db, curve.se, marker="o", ms=3, label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Spectral efficiency (bits/s/Hz/user)")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_cdf(values_db, path, title: str | None = None):
    """Empirical CDF of SIR values (dB), saved as a PNG."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    x = np.sort(np.asarray(values_db, dtype=float))
    y = np.arange(1, x.size + 1) / x.size
    ax.plot(x, y)
    ax.set_xlabel("SIR (dB)")
    ax.set_ylabel("CDF")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
