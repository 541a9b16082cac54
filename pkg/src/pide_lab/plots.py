"""Static SVG figures for convergence studies and solution surfaces."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .gridops import cell_edges  # noqa: E402

# fixed element ids and no timestamp, so reruns give identical files
plt.rcParams["svg.hashsalt"] = "pide-lab"
_SVG_META = {"Date": None, "Creator": "pide-lab"}


def convergence_svg(path, ns, errors, ylabel: str, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.loglog(ns, errors, "o-", color="tab:blue")
    ax.set_xlabel("n")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def surface_svg(path, trajectory, title: str = "") -> None:
    """Heat map of the piecewise-constant extension over (x, t)."""
    grid = trajectory.grid
    x_edges = cell_edges(grid)
    t = np.asarray(trajectory.times)
    t_edges = np.concatenate(([t[0]], 0.5 * (t[:-1] + t[1:]), [t[-1]]))
    values = np.concatenate([trajectory.states, np.zeros((len(t), 1))], axis=1)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    mesh = ax.pcolormesh(x_edges, t_edges, values, shading="flat", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="S_n v_n")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(title or f"n = {grid.n}")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
