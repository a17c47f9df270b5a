"""Matplotlib figure emitters for the CLI report paths.

Figures are rendered headless and written next to the delimited output.
File format follows the extension (.svg or .png); SVG output is made as
reproducible as matplotlib allows (fixed hash salt, no embedded date).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .basin import UNDETERMINED  # noqa: E402

plt.rcParams["svg.hashsalt"] = "fracdyn"

_SAVE_KW = {"bbox_inches": "tight", "dpi": 150}


def _save(fig, path: str) -> str:
    if path.endswith(".svg"):
        fig.savefig(path, metadata={"Date": None}, **_SAVE_KW)
    else:
        fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def phase_portrait(
    path: str,
    trajectory,
    equilibria=None,
    ties=None,
    title: str = "phase portrait",
) -> str:
    """Trajectory polyline in the (y1, y2) plane with markers."""
    pts = np.asarray(trajectory.states if hasattr(trajectory, "states") else trajectory)
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(pts[:, 0], pts[:, 1], lw=0.8, color="tab:blue")
    ax.plot(pts[0, 0], pts[0, 1], "o", color="tab:green", ms=6, label="start")
    if equilibria is not None:
        eq = np.asarray(equilibria, dtype=float)
        ax.plot(eq[:, 0], eq[:, 1], "x", color="tab:red", ms=8, mew=2, label="equilibria")
    if ties:
        tx = [p[0] for _, _, p in ties]
        ty = [p[1] for _, _, p in ties]
        ax.plot(tx, ty, "s", color="tab:orange", ms=6, mfc="none", label="self-intersection")
    ax.set_xlabel("$y_1$")
    ax.set_ylabel("$y_2$")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def basin_heatmap(path: str, basin, boundary=None, overlay=None, title: str = "basin map") -> str:
    """Discrete label map; equilibrium basins colored, escape/undetermined muted."""
    labels = basin.labels
    g = basin.grid
    codes = np.full(labels.shape, 0, dtype=int)
    codes[labels == UNDETERMINED] = 1
    n_eq = len(basin.equilibria)
    for k in range(n_eq):
        codes[labels == k] = 2 + k
    palette = ["#bdbdbd", "#f0f0f0", "#1b9e77", "#d95f02", "#7570b3", "#e7298a"]
    colors = palette[: 2 + n_eq]
    cmap = matplotlib.colors.ListedColormap(colors)
    fig, ax = plt.subplots(figsize=(6.5, 6))
    mesh = ax.pcolormesh(
        g.y1_nodes,
        g.y2_nodes,
        codes.T,
        cmap=cmap,
        vmin=-0.5,
        vmax=len(colors) - 0.5,
        shading="nearest",
    )
    cbar = fig.colorbar(mesh, ax=ax, ticks=range(len(colors)))
    cbar.ax.set_yticklabels(
        ["escaped", "undetermined"] + [f"to equilibrium {k}" for k in range(n_eq)]
    )
    eq = np.asarray(basin.equilibria, dtype=float)
    if eq.size:
        ax.plot(eq[:, 0], eq[:, 1], "x", color="black", ms=8, mew=2)
    if boundary is not None and len(boundary):
        b = np.asarray(boundary)
        ax.plot(b[:, 0], b[:, 1], ".", color="black", ms=2, label="basin border")
    if overlay is not None and len(overlay):
        o = np.asarray(overlay)
        ax.plot(o[:, 0], o[:, 1], "-", color="white", lw=1.2, label="separatrix")
    ax.set_xlabel("$y_1$")
    ax.set_ylabel("$y_2$")
    ax.set_title(title)
    return _save(fig, path)


def separatrix_figure(path: str, trace, equilibria=None, title: str = "separatrix") -> str:
    pts = np.asarray(trace.points if hasattr(trace, "points") else trace)
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(pts[:, 0], pts[:, 1], lw=1.0, color="tab:purple")
    if equilibria is not None:
        eq = np.asarray(equilibria, dtype=float)
        ax.plot(eq[:, 0], eq[:, 1], "x", color="tab:red", ms=8, mew=2)
    ax.set_xlabel("$y_1$")
    ax.set_ylabel("$y_2$")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)
