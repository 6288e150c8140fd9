"""PNG figures for map stacks and phase histograms.

Uses the object-oriented matplotlib API with the Agg canvas so nothing
touches pyplot state or needs a display.
"""

from __future__ import annotations

import math

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure


def _save(fig: Figure, path) -> None:
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=100, metadata={"Software": None})


def plot_maps(maps, path) -> None:
    """Baseline depth plus one depth/amplitude pair per component slot."""
    k = maps.k
    fig = Figure(figsize=(3.2 * (k + 1), 5.6), layout="constrained")
    axes = fig.subplots(2, k + 1, squeeze=False)
    panels = [(0, 0, maps.baseline_depth, f"baseline depth (n={maps.baseline_harmonic}) [m]"),
              (1, 0, maps.baseline_amplitude, "baseline amplitude")]
    for s in range(k):
        present = maps.amplitude[s] > 0
        panels.append((0, s + 1, np.where(present, maps.depth[s], np.nan), f"depth {s + 1} [m]"))
        panels.append((1, s + 1, maps.amplitude[s], f"amplitude {s + 1}"))
    for r, c, data, title in panels:
        ax = axes[r][c]
        im = ax.imshow(data, cmap="viridis" if "depth" in title else "gray", interpolation="nearest")
        ax.set_title(title, fontsize=9)
        ax.set_xticks([])
        ax.set_yticks([])
        fig.colorbar(im, ax=ax, shrink=0.8)
    _save(fig, path)


def plot_histogram(table, path) -> None:
    """Stacked panels, one per series, sharing the [0, 2pi) phase axis."""
    names = list(table.counts)
    fig = Figure(figsize=(7, 1.6 * len(names) + 0.6), layout="constrained")
    axes = fig.subplots(len(names), 1, sharex=True, squeeze=False)[:, 0]
    width = np.diff(table.edges)
    for ax, name in zip(axes, names):
        ax.bar(table.edges[:-1], table.counts[name], width=width, align="edge",
               color="0.4" if name == "baseline" else "tab:blue")
        ax.set_ylabel(name, fontsize=8)
    axes[-1].set_xlim(0, 2 * math.pi)
    axes[-1].set_xlabel(f"phase at harmonic {table.harmonic} [rad]")
    _save(fig, path)
