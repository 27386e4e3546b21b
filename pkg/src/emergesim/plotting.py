"""Figures for a finished run: metric curves and the final lattice."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

# no timestamps or version strings in the PNG text chunks
_META = {"Software": None}


def _final_lattice(ax, entry, title):
    rows = entry.render()
    chars = sorted({c for r in rows for c in r})
    lookup = {c: i for i, c in enumerate(chars)}
    img = np.array([[lookup[c] for c in r] for r in rows])
    palette = plt.get_cmap("tab10").colors
    colors = ["white" if c == "." else palette[i % 10] for i, c in enumerate(chars)]
    ax.imshow(img, cmap=ListedColormap(colors), vmin=-0.5, vmax=len(chars) - 0.5, interpolation="nearest")
    handles = [plt.Rectangle((0, 0), 1, 1, color=colors[i]) for i in range(len(chars))]
    ax.legend(handles, [repr(c) for c in chars], loc="upper left", bbox_to_anchor=(1.01, 1.0), fontsize=7, frameon=False)
    ax.set_title(title)
    ax.set_xticks([])
    ax.set_yticks([])


def render_run_figures(trace, columns, out_dir, model) -> list[str]:
    """Write ``metrics.png`` and ``final_grid.png``; returns their names."""
    ticks = trace.ticks
    plotted = [c for c in columns if any(isinstance(e.metrics.get(c), (int, float)) for e in trace)]
    fig, axes = plt.subplots(len(plotted), 1, figsize=(5.0, 1.6 * len(plotted) + 0.6), sharex=True, squeeze=False)
    for ax, col in zip(axes[:, 0], plotted):
        ys = [np.nan if e.metrics.get(col) is None else e.metrics[col] for e in trace]
        ax.plot(ticks, ys, marker="." if len(ticks) < 40 else None, lw=1.0)
        ax.set_ylabel(col, fontsize=7)
        ax.tick_params(labelsize=7)
    axes[-1, 0].set_xlabel("tick")
    fig.suptitle(f"{model}: metrics", fontsize=9)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "metrics.png"), dpi=120, metadata=_META)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    _final_lattice(ax, trace.last, f"{model}: tick {trace.last.tick}")
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "final_grid.png"), dpi=120, metadata=_META)
    plt.close(fig)
    return ["metrics.png", "final_grid.png"]
