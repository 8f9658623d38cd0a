"""Radius-sweep figures rendered off-screen."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed PNG metadata so repeated runs give identical bytes
_META = {"Software": None}


def plot_sweep(rows, columns, path, title=""):
    """One line per measured column against radius; missing values are skipped."""
    fig, ax = plt.subplots(figsize=(5, 3.5), dpi=100)
    for col in columns:
        pts = [(r["r"], r[col]) for r in rows if r.get(col) not in (None, "")]
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker="o", label=col)
    ax.set_xlabel("radius")
    ax.set_ylabel("measured constant")
    if title:
        ax.set_title(title)
    if ax.lines:
        ax.legend(frameon=False, fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=_META)
    plt.close(fig)
