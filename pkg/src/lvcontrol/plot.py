"""Deterministic SVG line plots of trajectories and steady profiles."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .solver import Trajectory  # noqa: E402

SNAPSHOTS = 5


def _save(fig, path) -> None:
    with plt.rc_context({"svg.hashsalt": "lvcontrol", "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_plot(data, path, dashed=None, title: str = "") -> None:
    """Line plot of u and v.

    ``data`` is a Trajectory (a few snapshots are drawn, later ones darker) or
    a dict name -> (x, values) of profiles. ``dashed`` maps a label to either
    a constant level or an (x, values) pair, drawn as dashed black lines.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if isinstance(data, Trajectory):
        if len(data.times) == 0 or data.u.size == 0:
            raise ValueError("empty trajectory")
        idx = np.unique(np.linspace(0, len(data.times) - 1, SNAPSHOTS).round().astype(int))
        for j, k in enumerate(idx):
            shade = 0.3 + 0.7 * (j + 1) / len(idx)
            ax.plot(data.x, data.u[k], color=(0.0, 0.2, shade), lw=1.2,
                    label=f"u, t={data.times[k]:.3g}")
            ax.plot(data.x, data.v[k], color=(shade, 0.2, 0.0), lw=1.2,
                    label=f"v, t={data.times[k]:.3g}")
    else:
        if not data:
            raise ValueError("no profiles to plot")
        for name, (x, values) in data.items():
            ax.plot(x, values, lw=1.2, label=name)
    for label, item in (dashed or {}).items():
        if np.isscalar(item):
            ax.axhline(float(item), color="black", ls="--", lw=1.0, label=label)
        else:
            xs, ys = item
            ax.plot(xs, ys, color="black", ls="--", lw=1.0, label=label)
    ax.set_xlabel("x")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    _save(fig, path)
