"""Poincaré-disk scatter figures for two-dimensional embeddings."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 7,
    "figure.dpi": 100,
    "svg.hashsalt": "hyperstruc",
    "svg.fonttype": "none",
}


def disk_figure(
    points: np.ndarray,
    classes: Sequence[int] | None = None,
    names: Sequence[str] | None = None,
    title: str | None = None,
    size: float = 5.0,
):
    """Unit circle plus one marker per node, coloured by class when given."""
    if points.shape[1] != 2:
        raise ValueError("disk figures need two-dimensional points")
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(size, size))
        t = np.linspace(0.0, 2.0 * np.pi, 361)
        ax.plot(np.cos(t), np.sin(t), color="0.3", lw=0.8, gid="boundary")
        if classes is None:
            ax.scatter(points[:, 0], points[:, 1], s=18, color="C0", gid="nodes")
        else:
            classes = np.asarray(classes)
            cmap = plt.get_cmap("tab10" if classes.max() < 10 else "tab20")
            ax.scatter(points[:, 0], points[:, 1], s=18, c=cmap(classes % cmap.N), gid="nodes")
        if names is not None and len(names) <= 80:
            for (x, y), name in zip(points, names):
                ax.annotate(name, (x, y), fontsize=5, xytext=(2, 2), textcoords="offset points")
        ax.set_xlim(-1.05, 1.05)
        ax.set_ylim(-1.05, 1.05)
        ax.set_aspect("equal")
        ax.set_xticks([])
        ax.set_yticks([])
        if title:
            ax.set_title(title)
        fig.tight_layout()
    return fig


def save_disk_figure(path, points, classes=None, names=None, title=None) -> Path:
    path = Path(path)
    with plt.rc_context(RC):
        fig = disk_figure(points, classes, names, title)
        # no date and a fixed id salt keep repeated renders byte-identical
        fig.savefig(path, metadata={"Date": None} if path.suffix == ".svg" else None)
    plt.close(fig)
    return path

