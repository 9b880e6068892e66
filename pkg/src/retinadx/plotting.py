"""Report figures rendered straight to PNG files.

Figures are built on a bare Agg canvas so importing this module never
touches the global pyplot backend. PNG metadata is stripped to keep files
byte-identical across runs.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .evaluation import CLASSES, ConfusionCounts

_PNG_META = {"Software": None}


def _new_figure(width: float, height: float) -> Figure:
    fig = Figure(figsize=(width, height), dpi=100)
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, path: str | Path) -> None:
    fig.savefig(path, format="png", metadata=_PNG_META)


def plot_confusion(counts: ConfusionCounts, path: str | Path) -> None:
    fig = _new_figure(4.8, 4.2)
    ax = fig.add_subplot(1, 1, 1)
    m = counts.matrix
    ax.imshow(m, cmap="Blues", vmin=0, vmax=max(int(m.max()), 1))
    names = [c.display for c in CLASSES]
    ax.set_xticks(range(len(names)), names, rotation=20, fontsize=8)
    ax.set_yticks(range(len(names)), names, fontsize=8)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    half = m.max() / 2.0
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            ax.text(j, i, str(int(m[i, j])), ha="center", va="center",
                    color="white" if m[i, j] > half else "black")
    ax.set_title(f"accuracy {counts.accuracy:.3f} (n={counts.total})", fontsize=10)
    fig.tight_layout()
    _save(fig, path)


def plot_training_curves(curves: Mapping[str, Sequence[float]], path: str | Path) -> None:
    fig = _new_figure(5.5, 3.6)
    ax = fig.add_subplot(1, 1, 1)
    for name, curve in curves.items():
        y = np.asarray(curve, dtype=np.float64)
        ax.plot(np.arange(y.size), np.maximum(y, 1e-16), label=name, lw=1.2)
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean squared reconstruction error")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_segmentation(img: np.ndarray, vesselness: np.ndarray, vessels: np.ndarray,
                      path: str | Path) -> None:
    fig = _new_figure(9.0, 3.2)
    panels = [(img, "input", None), (vesselness, "vesselness", "magma"), (vessels, "vessel map", "gray")]
    for k, (data, title, cmap) in enumerate(panels, start=1):
        ax = fig.add_subplot(1, 3, k)
        ax.imshow(data, cmap=cmap, interpolation="nearest")
        ax.set_title(title, fontsize=9)
        ax.set_axis_off()
    fig.tight_layout()
    _save(fig, path)
