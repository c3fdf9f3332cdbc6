"""Static figure rendering for the train and eval report paths.

Figures are written straight to files (Agg backend); nothing here opens
a window or needs a display.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluate import EvalReport, class_names
from .model import TrainHistory


def save_history_figure(history: TrainHistory, path: str | Path) -> None:
    """Loss and accuracy curves, one panel each, shared epoch axis."""
    epochs = [e.epoch for e in history.epochs]
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_loss.plot(epochs, [e.loss for e in history.epochs], marker="o", ms=3)
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("mean training loss")
    ax_acc.plot(epochs, [e.accuracy for e in history.epochs], marker="o", ms=3,
                label="train accuracy")
    if any(e.val_recall_macro is not None for e in history.epochs):
        ax_acc.plot(epochs, [e.val_recall_macro for e in history.epochs],
                    marker="s", ms=3, label="val macro recall")
        ax_acc.legend(fontsize=8)
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("accuracy")
    ax_acc.set_ylim(0.0, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_confusion_figure(report: EvalReport, path: str | Path) -> None:
    """Confusion-matrix heatmap with counts annotated in each cell."""
    matrix = report.confusion
    names = class_names(matrix.shape[0])
    fig, ax = plt.subplots(figsize=(4.5, 4))
    im = ax.imshow(matrix, cmap="Blues")
    ax.set_xticks(range(len(names)), names)
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = matrix.max(initial=0) / 2
    for t in range(matrix.shape[0]):
        for p in range(matrix.shape[1]):
            ax.text(p, t, str(int(matrix[t, p])), ha="center", va="center",
                    fontsize=8,
                    color="white" if matrix[t, p] > threshold else "black")
    fig.colorbar(im, ax=ax, shrink=0.8)
    title = (f"macro recall {report.macro_recall:.3f}  "
             f"macro precision {report.macro_precision:.3f}")
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
