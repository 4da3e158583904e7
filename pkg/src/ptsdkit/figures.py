"""Matplotlib rendering of run artifacts: training curves, the confusion
matrix and the model-comparison bars. PNGs are written next to the CSV data
they visualize; the CSVs stay the canonical machine-readable outputs.

PNG metadata is scrubbed (no Software tag) so repeated runs stay
byte-identical.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}


def save_history_curves(history, out_dir) -> list[str]:
    """Accuracy and loss curves (train vs validation) over epochs."""
    epochs = [r.epoch for r in history.records]
    paths = []
    panels = (
        ("accuracy", "Accuracy", [r.train_acc for r in history.records],
         [r.val_acc for r in history.records]),
        ("loss", "Loss", [r.train_loss for r in history.records],
         [r.val_loss for r in history.records]),
    )
    for stem, label, train_vals, val_vals in panels:
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        ax.plot(epochs, train_vals, label=f"Training {label}", color="tab:blue")
        ax.plot(epochs, val_vals, label=f"Validation {label}",
                color="tab:orange", linestyle="--")
        ax.set_xlabel("Epoch")
        ax.set_ylabel(label)
        ax.set_title(f"Training and Validation {label}")
        ax.legend()
        ax.grid(True, alpha=0.3)
        path = f"{out_dir}/history_{stem}.png"
        fig.savefig(path, **_SAVE_KW)
        plt.close(fig)
        paths.append(path)
    return paths


def save_confusion_heatmap(cm, path) -> str:
    """2x2 confusion matrix with counts annotated."""
    grid = [[cm.tn, cm.fp], [cm.fn, cm.tp]]
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    im = ax.imshow(grid, cmap="Blues")
    for i in range(2):
        for j in range(2):
            lum = grid[i][j] / max(1, max(max(row) for row in grid))
            ax.text(j, i, str(grid[i][j]), ha="center", va="center",
                    color="white" if lum > 0.5 else "black", fontsize=14)
    ax.set_xticks([0, 1], ["Not PTSD", "PTSD"])
    ax.set_yticks([0, 1], ["Not PTSD", "PTSD"])
    ax.set_xlabel("Predicted")
    ax.set_ylabel("Actual")
    ax.set_title("Confusion Matrix")
    fig.colorbar(im, ax=ax)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def save_accuracy_bars(rows, path) -> str:
    """Per-model accuracy bar chart from comparison rows."""
    names = [r.name for r in rows]
    accs = [100.0 * r.accuracy if r.accuracy is not None else 0.0 for r in rows]
    fig, ax = plt.subplots(figsize=(max(6.4, 1.1 * len(names)), 4.4))
    bars = ax.bar(range(len(names)), accs, color="tab:blue")
    for bar, acc in zip(bars, accs):
        ax.text(bar.get_x() + bar.get_width() / 2, bar.get_height() + 0.5,
                f"{acc:.2f}", ha="center", va="bottom", fontsize=9)
    ax.set_xticks(range(len(names)), names, rotation=30, ha="right")
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title("Accuracy Comparison of Models")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path
