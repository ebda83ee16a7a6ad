"""Evaluation report rendering: delimited metric tables and figures."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_METRIC_COLUMNS = ["bleu1", "bleu2", "bleu3", "bleu4", "meteor", "cider"]


def _metric_row(metrics: dict) -> list[float]:
    return [*metrics["bleu"], metrics["meteor"], metrics["cider"]]


def write_metrics_csv(path: str | Path, methods: dict[str, dict]) -> None:
    """One row per method: BLEU-1..4, METEOR, CIDEr, and the length stats."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["method", *_METRIC_COLUMNS, "chars_mean", "chars_std", "words_mean",
             "words_std", "sentences_mean", "sentences_std", "vocab_size"]
        )
        for name, entry in methods.items():
            stats = entry["stats"]
            writer.writerow(
                [
                    name,
                    *[f"{v:.6f}" for v in _metric_row(entry["metrics"])],
                    f"{stats['chars']['mean']:.2f}",
                    f"{stats['chars']['std']:.2f}",
                    f"{stats['words']['mean']:.2f}",
                    f"{stats['words']['std']:.2f}",
                    f"{stats['sentences']['mean']:.2f}",
                    f"{stats['sentences']['std']:.2f}",
                    stats["vocab_size"],
                ]
            )


def render_metrics_figure(path: str | Path, methods: dict[str, dict]) -> None:
    """Grouped bar chart of all six metrics per method (CIDEr on a 0-10
    scale, shown divided by 10 to share the axis)."""
    names = list(methods)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.8 / max(len(names), 1)
    labels = ["BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "METEOR", "CIDEr/10"]
    for i, name in enumerate(names):
        values = _metric_row(methods[name]["metrics"])
        values[-1] /= 10.0
        positions = [j + i * width for j in range(len(values))]
        ax.bar(positions, values, width=width, label=name)
    ax.set_xticks([j + width * (len(names) - 1) / 2 for j in range(len(labels))])
    ax.set_xticklabels(labels)
    ax.set_ylabel("score")
    ax.set_title("Text similarity metrics by method")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_stats_figure(path: str | Path, stats_by_method: dict[str, dict]) -> None:
    """Mean +/- std of characters, words, and sentences per method."""
    names = list(stats_by_method)
    fields = ["chars", "words", "sentences"]
    fig, axes = plt.subplots(1, 3, figsize=(10, 3.5))
    for ax, field_name in zip(axes, fields):
        means = [stats_by_method[n][field_name]["mean"] for n in names]
        stds = [stats_by_method[n][field_name]["std"] for n in names]
        ax.bar(range(len(names)), means, yerr=stds, capsize=3)
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
        ax.set_title(field_name)
    fig.suptitle("Paragraph length statistics")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
