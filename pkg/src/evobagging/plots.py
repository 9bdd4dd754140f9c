"""Figure rendering for the experiment verbs.

Each function saves one PNG next to the delimited output.  Figures are a
convenience view; the CSV/JSON files stay the canonical results.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 130


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def fitness_curves(telemetry: dict[int, list], path: str) -> None:
    """Mean bag fitness per iteration, averaged over repetitions."""
    fig, ax = plt.subplots(figsize=(6, 4))
    curves = []
    for rep, stats in sorted(telemetry.items()):
        values = [s.mean_fitness for s in stats]
        curves.append(values)
        ax.plot(range(len(values)), values, color="tab:blue", alpha=0.15, lw=0.8)
    mean = np.mean(np.asarray(curves), axis=0)
    ax.plot(range(len(mean)), mean, color="tab:blue", lw=2, label="mean over repetitions")
    ax.set_xlabel("iteration")
    ax.set_ylabel("average bag fitness")
    ax.legend()
    _save(fig, path)


def metric_curves(telemetry: dict[int, list], path: str) -> None:
    """Ensemble train/test metric per iteration, averaged over repetitions."""
    fig, ax = plt.subplots(figsize=(6, 4))
    train = np.mean([[s.ensemble_train_metric for s in stats] for stats in telemetry.values()], axis=0)
    ax.plot(range(len(train)), train, lw=2, label="train")
    tests = [
        [s.ensemble_test_metric for s in stats]
        for stats in telemetry.values()
        if stats and stats[0].ensemble_test_metric is not None
    ]
    if tests:
        test = np.mean(np.asarray(tests, dtype=np.float64), axis=0)
        ax.plot(range(len(test)), test, lw=2, label="test")
    ax.set_xlabel("iteration")
    ax.set_ylabel("ensemble metric")
    ax.legend()
    _save(fig, path)


def roc_figure(curves: dict[str, tuple], path: str) -> None:
    """One ROC curve per model, AUC in the legend."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for name, (fpr, tpr, auc) in curves.items():
        ax.plot(fpr, tpr, lw=1.8, label=f"{name} (AUC {auc:.3f})")
    ax.plot([0, 1], [0, 1], ls="--", color="grey", lw=1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(loc="lower right", fontsize=8)
    _save(fig, path)


def bag_sweep(table: dict[str, dict[int, dict]], path: str) -> None:
    """Train (dashed) and test (solid) accuracy against the bag count."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, by_count in table.items():
        counts = sorted(by_count)
        train = [by_count[c]["train_mean"] for c in counts]
        line, = ax.plot(counts, train, ls="--", lw=1.2)
        tests = [by_count[c]["test_mean"] for c in counts]
        if all(t is not None for t in tests):
            ax.plot(counts, tests, lw=1.8, color=line.get_color(), label=name)
        else:
            line.set_label(name)
    ax.set_xlabel("number of bags")
    ax.set_ylabel("accuracy")
    ax.legend(fontsize=8)
    _save(fig, path)


def imbalance_lines(results: dict[str, dict[str, dict]], fractions: list[float], path: str) -> None:
    """Mean test F1 per model against the majority keep fraction."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, by_frac in results.items():
        ys = [by_frac[str(f)]["test_f1"]["mean"] for f in fractions]
        ax.plot(fractions, ys, marker="o", lw=1.6, label=name)
    ax.set_xlabel("majority keep fraction")
    ax.set_ylabel("test F1")
    ax.invert_xaxis()
    ax.legend(fontsize=8)
    _save(fig, path)


def diversity_bars(reports: dict[str, dict[str, float]], path: str) -> None:
    """Grouped bars of the six diversity measures per model."""
    measures = list(next(iter(reports.values())).keys())
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / len(reports)
    x = np.arange(len(measures))
    for i, (name, report) in enumerate(reports.items()):
        ax.bar(x + i * width, [report[m] for m in measures], width, label=name)
    ax.set_xticks(x + width * (len(reports) - 1) / 2)
    ax.set_xticklabels(measures, rotation=25, ha="right", fontsize=8)
    ax.set_ylabel("measure value")
    ax.legend(fontsize=8)
    _save(fig, path)


def hyper_scores(scores: list[float], path: str) -> None:
    """Mean CV accuracy per grid candidate, in grid order."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(len(scores)), scores, lw=1.2)
    best = int(np.argmax(scores))
    ax.scatter([best], [scores[best]], color="tab:red", zorder=3, label="best")
    ax.set_xlabel("candidate index")
    ax.set_ylabel("mean CV accuracy")
    ax.legend(fontsize=8)
    _save(fig, path)
