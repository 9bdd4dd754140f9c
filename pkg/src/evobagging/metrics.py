"""Classification metrics, ROC/AUC, per-learner bias, and diversity measures.

The diversity suite follows the standard correctness-oracle formulations:
each prediction is reduced to correct/incorrect against the truth, pairwise
measures (Q statistic, disagreement, double fault) are averaged over all
learner pairs, and the nonpairwise ones (Kohavi-Wolpert variance, entropy,
generalized diversity) are computed from per-sample correct-vote counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np


def _check_lengths(predictions, truth):
    predictions = np.asarray(predictions, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predictions.shape != truth.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {truth.shape}")
    return predictions, truth


def accuracy(predictions, truth) -> float:
    predictions, truth = _check_lengths(predictions, truth)
    return float(np.mean(predictions == truth))


def minority_class(truth, n_classes: int | None = None) -> int:
    """Least frequent class in ``truth``; ties go to the lowest index."""
    truth = np.asarray(truth, dtype=np.int64)
    counts = np.bincount(truth, minlength=n_classes or int(truth.max()) + 1)
    return int(np.argmin(counts))


def precision(predictions, truth, positive_class: int | None = None) -> float:
    """TP / (TP + FP) against one positive class; 0 when nothing is predicted positive."""
    predictions, truth = _check_lengths(predictions, truth)
    pos = minority_class(truth) if positive_class is None else positive_class
    predicted = predictions == pos
    if not predicted.any():
        return 0.0
    return float(np.mean(truth[predicted] == pos))


def recall(predictions, truth, positive_class: int | None = None) -> float:
    """TP / (TP + FN) against one positive class; 0 when no positives exist."""
    predictions, truth = _check_lengths(predictions, truth)
    pos = minority_class(truth) if positive_class is None else positive_class
    actual = truth == pos
    if not actual.any():
        return 0.0
    return float(np.mean(predictions[actual] == pos))


def f1(predictions, truth, positive_class: int | None = None) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    p = precision(predictions, truth, positive_class)
    r = recall(predictions, truth, positive_class)
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def _macro(metric, predictions, truth, n_classes):
    predictions, truth = _check_lengths(predictions, truth)
    if n_classes is None:
        n_classes = int(max(predictions.max(), truth.max())) + 1
    return float(np.mean([metric(predictions, truth, c) for c in range(n_classes)]))


def macro_precision(predictions, truth, n_classes: int | None = None) -> float:
    return _macro(precision, predictions, truth, n_classes)


def macro_recall(predictions, truth, n_classes: int | None = None) -> float:
    return _macro(recall, predictions, truth, n_classes)


def macro_f1(predictions, truth, n_classes: int | None = None) -> float:
    return _macro(f1, predictions, truth, n_classes)


def roc_curve(scores, truth, positive_class: int = 1):
    """ROC points swept over score thresholds, tied scores grouped.

    Returns (fpr, tpr) arrays starting at (0, 0) and ending at (1, 1).
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.int64)
    if scores.shape != truth.shape:
        raise ValueError("scores and truth must have the same length")
    pos = truth == positive_class
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC is undefined when the truth holds a single class")

    order = np.argsort(-scores, kind="mergesort")
    sorted_scores = scores[order]
    tp = np.cumsum(pos[order])
    fp = np.cumsum(~pos[order])
    # keep only the last entry of each tied-score block
    boundary = np.append(sorted_scores[1:] != sorted_scores[:-1], True)
    tpr = np.concatenate([[0.0], tp[boundary] / n_pos])
    fpr = np.concatenate([[0.0], fp[boundary] / n_neg])
    return fpr, tpr


def roc_auc(scores, truth, positive_class: int = 1) -> float:
    """Area under the ROC curve by the trapezoidal rule."""
    fpr, tpr = roc_curve(scores, truth, positive_class)
    return float(np.trapezoid(tpr, fpr))


def one_vs_rest_auc(score_matrix, truth) -> np.ndarray:
    """Per-class one-vs-rest AUC from an (n_samples, n_classes) score matrix.

    Classes absent from the truth get NaN.
    """
    score_matrix = np.asarray(score_matrix, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.int64)
    out = np.full(score_matrix.shape[1], np.nan)
    for c in range(score_matrix.shape[1]):
        binary = (truth == c).astype(np.int64)
        if 0 < binary.sum() < binary.size:
            out[c] = roc_auc(score_matrix[:, c], binary, positive_class=1)
    return out


def bias_indicator(prediction: int, truth: int) -> int:
    """0 when the prediction matches the truth, 1 otherwise."""
    return 0 if prediction == truth else 1


@dataclass
class PredictionMatrix:
    """Predictions of several learners on one evaluation set.

    ``entries`` is (n_learners, n_samples); ``truth`` has one label per column.
    """

    entries: np.ndarray
    truth: np.ndarray
    n_classes: int

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.int64)
        self.truth = np.asarray(self.truth, dtype=np.int64)
        if self.entries.ndim != 2:
            raise ValueError("entries must be 2-d (learners x samples)")
        if self.entries.shape[1] != self.truth.shape[0]:
            raise ValueError("entry columns must match truth length")

    @property
    def n_learners(self) -> int:
        return self.entries.shape[0]


def average_ensemble_bias(m: PredictionMatrix) -> float:
    """Mean 0/1 error over every (learner, sample) cell."""
    if m.entries.size == 0:
        raise ValueError("prediction matrix is empty")
    return float(np.mean(m.entries != m.truth[None, :]))


@dataclass
class DiversityReport:
    """The six ensemble diversity measures.

    Lower Q statistic and double fault mean more diversity; for the other
    four, higher means more diversity.
    """

    q_statistic: float
    disagreement: float
    double_fault: float
    kohavi_wolpert: float
    entropy: float
    generalized_diversity: float

    def to_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def diversity_measures(m: PredictionMatrix) -> DiversityReport:
    """Compute all six measures from learner correctness patterns.

    Pairwise measures use the joint-correctness table of each learner pair
    (n11 both right, n00 both wrong, n10/n01 exactly one right):

        Q = (n11*n00 - n01*n10) / (n11*n00 + n01*n10)    (0 when the
            denominator vanishes), disagreement = (n01+n10)/n, and
        double fault = n00/n, each averaged over all pairs.

    With l(j) = number of learners correct on sample j out of L:

        KW variance = mean(l*(L-l)) / L**2,
        entropy     = mean(min(l, L-l)) / (L - ceil(L/2)),
        generalized diversity = 1 - p2/p1 with p1 = E[failures]/L and
            p2 = E[failures*(failures-1)] / (L*(L-1)); 0 when p1 = 0.
    """
    if m.n_learners < 2:
        raise ValueError("diversity needs at least 2 learners")
    correct = (m.entries == m.truth[None, :]).astype(np.float64)
    n_learners, n = correct.shape

    both_right = correct @ correct.T
    wrong = 1.0 - correct
    both_wrong = wrong @ wrong.T
    first_only = correct @ wrong.T
    second_only = wrong @ correct.T

    iu = np.triu_indices(n_learners, k=1)
    n11 = both_right[iu]
    n00 = both_wrong[iu]
    n10 = first_only[iu]
    n01 = second_only[iu]

    num = n11 * n00 - n01 * n10
    den = n11 * n00 + n01 * n10
    q_pairs = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)

    votes = correct.sum(axis=0)
    failures = n_learners - votes
    kw = float(np.mean(votes * (n_learners - votes)) / n_learners**2)
    entropy = float(
        np.mean(np.minimum(votes, n_learners - votes)) / (n_learners - math.ceil(n_learners / 2))
    )
    p1 = float(np.mean(failures)) / n_learners
    p2 = float(np.mean(failures * (failures - 1))) / (n_learners * (n_learners - 1))
    gd = 0.0 if p1 == 0.0 else 1.0 - p2 / p1

    return DiversityReport(
        q_statistic=float(np.mean(q_pairs)),
        disagreement=float(np.mean((n01 + n10) / n)),
        double_fault=float(np.mean(n00 / n)),
        kohavi_wolpert=kw,
        entropy=entropy,
        generalized_diversity=gd,
    )
