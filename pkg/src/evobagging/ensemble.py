"""Bagged tree ensembles and vote aggregation.

``fit_bagging`` covers the three baselines (bagging, random forest,
extra-trees) through the tree's split mode.  Member fitting draws each
member's randomness from a stream derived from (seed, member index), so a
parallel fit would reproduce the serial result exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import Dataset, bootstrap_indices
from .metrics import accuracy
from .tree import TreeConfig, TreeNode, fit_tree, predict_many

VOTING_RULES = ("majority", "weighted")


@dataclass
class EnsembleMember:
    bag: np.ndarray
    tree: TreeNode
    train_accuracy: float


@dataclass
class Ensemble:
    members: list[EnsembleMember]
    n_classes: int
    voting: str = "majority"

    def __post_init__(self):
        if not self.members:
            raise ValueError("an ensemble needs at least one member")
        if self.voting not in VOTING_RULES:
            raise ValueError(f"voting must be one of {VOTING_RULES}, got {self.voting!r}")

    @property
    def n_members(self) -> int:
        return len(self.members)


def _vote_counts(per_learner_predictions, n_classes, weights=None) -> np.ndarray:
    preds = np.asarray(per_learner_predictions, dtype=np.int64)
    if preds.ndim != 2 or preds.size == 0:
        raise ValueError("predictions must be a nonempty learners x samples matrix")
    n_learners, n_samples = preds.shape
    if weights is None:
        weights = np.ones(n_learners)
    else:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (n_learners,):
            raise ValueError(
                f"got {weights.size} weights for {n_learners} learners"
            )
    counts = np.zeros((n_samples, n_classes), dtype=np.float64)
    for learner in range(n_learners):
        counts[np.arange(n_samples), preds[learner]] += weights[learner]
    return counts


def majority_vote(per_learner_predictions, n_classes: int) -> np.ndarray:
    """Per sample, the class most learners predicted; ties to the lowest class."""
    return np.argmax(_vote_counts(per_learner_predictions, n_classes), axis=1)


def weighted_vote(per_learner_predictions, learner_accuracies, n_classes: int) -> np.ndarray:
    """Accuracy-weighted voting: argmax of per-class weighted vote sums.

    With all weights equal this reduces to :func:`majority_vote`; ties go to
    the lowest class index.
    """
    counts = _vote_counts(per_learner_predictions, n_classes, learner_accuracies)
    return np.argmax(counts, axis=1)


def fit_bagging(
    train: Dataset,
    n_bags: int,
    bag_size: int | None = None,
    split_mode: str = "all_features",
    seed: int = 0,
    tree_config: TreeConfig | None = None,
    accuracy_on_bag: bool = False,
    voting: str = "majority",
) -> Ensemble:
    """Fit ``n_bags`` trees on bootstrap bags of ``bag_size`` rows.

    ``bag_size`` defaults to the training-set size (classical bagging).
    Each member records its training accuracy, measured on the full training
    set (or on its own bag with ``accuracy_on_bag=True``) for weighted voting.
    Unless a ``tree_config`` overrides it, member trees break split ties in
    seeded random order, which keeps them decorrelated.
    """
    if n_bags < 1:
        raise ValueError("n_bags must be >= 1")
    size = bag_size if bag_size is not None else train.n_samples
    if size < 1:
        raise ValueError("bag_size must be >= 1")
    if tree_config is None:
        config = TreeConfig(split_mode=split_mode, tie_breaking="random")
    else:
        config = TreeConfig(
            split_mode=split_mode,
            n_subspace_features=tree_config.n_subspace_features,
            max_depth=tree_config.max_depth,
            min_samples_split=tree_config.min_samples_split,
            tie_breaking=tree_config.tie_breaking,
        )
    members = []
    for j in range(n_bags):
        rng = np.random.default_rng([seed, j])
        bag = bootstrap_indices(train.n_samples, size, rng)
        t = fit_tree(train, bag, config, rng)
        if accuracy_on_bag:
            acc = accuracy(predict_many(t, train.features[bag]), train.labels[bag])
        else:
            acc = accuracy(predict_many(t, train.features), train.labels)
        members.append(EnsembleMember(bag=bag, tree=t, train_accuracy=acc))
    return Ensemble(members=members, n_classes=train.n_classes, voting=voting)


def member_predictions(e: Ensemble, data: Dataset) -> np.ndarray:
    """(n_members, n_samples) matrix of each member tree's predictions."""
    return np.stack([predict_many(m.tree, data.features) for m in e.members])


def ensemble_predict(e: Ensemble, data: Dataset) -> np.ndarray:
    """Aggregate member predictions under the ensemble's voting rule."""
    preds = member_predictions(e, data)
    if e.voting == "weighted":
        weights = [m.train_accuracy for m in e.members]
        return weighted_vote(preds, weights, e.n_classes)
    return majority_vote(preds, e.n_classes)


def vote_fractions(e: Ensemble, data: Dataset) -> np.ndarray:
    """(n_samples, n_classes) per-class vote proportions, used as ROC scores.

    Weighted ensembles contribute their accuracy weights; rows sum to 1.
    """
    preds = member_predictions(e, data)
    weights = None
    if e.voting == "weighted":
        weights = np.asarray([m.train_accuracy for m in e.members])
        if weights.sum() <= 0:
            weights = None
    counts = _vote_counts(preds, e.n_classes, weights)
    return counts / counts.sum(axis=1, keepdims=True)
