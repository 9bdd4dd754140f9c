"""CART-style decision trees with three split-search modes.

``all_features`` is the classical exact search, ``random_subspace``
restricts each split to a random feature subset (random-forest style), and
``random_threshold`` scores one uniformly drawn threshold per feature
(extra-trees style).  Duplicate sample indices weight rows by multiplicity,
so a bag multiset can be fitted without materialising repeats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _tree_kernel as _k
from .datasets import Dataset

SPLIT_MODES = ("all_features", "random_subspace", "random_threshold")

_MODE_CODES = {
    "all_features": _k.MODE_ALL,
    "random_subspace": _k.MODE_SUBSPACE,
    "random_threshold": _k.MODE_RANDOM_THRESHOLD,
}


TIE_BREAKING = ("lowest_index", "random")


@dataclass
class TreeConfig:
    """Hyperparameters of a single tree fit.

    ``n_subspace_features`` defaults to ceil(sqrt(n_features)) at fit time;
    ``max_depth=None`` means unlimited.  ``tie_breaking`` controls which of
    several equal-gain splits wins: ``lowest_index`` visits features in
    ascending order (fully deterministic fits), while ``random`` visits them
    in a seeded random order per node, which decorrelates the trees of an
    ensemble; within a feature the lowest threshold always wins.
    """

    split_mode: str = "all_features"
    n_subspace_features: int | None = None
    max_depth: int | None = None
    min_samples_split: int = 2
    tie_breaking: str = "lowest_index"

    def __post_init__(self):
        if self.split_mode not in SPLIT_MODES:
            raise ValueError(f"split_mode must be one of {SPLIT_MODES}, got {self.split_mode!r}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive or None")
        if self.min_samples_split < 1:
            raise ValueError("min_samples_split must be >= 1")
        if self.n_subspace_features is not None and self.n_subspace_features < 1:
            raise ValueError("n_subspace_features must be >= 1")
        if self.tie_breaking not in TIE_BREAKING:
            raise ValueError(f"tie_breaking must be one of {TIE_BREAKING}")


@dataclass
class TreeNode:
    """One node of a fitted tree.

    Internal nodes carry ``feature_index``/``threshold`` and two children;
    leaves carry ``class_counts`` (weighted sample counts per class).
    """

    feature_index: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    class_counts: np.ndarray | None = None
    _flat: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def is_leaf(self) -> bool:
        return self.feature_index is None


def gini_impurity(class_counts) -> float:
    """1 - sum(p_c^2) for class probabilities p_c = count_c / total."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.size == 0 or (counts < 0).any():
        raise ValueError("class_counts must be nonnegative and nonempty")
    total = counts.sum()
    if total <= 0:
        raise ValueError("class_counts must not be all zero")
    p = counts / total
    return float(1.0 - np.dot(p, p))


def _as_generator(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def fit_tree(train: Dataset, sample_indices, config: TreeConfig | None = None, rng=None) -> TreeNode:
    """Fit a tree on the multiset of training rows named by ``sample_indices``.

    Recursion stops at purity, ``max_depth``, ``min_samples_split`` (counting
    occurrences, not unique rows), or when no feature takes two distinct
    values.  Equal-gain splits resolve to the lowest feature index, then the
    lowest threshold, so fits are deterministic given the generator state.
    """
    config = config or TreeConfig()
    indices = np.asarray(sample_indices, dtype=np.int64)
    if indices.size == 0:
        raise ValueError("sample_indices must be nonempty")
    if indices.min() < 0 or indices.max() >= train.n_samples:
        raise ValueError("sample_indices out of range for the training set")

    uniq, mult = np.unique(indices, return_counts=True)
    X = np.ascontiguousarray(train.features[uniq])
    y = train.labels[uniq]
    w = mult.astype(np.float64)

    k = config.n_subspace_features or max(1, math.ceil(math.sqrt(train.n_features)))
    if config.split_mode == "random_subspace" and k > train.n_features:
        raise ValueError(
            f"n_subspace_features={k} exceeds feature count {train.n_features}"
        )
    max_depth = _k.NO_DEPTH_LIMIT if config.max_depth is None else config.max_depth
    seed = 0 if rng is None else int(_as_generator(rng).integers(0, 2**31 - 1))

    feat, thr, left, right, counts = _k.grow(
        X, y, w, train.n_classes, _MODE_CODES[config.split_mode], k,
        max_depth, config.min_samples_split, seed,
        config.tie_breaking == "random",
    )
    int_counts = np.rint(counts).astype(np.int64)

    def build(i: int) -> TreeNode:
        if feat[i] < 0:
            return TreeNode(class_counts=int_counts[i])
        return TreeNode(
            feature_index=int(feat[i]),
            threshold=float(thr[i]),
            left=build(int(left[i])),
            right=build(int(right[i])),
        )

    root = build(0)
    leaf_class = np.argmax(counts, axis=1)
    root._flat = (feat, thr, left, right, leaf_class)
    return root


def predict_tree(t: TreeNode, row) -> int:
    """Route one feature vector to a leaf; ties go to the lowest class index."""
    row = np.asarray(row, dtype=np.float64).ravel()
    node = t
    while not node.is_leaf:
        if node.feature_index >= row.shape[0]:
            raise ValueError(
                f"row has width {row.shape[0]} but the tree tests feature {node.feature_index}"
            )
        node = node.left if row[node.feature_index] <= node.threshold else node.right
    return int(np.argmax(node.class_counts))


def _flatten(t: TreeNode) -> tuple:
    nodes: list[TreeNode] = []

    def collect(node):
        nodes.append(node)
        if not node.is_leaf:
            collect(node.left)
            collect(node.right)

    collect(t)
    order = {id(n): i for i, n in enumerate(nodes)}
    n = len(nodes)
    feat = np.full(n, -1, np.int64)
    thr = np.zeros(n, np.float64)
    left = np.full(n, -1, np.int64)
    right = np.full(n, -1, np.int64)
    leaf_class = np.zeros(n, np.int64)
    for i, node in enumerate(nodes):
        if node.is_leaf:
            leaf_class[i] = int(np.argmax(node.class_counts))
        else:
            feat[i] = node.feature_index
            thr[i] = node.threshold
            left[i] = order[id(node.left)]
            right[i] = order[id(node.right)]
    return feat, thr, left, right, leaf_class


def predict_many(t: TreeNode, X) -> np.ndarray:
    """Vectorised :func:`predict_tree` over the rows of a matrix."""
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if X.ndim != 2:
        raise ValueError("X must be 2-d")
    if t._flat is None:
        t._flat = _flatten(t)
    feat, thr, left, right, leaf_class = t._flat
    used = feat.max(initial=-1)
    if used >= X.shape[1]:
        raise ValueError(f"X has width {X.shape[1]} but the tree tests feature {used}")
    return _k.predict(feat, thr, left, right, leaf_class, X)


def tree_depth(t: TreeNode) -> int:
    """Longest root-to-leaf edge count; a lone leaf has depth 0."""
    if t.is_leaf:
        return 0
    return 1 + max(tree_depth(t.left), tree_depth(t.right))


def tree_to_text(t: TreeNode) -> str:
    """Debug dump: one node per line, preorder, children indented."""
    lines: list[str] = []

    def walk(node, depth):
        pad = "  " * depth
        if node.is_leaf:
            lines.append(f"{pad}leaf counts={','.join(str(int(c)) for c in node.class_counts)}")
        else:
            lines.append(f"{pad}split feature={node.feature_index} threshold={node.threshold!r}")
            walk(node.left, depth + 1)
            walk(node.right, depth + 1)

    walk(t, 0)
    return "\n".join(lines) + "\n"
