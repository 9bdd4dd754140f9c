"""Dataset containers, CSV ingestion, synthetic generators, and resampling.

Every random operation takes an explicit seed or generator, so all of the
functions here are pure and reproducible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


class DatasetError(ValueError):
    """A file or value could not be turned into a valid dataset."""


@dataclass
class Dataset:
    """A numeric feature matrix with integer class labels.

    Attributes:
        features: (n_samples, n_features) float matrix, one row per sample.
        labels: (n_samples,) integer vector with values in [0, n_classes).
        n_classes: number of distinct classes (>= 2).
        feature_names: optional column names, same length as the feature width.
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DatasetError("features must be a 2-d matrix")
        if self.features.shape[0] != self.labels.shape[0]:
            raise DatasetError(
                f"feature rows ({self.features.shape[0]}) != labels ({self.labels.shape[0]})"
            )
        if self.n_classes < 2:
            raise DatasetError("a dataset needs at least 2 classes")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise DatasetError("labels must lie in [0, n_classes)")
        if self.feature_names is not None and len(self.feature_names) != self.features.shape[1]:
            raise DatasetError("feature_names length must match the feature width")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> np.ndarray:
        """Samples per class, indexed by class label."""
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, indices: np.ndarray) -> "Dataset":
        """New dataset holding the given rows (duplicates allowed)."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.n_classes, self.feature_names)


@dataclass
class SplitPair:
    """A disjoint train/test partition of one source dataset."""

    train: Dataset
    test: Dataset


def load_csv(path, label_column, header: bool = True) -> Dataset:
    """Load a comma-separated file into a :class:`Dataset`.

    Feature columns whose cells all parse as real numbers stay numeric;
    any other column is integer-encoded by first appearance.  Labels are
    re-indexed to 0..n_classes-1 by first appearance as well.

    Args:
        path: file to read (UTF-8, decimal point ``.``).
        label_column: column name (requires ``header=True``) or column index
            (negative indices count from the right).
        header: whether the first row holds column names.

    Raises:
        DatasetError: missing file, ragged or empty rows, empty cells, or an
            absent label column; messages carry the offending row/column.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise DatasetError(f"no such file: {path}") from None

    rows = [r for r in rows if r]  # drop fully blank lines
    names: list[str] | None = None
    if header:
        if not rows:
            raise DatasetError(f"{path}: file is empty")
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DatasetError(f"{path}: no data rows")

    width = len(names) if names is not None else len(rows[0])
    first_line = 2 if header else 1
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DatasetError(
                f"{path}: row {first_line + i} has {len(row)} cells, expected {width}"
            )

    if isinstance(label_column, str):
        if names is None:
            raise DatasetError("label selection by name requires a header row")
        if label_column not in names:
            raise DatasetError(f"{path}: no column named {label_column!r}")
        label_idx = names.index(label_column)
    else:
        label_idx = int(label_column)
        if label_idx < 0:
            label_idx += width
        if not 0 <= label_idx < width:
            raise DatasetError(f"{path}: label column index {label_column} out of range")

    feature_cols = [j for j in range(width) if j != label_idx]
    n = len(rows)
    features = np.empty((n, len(feature_cols)), dtype=np.float64)

    for out_j, j in enumerate(feature_cols):
        cells = [rows[i][j].strip() for i in range(n)]
        for i, cell in enumerate(cells):
            if cell == "":
                raise DatasetError(
                    f"{path}: empty cell at row {first_line + i}, column {j + 1}"
                )
        try:
            col = np.array([float(c) for c in cells])
        except ValueError:
            codes: dict[str, int] = {}
            col = np.array([float(codes.setdefault(c, len(codes))) for c in cells])
        features[:, out_j] = col

    label_codes: dict[str, int] = {}
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        cell = rows[i][label_idx].strip()
        if cell == "":
            raise DatasetError(
                f"{path}: empty cell at row {first_line + i}, column {label_idx + 1}"
            )
        labels[i] = label_codes.setdefault(cell, len(label_codes))

    if len(label_codes) < 2:
        raise DatasetError(f"{path}: label column holds fewer than 2 distinct classes")

    feature_names = [names[j] for j in feature_cols] if names is not None else None
    return Dataset(features, labels, len(label_codes), feature_names)


def gen_nbit_parity(n: int) -> Dataset:
    """All 2**n binary strings, labelled 1 when the bit sum is even.

    The label is the odd-parity bit: the bit that would make the total
    number of ones odd.
    """
    if not 1 <= n <= 20:
        raise ValueError(f"n must be in [1, 20], got {n}")
    rows = 1 << n
    features = np.zeros((rows, n), dtype=np.float64)
    labels = np.zeros(rows, dtype=np.int64)
    for i in range(rows):
        bits = [(i >> (n - 1 - b)) & 1 for b in range(n)]
        features[i] = bits
        labels[i] = 1 - (sum(bits) % 2)
    names = [f"bit{b}" for b in range(n)]
    return Dataset(features, labels, 2, names)


def gen_two_spiral(n_points: int, noise: float = 0.0, seed: int = 0) -> Dataset:
    """Two interleaved planar spirals with ``n_points/2`` samples per class.

    Point i of the first spiral sits at angle ``i*pi/16`` with a radius that
    shrinks linearly from 6.5; the second spiral is the first mirrored
    through the origin.  With ``noise=0`` the layout is deterministic and the
    classes are exactly point-symmetric.  ``noise`` is the standard deviation
    of Gaussian jitter added to both coordinates.
    """
    if n_points <= 0 or n_points % 2:
        raise ValueError(f"n_points must be positive and even, got {n_points}")
    if noise < 0:
        raise ValueError("noise must be >= 0")
    half = n_points // 2
    i = np.arange(half)
    phi = i * np.pi / 16.0
    radius = 6.5 * (half + 7 - i) / (half + 7)
    x = radius * np.cos(phi)
    y = radius * np.sin(phi)
    features = np.concatenate(
        [np.column_stack([x, y]), np.column_stack([-x, -y])], axis=0
    )
    if noise > 0:
        rng = np.random.default_rng(seed)
        features = features + rng.normal(0.0, noise, size=features.shape)
    labels = np.concatenate([np.zeros(half, np.int64), np.ones(half, np.int64)])
    return Dataset(features, labels, 2, ["x1", "x2"])


_TTT_LINES = ((0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8), (0, 4, 8), (2, 4, 6))


def gen_tictactoe_endgames() -> Dataset:
    """Every terminal tic-tac-toe board under legal alternating play, x first.

    Enumerates the game tree and keeps the distinct boards where the game is
    over (a completed line or a full board).  Yields the classic 958-board
    benchmark: class 1 where x holds a line (626 boards), class 0 otherwise.
    Cells are encoded x=0, o=1, blank=2 (first-appearance order of the
    canonical file); rows are sorted lexicographically by that encoding.
    """

    def line_winner(board):
        for a, b, c in _TTT_LINES:
            if board[a] != 0 and board[a] == board[b] == board[c]:
                return board[a]
        return 0

    terminal: set[tuple[int, ...]] = set()
    stack = [((0,) * 9, 1)]
    seen: set[tuple[tuple[int, ...], int]] = set()
    while stack:
        board, player = stack.pop()
        if (board, player) in seen:
            continue
        seen.add((board, player))
        if line_winner(board) or 0 not in board:
            terminal.add(board)
            continue
        for cell in range(9):
            if board[cell] == 0:
                nxt = list(board)
                nxt[cell] = player
                stack.append((tuple(nxt), 3 - player))

    # walker marks: x=1, o=2, blank=0 -> published encoding: x=0, o=1, blank=2
    recode = {1: 0, 2: 1, 0: 2}
    boards = sorted(tuple(recode[c] for c in b) for b in terminal)
    features = np.array(boards, dtype=np.float64)

    def x_wins(board):
        return any(board[a] == 0 and board[a] == board[b] == board[c] for a, b, c in _TTT_LINES)

    labels = np.array([1 if x_wins(b) else 0 for b in boards], dtype=np.int64)
    names = ["tl", "tm", "tr", "ml", "mm", "mr", "bl", "bm", "br"]
    return Dataset(features, labels, 2, names)


def load_builtin(name: str) -> Dataset:
    """Datasets that ship with the package or with scikit-learn.

    Supported names: ``tictactoe``, ``breast_cancer``, ``digits`` (alias
    ``mnist`` for the 8x8 handwritten-digit set).
    """
    key = name.strip().lower()
    if key == "tictactoe":
        return gen_tictactoe_endgames()
    if key in ("breast_cancer", "digits", "mnist"):
        from sklearn.datasets import load_breast_cancer, load_digits

        bunch = load_breast_cancer() if key == "breast_cancer" else load_digits()
        data = np.asarray(bunch.data, dtype=np.float64)
        target = np.asarray(bunch.target, dtype=np.int64)
        names = list(getattr(bunch, "feature_names", [])) or None
        if names is not None:
            names = [str(c) for c in names]
        return Dataset(data, target, int(target.max()) + 1, names)
    raise DatasetError(f"unknown builtin dataset: {name!r}")


def stratified_split(d: Dataset, test_fraction: float, seed: int) -> SplitPair:
    """Split into train/test keeping per-class proportions.

    Per-class test counts use largest-remainder rounding so the test size is
    ``ceil(test_fraction * n)``.  The same seed always yields the same split.

    Raises:
        ValueError: test_fraction outside (0, 1) or a class with fewer than
            2 samples.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    counts = d.class_counts()
    for c, cnt in enumerate(counts):
        if cnt < 2:
            raise ValueError(f"class {c} has {cnt} sample(s); need at least 2 to split")

    exact = counts * test_fraction
    base = np.floor(exact).astype(np.int64)
    target_total = math.ceil(test_fraction * d.n_samples)
    deficit = target_total - int(base.sum())
    # hand the leftover slots to the classes with the largest remainders,
    # never emptying a class's training side
    order = sorted(range(d.n_classes), key=lambda c: (-(exact[c] - base[c]), c))
    test_counts = base.copy()
    for c in order:
        if deficit <= 0:
            break
        if test_counts[c] < counts[c] - 1:
            test_counts[c] += 1
            deficit -= 1

    rng = np.random.default_rng(seed)
    test_idx: list[np.ndarray] = []
    train_idx: list[np.ndarray] = []
    for c in range(d.n_classes):
        members = np.flatnonzero(d.labels == c)
        perm = rng.permutation(members)
        test_idx.append(perm[: test_counts[c]])
        train_idx.append(perm[test_counts[c]:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return SplitPair(train=d.subset(train), test=d.subset(test))


def bootstrap_indices(n_population: int, size: int, rng) -> np.ndarray:
    """``size`` indices drawn i.i.d. uniform over [0, n_population)."""
    if n_population < 1:
        raise ValueError("n_population must be >= 1")
    if size < 1:
        raise ValueError("size must be >= 1")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    return rng.integers(0, n_population, size=size, dtype=np.int64)


def undersample_majority(d: Dataset, keep_fraction: float, seed: int) -> Dataset:
    """Shrink the majority class of a binary dataset, without replacement.

    Keeps ``ceil(keep_fraction * majority_count)`` majority rows chosen
    uniformly; minority rows are untouched.  Row order is preserved.
    """
    if d.n_classes != 2:
        raise ValueError("undersampling is defined for binary datasets only")
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    counts = d.class_counts()
    majority = int(np.argmax(counts)) if counts[0] != counts[1] else 1
    if keep_fraction == 1.0:
        return Dataset(d.features.copy(), d.labels.copy(), d.n_classes, d.feature_names)
    keep = math.ceil(keep_fraction * counts[majority])
    rng = np.random.default_rng(seed)
    majority_rows = np.flatnonzero(d.labels == majority)
    kept = rng.permutation(majority_rows)[:keep]
    rows = np.sort(np.concatenate([np.flatnonzero(d.labels != majority), kept]))
    return d.subset(rows)
