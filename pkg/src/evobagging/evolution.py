"""The evolutionary bagging loop.

Each bag of a bagged tree ensemble is treated as an individual.  A bag's
fitness rewards the classification quality of its fitted tree and, through
a size-bias constant, larger bags:

    fitness = alpha * (size_bias + bag_size) / size_bias

where ``alpha`` is the tree's metric on the full training set by default
(``fitness_on_bag=True`` switches it to the bag's own multiset).  Every
generation replaces the population with: the top bags carried over
unchanged (optional elitism, off by default), fresh bootstrap bags (the
generation gap), and children produced by crossing the rank-selected
remainder in random pairs.  Crossover keeps each parent's correctly
predicted occurrences in place and hands its misclassified occurrences to
the partner, so the union of the two children always equals the union of
the two parents.  A few bags are then mutated by swapping occurrences for
samples currently outside the bag.

Randomness is drawn from streams derived from (seed, iteration) for the
population operators and (seed, iteration, slot) for per-bag evaluation, so
a parallel evaluation schedule would reproduce the serial run exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datasets import Dataset, bootstrap_indices
from .ensemble import Ensemble, EnsembleMember, majority_vote, weighted_vote
from .metrics import accuracy, f1, macro_f1, minority_class
from .tree import TreeConfig, TreeNode, fit_tree, predict_many

FITNESS_METRICS = ("accuracy", "f1")

TELEMETRY_COLUMNS = (
    "iteration",
    "mean_fitness",
    "mean_bag_size",
    "coverage_ratio",
    "train_metric",
    "test_metric",
    "mean_bias",
)


@dataclass
class Bag:
    """A multiset of training-row indices plus caches from its last fit.

    ``correct_mask[i]`` says whether the bag's own tree classified the row at
    ``indices[i]`` correctly during the last evaluation.
    """

    indices: np.ndarray
    fitness: float | None = None
    correct_mask: np.ndarray | None = None

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        if self.indices.size == 0:
            raise ValueError("a bag must hold at least one index")

    @property
    def size(self) -> int:
        return int(self.indices.size)

    def copy(self) -> "Bag":
        return Bag(
            self.indices.copy(),
            self.fitness,
            None if self.correct_mask is None else self.correct_mask.copy(),
        )


@dataclass
class EvoConfig:
    """All hyperparameters of one evolutionary bagging run.

    ``gap_count``, ``mutation_count`` and ``mutation_size`` are absolute
    counts; use :meth:`from_percentages` to derive them from the usual
    percent-of-population / percent-of-bag-size settings.
    """

    n_bags: int
    max_bag_size: int
    gap_count: int
    mutation_count: int
    mutation_size: int
    size_bias: float = 1000.0
    max_iterations: int = 10
    fitness_metric: str = "accuracy"
    elitist_count: int = 0
    seed: int = 0
    fitness_on_bag: bool = False

    def validate(self) -> None:
        if self.n_bags < 1:
            raise ValueError("n_bags must be >= 1")
        if self.max_bag_size < 1:
            raise ValueError("max_bag_size must be >= 1")
        if not 0 <= self.gap_count < self.n_bags:
            raise ValueError("gap_count must satisfy 0 <= gap_count < n_bags")
        if not 0 <= self.mutation_count <= self.n_bags:
            raise ValueError("mutation_count must be in [0, n_bags]")
        if not 0 <= self.mutation_size <= self.max_bag_size:
            raise ValueError("mutation_size must be in [0, max_bag_size]")
        if self.size_bias < 1:
            raise ValueError("size_bias must be >= 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.fitness_metric not in FITNESS_METRICS:
            raise ValueError(f"fitness_metric must be one of {FITNESS_METRICS}")
        if self.elitist_count < 0 or self.elitist_count + self.gap_count > self.n_bags:
            raise ValueError("elitist_count + gap_count must not exceed n_bags")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")

    @classmethod
    def from_percentages(
        cls,
        n_bags: int,
        train_size: int,
        gap_percent: float,
        mutation_percent: float,
        mutation_size_percent: float = 5.0,
        size_bias: float = 1000.0,
        max_iterations: int = 10,
        fitness_metric: str = "accuracy",
        elitist_count: int = 0,
        seed: int = 0,
        max_bag_size: int | None = None,
        mutation_size: int | None = None,
        fitness_on_bag: bool = False,
    ) -> "EvoConfig":
        """Build a config from protocol-style percentages.

        ``gap_percent`` and ``mutation_percent`` are percents of ``n_bags``;
        ``mutation_size_percent`` is a percent of the maximum bag size (which
        defaults to ``train_size``).  Counts round half up.  An absolute
        ``mutation_size`` overrides the percentage when given.
        """
        s = max_bag_size if max_bag_size is not None else train_size
        half_up = lambda x: int(math.floor(x + 0.5))
        ms = mutation_size if mutation_size is not None else half_up(s * mutation_size_percent / 100.0)
        cfg = cls(
            n_bags=n_bags,
            max_bag_size=s,
            gap_count=half_up(n_bags * gap_percent / 100.0),
            mutation_count=half_up(n_bags * mutation_percent / 100.0),
            mutation_size=ms,
            size_bias=size_bias,
            max_iterations=max_iterations,
            fitness_metric=fitness_metric,
            elitist_count=elitist_count,
            seed=seed,
            fitness_on_bag=fitness_on_bag,
        )
        cfg.validate()
        return cfg


@dataclass
class GenerationStats:
    """Per-generation telemetry captured after each evaluation pass."""

    iteration: int
    mean_fitness: float
    mean_bag_size: float
    coverage_ratio: float
    ensemble_train_metric: float
    ensemble_test_metric: float | None
    mean_bias: float

    def as_row(self) -> tuple:
        return (
            self.iteration,
            self.mean_fitness,
            self.mean_bag_size,
            self.coverage_ratio,
            self.ensemble_train_metric,
            "" if self.ensemble_test_metric is None else self.ensemble_test_metric,
            self.mean_bias,
        )


def bag_fitness(alpha: float, bag_size: int, size_bias: float) -> float:
    """alpha * (size_bias + bag_size) / size_bias."""
    if size_bias < 1:
        raise ValueError("size_bias must be >= 1")
    if bag_size < 0:
        raise ValueError("bag_size must be >= 0")
    return alpha * (size_bias + bag_size) / size_bias


def _random_bag(train_size: int, max_bag_size: int, rng: np.random.Generator) -> Bag:
    # size law: uniform integer in [ceil(S/2), S]
    low = math.ceil(max_bag_size / 2)
    size = int(rng.integers(low, max_bag_size + 1))
    return Bag(bootstrap_indices(train_size, size, rng))


def init_population(train_size: int, cfg: EvoConfig, rng) -> list[Bag]:
    """N bags of random size in [ceil(S/2), S], filled by bootstrap sampling."""
    if train_size < 2:
        raise ValueError("train_size must be >= 2")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    return [_random_bag(train_size, cfg.max_bag_size, rng) for _ in range(cfg.n_bags)]


def _metric_fn(metric: str, train: Dataset):
    if metric == "accuracy":
        return accuracy
    if metric == "f1":
        if train.n_classes == 2:
            pos = minority_class(train.labels, train.n_classes)
            return lambda p, t: f1(p, t, pos)
        return lambda p, t: macro_f1(p, t, train.n_classes)
    raise ValueError(f"unknown fitness metric {metric!r}")


@dataclass
class _Evaluation:
    fitness: float
    tree: TreeNode
    correct_mask: np.ndarray
    train_accuracy: float
    train_predictions: np.ndarray


def _evaluate(bag: Bag, train: Dataset, cfg: EvoConfig, rng, tree_config: TreeConfig) -> _Evaluation:
    t = fit_tree(train, bag.indices, tree_config, rng)
    preds = predict_many(t, train.features)
    correct = preds == train.labels
    metric = _metric_fn(cfg.fitness_metric, train)
    if cfg.fitness_on_bag:
        alpha = metric(preds[bag.indices], train.labels[bag.indices])
    else:
        alpha = metric(preds, train.labels)
    return _Evaluation(
        fitness=bag_fitness(alpha, bag.size, cfg.size_bias),
        tree=t,
        correct_mask=correct[bag.indices],
        train_accuracy=float(np.mean(correct)),
        train_predictions=preds,
    )


def evaluate_bag(bag: Bag, train: Dataset, cfg: EvoConfig, rng=None):
    """Fit a tree on the bag and score it.

    Returns ``(fitness, tree, correct_mask)`` and stores the fitness and
    mask on the bag.  ``correct_mask`` marks, per occurrence in the bag,
    whether the bag's own tree predicts that row's label.
    """
    out = _evaluate(bag, train, cfg, rng, TreeConfig())
    bag.fitness = out.fitness
    bag.correct_mask = out.correct_mask
    return out.fitness, out.tree, out.correct_mask


def _ranked(population: list[Bag]) -> list[int]:
    for i, b in enumerate(population):
        if b.fitness is None:
            raise ValueError(f"bag {i} has no cached fitness; evaluate the population first")
    return sorted(range(len(population)), key=lambda i: (-population[i].fitness, i))


def select_crossover_parents(population: list[Bag], count: int, rng=None) -> list[Bag]:
    """The ``count`` highest-fitness bags (ties by lower index), shuffled for pairing.

    Without an rng the ranked order is returned unshuffled.
    """
    if count > len(population):
        raise ValueError(f"cannot select {count} parents from {len(population)} bags")
    chosen = _ranked(population)[:count]
    if rng is not None:
        rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        chosen = [chosen[i] for i in rng.permutation(len(chosen))]
    return [population[i] for i in chosen]


def crossover_pair(a: Bag, b: Bag, rng=None) -> tuple[Bag, Bag]:
    """Swap the misclassified occurrences of two parent bags.

    Each child keeps its parent's correctly predicted occurrences and
    receives the partner's misclassified ones; the children's multiset union
    therefore equals the parents'.  A child that would come out empty gets
    one uniformly chosen occurrence moved back from its sibling.
    """
    for name, bag in (("a", a), ("b", b)):
        if bag.correct_mask is None:
            raise ValueError(f"parent {name} has no cached correctness mask")
        if bag.correct_mask.shape != bag.indices.shape:
            raise ValueError(f"parent {name} mask length does not match its indices")

    keep_a = a.indices[a.correct_mask]
    keep_b = b.indices[b.correct_mask]
    child_a = np.concatenate([keep_a, b.indices[~b.correct_mask]])
    child_b = np.concatenate([keep_b, a.indices[~a.correct_mask]])

    if child_a.size == 0 or child_b.size == 0:
        rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        if child_a.size == 0:
            pos = int(rng.integers(child_b.size))
            child_a = child_b[pos : pos + 1]
            child_b = np.delete(child_b, pos)
        else:
            pos = int(rng.integers(child_a.size))
            child_b = child_a[pos : pos + 1]
            child_a = np.delete(child_a, pos)
    return Bag(child_a), Bag(child_b)


def mutate_bag(bag: Bag, train_size: int, mutation_size: int, rng) -> Bag:
    """Replace ``mutation_size`` occurrences with rows from outside the bag.

    Removal positions are uniform without replacement; replacements are drawn
    without replacement from the bag's complement (with replacement when the
    complement is smaller than the mutation size, and uniformly over the full
    training set when the bag already covers everything).  Bag size is
    preserved and the result is a fresh bag with cleared caches.
    """
    if mutation_size < 0:
        raise ValueError("mutation_size must be >= 0")
    if mutation_size > bag.size:
        raise ValueError(f"mutation_size {mutation_size} exceeds bag size {bag.size}")
    if mutation_size == 0:
        return Bag(bag.indices.copy())
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    complement = np.setdiff1d(np.arange(train_size, dtype=np.int64), bag.indices)
    drop = rng.choice(bag.size, size=mutation_size, replace=False)
    if complement.size == 0:
        newcomers = rng.integers(0, train_size, size=mutation_size, dtype=np.int64)
    elif complement.size < mutation_size:
        newcomers = rng.choice(complement, size=mutation_size, replace=True)
    else:
        newcomers = rng.choice(complement, size=mutation_size, replace=False)
    kept = np.delete(bag.indices, drop)
    return Bag(np.concatenate([kept, newcomers]))


def generation_gap(cfg: EvoConfig, train_size: int, rng, count: int | None = None) -> list[Bag]:
    """Fresh bootstrap bags, generated exactly like the initial population."""
    n = cfg.gap_count if count is None else count
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    return [_random_bag(train_size, cfg.max_bag_size, rng) for _ in range(n)]


def elitist_carryover(population: list[Bag], k: int) -> list[Bag]:
    """Copies of the top-k bags by fitness; empty at the default k=0."""
    if k < 0 or k > len(population):
        raise ValueError(f"k must be in [0, {len(population)}]")
    if k == 0:
        return []
    return [population[i].copy() for i in _ranked(population)[:k]]


def coverage_ratio(population: list[Bag], train_size: int) -> float:
    """Fraction of training rows present in at least one bag."""
    if not population:
        raise ValueError("population is empty")
    unique = np.unique(np.concatenate([b.indices for b in population]))
    return unique.size / train_size


def _next_population(population: list[Bag], cfg: EvoConfig, train_size: int, rng) -> list[Bag]:
    """One generation step: elitism, generation gap, crossover, then mutation.

    An odd parent count is rounded down to even and the freed slot is filled
    by one extra gap bag.  Mutation picks bags uniformly without replacement
    from the new population, excluding elitist carryovers.
    """
    elites = elitist_carryover(population, cfg.elitist_count)
    n_parents = cfg.n_bags - cfg.gap_count - cfg.elitist_count
    extra_gap = n_parents % 2
    n_parents -= extra_gap

    gap = generation_gap(cfg, train_size, rng, count=cfg.gap_count + extra_gap)
    parents = select_crossover_parents(population, n_parents, rng)
    children: list[Bag] = []
    for i in range(0, n_parents, 2):
        children.extend(crossover_pair(parents[i], parents[i + 1], rng))

    new_pop = elites + gap + children
    assert len(new_pop) == cfg.n_bags

    mutable = np.arange(len(elites), cfg.n_bags)
    n_mutate = min(cfg.mutation_count, mutable.size)
    if n_mutate:
        chosen = np.sort(rng.choice(mutable, size=n_mutate, replace=False))
        for slot in chosen:
            bag = new_pop[slot]
            ms = min(cfg.mutation_size, bag.size)
            new_pop[slot] = mutate_bag(bag, train_size, ms, rng)
    return new_pop


def _generation_stats(
    iteration: int,
    population: list[Bag],
    evals: list[_Evaluation],
    train: Dataset,
    test: Dataset | None,
    cfg: EvoConfig,
    voting: str,
) -> GenerationStats:
    metric = _metric_fn(cfg.fitness_metric, train)
    train_preds = np.stack([e.train_predictions for e in evals])
    weights = [e.train_accuracy for e in evals]
    if voting == "weighted":
        agg_train = weighted_vote(train_preds, weights, train.n_classes)
    else:
        agg_train = majority_vote(train_preds, train.n_classes)
    train_metric = metric(agg_train, train.labels)

    test_metric = None
    if test is not None:
        test_preds = np.stack([predict_many(e.tree, test.features) for e in evals])
        if voting == "weighted":
            agg_test = weighted_vote(test_preds, weights, train.n_classes)
        else:
            agg_test = majority_vote(test_preds, train.n_classes)
        test_metric = metric(agg_test, test.labels)
        bias = float(np.mean(test_preds != test.labels[None, :]))
    else:
        bias = float(np.mean(train_preds != train.labels[None, :]))

    return GenerationStats(
        iteration=iteration,
        mean_fitness=float(np.mean([b.fitness for b in population])),
        mean_bag_size=float(np.mean([b.size for b in population])),
        coverage_ratio=coverage_ratio(population, train.n_samples),
        ensemble_train_metric=train_metric,
        ensemble_test_metric=test_metric,
        mean_bias=bias,
    )


def run_evobagging(
    train: Dataset,
    test: Dataset | None,
    cfg: EvoConfig,
    voting: str = "majority",
    tree_config: TreeConfig | None = None,
) -> tuple[Ensemble, list[GenerationStats]]:
    """Run the full evolutionary loop and return the final ensemble.

    The population is initialised with bootstrap bags of random size,
    evaluated, then evolved for ``cfg.max_iterations`` generations.  Stats
    are recorded after every evaluation pass, including the initial one
    (iteration 0), so ``max_iterations=0`` returns the plain bootstrap
    ensemble.  The returned ensemble holds the last generation's trees.
    """
    cfg.validate()
    if train.n_samples < 2:
        raise ValueError("training set must hold at least 2 samples")
    tree_config = tree_config or TreeConfig(tie_breaking="random")

    def evaluate_all(population, iteration):
        evals = []
        for slot, bag in enumerate(population):
            rng = np.random.default_rng([cfg.seed, iteration, slot])
            out = _evaluate(bag, train, cfg, rng, tree_config)
            bag.fitness = out.fitness
            bag.correct_mask = out.correct_mask
            evals.append(out)
        return evals

    population = init_population(train.n_samples, cfg, np.random.default_rng([cfg.seed, 0]))
    evals = evaluate_all(population, 0)
    stats = [_generation_stats(0, population, evals, train, test, cfg, voting)]

    for iteration in range(1, cfg.max_iterations + 1):
        step_rng = np.random.default_rng([cfg.seed, iteration])
        population = _next_population(population, cfg, train.n_samples, step_rng)
        evals = evaluate_all(population, iteration)
        stats.append(_generation_stats(iteration, population, evals, train, test, cfg, voting))

    members = [
        EnsembleMember(bag=b.indices.copy(), tree=e.tree, train_accuracy=e.train_accuracy)
        for b, e in zip(population, evals)
    ]
    ensemble = Ensemble(members=members, n_classes=train.n_classes, voting=voting)
    return ensemble, stats
