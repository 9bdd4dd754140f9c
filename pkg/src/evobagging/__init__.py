"""Evolutionary bagging: tree ensembles whose bag contents are evolved.

Bootstrap bags are treated as an evolutionary population.  Each generation
keeps the strongest bags (fitness mixes the learner's classification
quality with a bag-size bonus), refreshes a slice of the population with
new bootstrap bags, recombines the rest by exchanging misclassified
samples, and mutates a few bags with samples from outside them.  The
baselines (bagging, random forest, extra-trees), metrics, diversity
measures, and an experiment CLI live alongside the core loop.
"""

from .datasets import (
    Dataset,
    DatasetError,
    SplitPair,
    bootstrap_indices,
    gen_nbit_parity,
    gen_tictactoe_endgames,
    gen_two_spiral,
    load_builtin,
    load_csv,
    stratified_split,
    undersample_majority,
)
from .ensemble import (
    Ensemble,
    EnsembleMember,
    ensemble_predict,
    fit_bagging,
    majority_vote,
    member_predictions,
    vote_fractions,
    weighted_vote,
)
from .evolution import (
    Bag,
    EvoConfig,
    GenerationStats,
    bag_fitness,
    coverage_ratio,
    crossover_pair,
    elitist_carryover,
    evaluate_bag,
    generation_gap,
    init_population,
    mutate_bag,
    run_evobagging,
    select_crossover_parents,
)
from .metrics import (
    DiversityReport,
    PredictionMatrix,
    accuracy,
    average_ensemble_bias,
    bias_indicator,
    diversity_measures,
    f1,
    macro_f1,
    macro_precision,
    macro_recall,
    minority_class,
    one_vs_rest_auc,
    precision,
    recall,
    roc_auc,
    roc_curve,
)
from .tree import (
    TreeConfig,
    TreeNode,
    fit_tree,
    gini_impurity,
    predict_many,
    predict_tree,
    tree_depth,
    tree_to_text,
)

__version__ = "0.1.0"

__all__ = [
    "Bag",
    "Dataset",
    "DatasetError",
    "DiversityReport",
    "Ensemble",
    "EnsembleMember",
    "EvoConfig",
    "GenerationStats",
    "PredictionMatrix",
    "SplitPair",
    "TreeConfig",
    "TreeNode",
    "accuracy",
    "average_ensemble_bias",
    "bag_fitness",
    "bias_indicator",
    "bootstrap_indices",
    "coverage_ratio",
    "crossover_pair",
    "diversity_measures",
    "elitist_carryover",
    "ensemble_predict",
    "evaluate_bag",
    "f1",
    "fit_bagging",
    "fit_tree",
    "gen_nbit_parity",
    "gen_tictactoe_endgames",
    "gen_two_spiral",
    "generation_gap",
    "gini_impurity",
    "init_population",
    "load_builtin",
    "load_csv",
    "macro_f1",
    "macro_precision",
    "macro_recall",
    "majority_vote",
    "member_predictions",
    "minority_class",
    "mutate_bag",
    "one_vs_rest_auc",
    "precision",
    "predict_many",
    "predict_tree",
    "recall",
    "roc_auc",
    "roc_curve",
    "run_evobagging",
    "select_crossover_parents",
    "stratified_split",
    "tree_depth",
    "tree_to_text",
    "undersample_majority",
    "vote_fractions",
    "weighted_vote",
]
