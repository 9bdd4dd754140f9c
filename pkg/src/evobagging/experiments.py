"""Config-driven experiment protocols.

A flat ``key = value`` config file (plus command-line overrides) selects a
dataset, one or more models, and the evolutionary hyperparameters.  Every
verb writes delimited results whose header block repeats the fully resolved
config, so runs are self-describing and re-running a verb with the same
resolved config and seed reproduces the output byte for byte.  Figures are
rendered next to the delimited output unless ``plots = false``.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from .datasets import (
    Dataset,
    bootstrap_indices,
    gen_nbit_parity,
    gen_two_spiral,
    load_builtin,
    load_csv,
    stratified_split,
    undersample_majority,
)
from .ensemble import Ensemble, ensemble_predict, fit_bagging, vote_fractions
from .evolution import TELEMETRY_COLUMNS, EvoConfig, GenerationStats, run_evobagging
from .metrics import (
    PredictionMatrix,
    accuracy,
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

logger = logging.getLogger("evobagging")

OUT_DIR_ENV = "EVOBAGGING_OUT"

BASELINE_MODES = {
    "bagging": "all_features",
    "random_forest": "random_subspace",
    "extra_trees": "random_threshold",
}
ALL_MODELS = ("bagging", "random_forest", "extra_trees", "evobagging")

DATASET_NAMES = ("csv", "parity", "two_spiral", "tictactoe", "breast_cancer", "digits", "mnist")

METRIC_KEYS = ("accuracy", "f1", "precision", "recall", "auc")

# seed-stream tags so each purpose gets an independent substream
_TAG_SPLIT = 1
_TAG_UNDERSAMPLE = 2
_TAG_VARIANCE = 3
_TAG_FOLDS = 4
_MODEL_TAGS = {"bagging": 10, "random_forest": 11, "extra_trees": 12, "evobagging": 13}


class ConfigError(ValueError):
    """An experiment config file or override is invalid."""


def _parse_bool(raw: str) -> bool:
    val = raw.strip().lower()
    if val in ("true", "1", "yes", "on"):
        return True
    if val in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_opt_int(raw: str):
    val = raw.strip()
    return None if val in ("", "none") else int(val)


def _parse_opt_float(raw: str):
    val = raw.strip()
    return None if val in ("", "none") else float(val)


def _parse_opt_str(raw: str):
    val = raw.strip()
    return None if val in ("", "none") else val


@dataclass
class ExperimentConfig:
    """Everything a verb needs, with protocol-style defaults."""

    dataset: str = "two_spiral"
    csv_path: str | None = None
    label_column: str = "-1"
    csv_header: str = "auto"
    parity_bits: int = 6
    spiral_points: int = 194
    spiral_noise: float = 0.0
    binarize_class: int | None = None
    test_fraction: float = 0.2
    model: str = "evobagging"
    n_bags: int = 40
    bag_size: int | None = None
    gap_percent: float = 20.0
    mutation_percent: float = 10.0
    mutation_size_percent: float = 5.0
    mutation_size: int | None = None
    size_bias: float = 1000.0
    iterations: int = 20
    fitness_metric: str = "accuracy"
    elitist_count: int = 0
    fitness_on_bag: bool = False
    voting: str = "majority"
    repetitions: int = 1
    seed: int = 0
    undersample_keep: float | None = None
    out_dir: str | None = None
    plots: bool = True
    imbalance_keeps: str = "1.0,0.75,0.5,0.25"
    variance_runs: int = 30
    sweep_from: int = 10
    sweep_to: int = 100
    sweep_step: int = 10
    cv_folds: int = 5
    sweep_gap_percents: str = "10,15,20,25,30"
    sweep_mutation_percents: str = "5,6,7,8,9,10"
    sweep_mutation_size_percents: str = "5,10"
    sweep_size_biases: str = ",".join(str(k) for k in range(1000, 20001, 1000))

    def validate(self) -> None:
        if self.dataset not in DATASET_NAMES:
            raise ConfigError(f"dataset must be one of {DATASET_NAMES}, got {self.dataset!r}")
        if self.dataset == "csv" and not self.csv_path:
            raise ConfigError("csv_path is required when dataset = csv")
        if self.csv_header not in ("auto", "true", "false"):
            raise ConfigError("csv_header must be auto, true, or false")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must be in [0, 1), got {self.test_fraction}")
        for name in self.models():
            if name not in ALL_MODELS:
                raise ConfigError(f"model must name any of {ALL_MODELS}, got {name!r}")
        if self.n_bags < 1:
            raise ConfigError("n_bags must be >= 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.fitness_metric not in ("accuracy", "f1"):
            raise ConfigError("fitness_metric must be accuracy or f1")
        if self.voting not in ("majority", "weighted"):
            raise ConfigError("voting must be majority or weighted")
        if self.undersample_keep is not None and not 0.0 < self.undersample_keep <= 1.0:
            raise ConfigError("undersample_keep must be in (0, 1]")
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.elitist_count < 0:
            raise ConfigError("elitist_count must be >= 0")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be >= 2")
        if self.sweep_step < 1 or self.sweep_from > self.sweep_to:
            raise ConfigError("sweep range needs sweep_from <= sweep_to and sweep_step >= 1")
        if self.variance_runs < 2:
            raise ConfigError("variance_runs must be >= 2")

    def models(self) -> list[str]:
        raw = self.model.strip().lower()
        if raw == "all":
            return list(ALL_MODELS)
        return [m.strip() for m in raw.split(",") if m.strip()]

    def resolved(self) -> dict[str, str]:
        """Every field as a string, defaults expanded, in declaration order."""
        out: dict[str, str] = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = "" if v is None else str(v)
        return out


_FIELD_PARSERS = {
    "csv_path": _parse_opt_str,
    "binarize_class": _parse_opt_int,
    "bag_size": _parse_opt_int,
    "mutation_size": _parse_opt_int,
    "undersample_keep": _parse_opt_float,
    "out_dir": _parse_opt_str,
    "plots": _parse_bool,
    "fitness_on_bag": _parse_bool,
}


def _coerce(key: str, raw: str):
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    if key not in fields:
        raise ConfigError(f"unknown config key: {key!r}")
    parser = _FIELD_PARSERS.get(key)
    if parser is None:
        kind = fields[key].type
        if kind == "int":
            parser = int
        elif kind == "float":
            parser = float
        elif kind == "bool":
            parser = _parse_bool
        else:
            parser = str
    try:
        return parser(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None


def parse_config(path: str | None = None, overrides: list[str] | None = None) -> ExperimentConfig:
    """Read a flat ``key = value`` file and apply ``key=value`` overrides.

    Blank lines and lines starting with ``#`` are skipped; overrides win
    over file values.  Raises :class:`ConfigError` naming the offending key.
    """
    values: dict[str, object] = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                lines = fh.readlines()
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        for lineno, line in enumerate(lines, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {text!r}")
            key, _, raw = text.partition("=")
            key = key.strip()
            values[key] = _coerce(key, raw.strip())
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        values[key] = _coerce(key, raw.strip())
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


def derived_seed(*parts: int) -> int:
    """A stable integer seed derived from a tuple of integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _sniff_header(path: str) -> bool:
    # header row assumed when the first row's per-column numericness differs
    # from the second row's (e.g. names above numbers); all-alike rows are data
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = []
        for row in reader:
            if row:
                rows.append(row)
            if len(rows) == 2:
                break
    if len(rows) < 2:
        return False

    def signature(row):
        sig = []
        for cell in row:
            try:
                float(cell)
                sig.append(True)
            except ValueError:
                sig.append(False)
        return sig

    return signature(rows[0]) != signature(rows[1])


def load_experiment_dataset(cfg: ExperimentConfig) -> Dataset:
    """Materialise the dataset a config names."""
    name = cfg.dataset
    if name == "csv":
        label: str | int
        try:
            label = int(cfg.label_column)
        except ValueError:
            label = cfg.label_column
        if cfg.csv_header == "auto":
            header = True if isinstance(label, str) else _sniff_header(cfg.csv_path)
        else:
            header = cfg.csv_header == "true"
        data = load_csv(cfg.csv_path, label, header=header)
    elif name == "parity":
        data = gen_nbit_parity(cfg.parity_bits)
    elif name == "two_spiral":
        data = gen_two_spiral(cfg.spiral_points, cfg.spiral_noise, seed=cfg.seed)
    else:
        data = load_builtin(name)
    if cfg.binarize_class is not None:
        if not 0 <= cfg.binarize_class < data.n_classes:
            raise ConfigError(
                f"binarize_class {cfg.binarize_class} out of range for {data.n_classes} classes"
            )
        labels = (data.labels == cfg.binarize_class).astype(np.int64)
        data = Dataset(data.features, labels, 2, data.feature_names)
    return data


def _prepare_split(base: Dataset, cfg: ExperimentConfig, rep: int) -> tuple[Dataset, Dataset | None]:
    data = base
    if cfg.undersample_keep is not None and cfg.undersample_keep < 1.0:
        data = undersample_majority(data, cfg.undersample_keep, derived_seed(cfg.seed, rep, _TAG_UNDERSAMPLE))
    if cfg.test_fraction > 0.0:
        pair = stratified_split(data, cfg.test_fraction, derived_seed(cfg.seed, rep, _TAG_SPLIT))
        return pair.train, pair.test
    return data, None


def _evo_config(cfg: ExperimentConfig, train_size: int, seed: int) -> EvoConfig:
    return EvoConfig.from_percentages(
        n_bags=cfg.n_bags,
        train_size=train_size,
        gap_percent=cfg.gap_percent,
        mutation_percent=cfg.mutation_percent,
        mutation_size_percent=cfg.mutation_size_percent,
        size_bias=cfg.size_bias,
        max_iterations=cfg.iterations,
        fitness_metric=cfg.fitness_metric,
        elitist_count=cfg.elitist_count,
        seed=seed,
        max_bag_size=cfg.bag_size,
        mutation_size=cfg.mutation_size,
        fitness_on_bag=cfg.fitness_on_bag,
    )


def _fit_model(
    name: str, train: Dataset, test: Dataset | None, cfg: ExperimentConfig, rep: int,
    n_bags: int | None = None,
) -> tuple[Ensemble, list[GenerationStats] | None]:
    seed = derived_seed(cfg.seed, rep, _MODEL_TAGS[name])
    bags = n_bags if n_bags is not None else cfg.n_bags
    if name == "evobagging":
        evo = _evo_config(dataclasses.replace(cfg, n_bags=bags), train.n_samples, seed)
        return run_evobagging(train, test, evo, voting=cfg.voting)
    ensemble = fit_bagging(
        train, bags, cfg.bag_size, BASELINE_MODES[name], seed, voting=cfg.voting
    )
    return ensemble, None


def _binary_auc(ensemble: Ensemble, data: Dataset, positive: int) -> float | None:
    binary = (data.labels == positive).astype(np.int64)
    if binary.sum() in (0, binary.size):
        return None
    scores = vote_fractions(ensemble, data)[:, positive]
    return roc_auc(scores, binary, positive_class=1)


def score_ensemble(ensemble: Ensemble, train: Dataset, test: Dataset | None) -> dict[str, float | None]:
    """Accuracy, F1, precision, recall, and AUC on each split.

    Binary datasets score against the minority class of the training labels;
    multiclass datasets report macro-averaged metrics and the mean
    one-vs-rest AUC.
    """
    n_classes = train.n_classes
    pos = minority_class(train.labels, n_classes)
    out: dict[str, float | None] = {}
    for split, data in (("train", train), ("test", test)):
        if data is None:
            for key in METRIC_KEYS:
                out[f"{split}_{key}"] = None
            continue
        preds = ensemble_predict(ensemble, data)
        out[f"{split}_accuracy"] = accuracy(preds, data.labels)
        if n_classes == 2:
            out[f"{split}_f1"] = f1(preds, data.labels, pos)
            out[f"{split}_precision"] = precision(preds, data.labels, pos)
            out[f"{split}_recall"] = recall(preds, data.labels, pos)
            out[f"{split}_auc"] = _binary_auc(ensemble, data, pos)
        else:
            out[f"{split}_f1"] = macro_f1(preds, data.labels, n_classes)
            out[f"{split}_precision"] = macro_precision(preds, data.labels, n_classes)
            out[f"{split}_recall"] = macro_recall(preds, data.labels, n_classes)
            aucs = one_vs_rest_auc(vote_fractions(ensemble, data), data.labels)
            out[f"{split}_auc"] = None if np.isnan(aucs).all() else float(np.nanmean(aucs))
    return out


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _out_dir(cfg: ExperimentConfig) -> str:
    path = cfg.out_dir or os.environ.get(OUT_DIR_ENV) or "results"
    os.makedirs(path, exist_ok=True)
    return path


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _header_lines(cfg: ExperimentConfig, verb: str) -> list[str]:
    lines = [f"# verb = {verb}"]
    lines += [f"# {key} = {val}" for key, val in cfg.resolved().items()]
    return lines


def _write_csv(path: str, cfg: ExperimentConfig, verb: str, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in _header_lines(cfg, verb):
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _summarise(values: list[float | None]) -> dict[str, float | int | None]:
    present = [v for v in values if v is not None]
    if not present:
        return {"mean": None, "std": None, "n": 0}
    arr = np.asarray(present, dtype=np.float64)
    return {"mean": float(arr.mean()), "std": float(arr.std()), "n": len(present)}


def _write_telemetry(path: str, cfg: ExperimentConfig, stats: list[GenerationStats]) -> None:
    _write_csv(path, cfg, "run", TELEMETRY_COLUMNS, [s.as_row() for s in stats])


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    """In-memory view of one verb's outputs."""

    payload: dict
    files: dict[str, str]
    metrics: dict[str, list[dict[str, float | None]]]
    telemetry: dict[int, list[GenerationStats]]


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Repeated train/test runs of the configured models on one dataset.

    Writes ``runs.csv`` (one row per model and repetition), ``summary.json``
    with per-model means and standard deviations, per-repetition generation
    telemetry for the evolutionary model, and figures.
    """
    cfg.validate()
    base = load_experiment_dataset(cfg)
    out = _out_dir(cfg)
    models = cfg.models()

    metrics: dict[str, list[dict[str, float | None]]] = {m: [] for m in models}
    telemetry: dict[int, list[GenerationStats]] = {}
    rep_zero_curves: dict[str, tuple] = {}

    for rep in range(cfg.repetitions):
        train, test = _prepare_split(base, cfg, rep)
        for name in models:
            ensemble, stats = _fit_model(name, train, test, cfg, rep)
            metrics[name].append(score_ensemble(ensemble, train, test))
            if stats is not None:
                telemetry[rep] = stats
            if rep == 0 and test is not None and base.n_classes == 2:
                pos = minority_class(train.labels, 2)
                binary = (test.labels == pos).astype(np.int64)
                if 0 < binary.sum() < binary.size:
                    scores = vote_fractions(ensemble, test)[:, pos]
                    fpr, tpr = roc_curve(scores, binary, positive_class=1)
                    rep_zero_curves[name] = (fpr, tpr, roc_auc(scores, binary, 1))
        logger.info("run: repetition %d/%d done", rep + 1, cfg.repetitions)

    columns = ["model", "repetition"] + [
        f"{split}_{key}" for key in METRIC_KEYS for split in ("train", "test")
    ]
    rows = []
    for name in models:
        for rep, scored in enumerate(metrics[name]):
            rows.append([name, rep] + [scored[c] for c in columns[2:]])
    files = {"runs": os.path.join(out, "runs.csv")}
    _write_csv(files["runs"], cfg, "run", columns, rows)

    summary = {
        "verb": "run",
        "config": cfg.resolved(),
        "models": {
            name: {
                key: _summarise([scored[key] for scored in metrics[name]])
                for key in columns[2:]
            }
            for name in models
        },
    }
    for rep, stats in sorted(telemetry.items()):
        path = os.path.join(out, f"generations_rep{rep:02d}.csv")
        files[f"generations_rep{rep:02d}"] = path
        _write_telemetry(path, cfg, stats)

    files["summary"] = os.path.join(out, "summary.json")
    _write_json(files["summary"], summary)

    if cfg.plots:
        from . import plots

        if telemetry:
            files["fitness_figure"] = os.path.join(out, "fitness_curve.png")
            plots.fitness_curves(telemetry, files["fitness_figure"])
            files["metric_figure"] = os.path.join(out, "metric_curve.png")
            plots.metric_curves(telemetry, files["metric_figure"])
        if rep_zero_curves:
            files["roc_figure"] = os.path.join(out, "roc.png")
            plots.roc_figure(rep_zero_curves, files["roc_figure"])

    return RunResult(payload=summary, files=files, metrics=metrics, telemetry=telemetry)


def sweep_bag_count(
    cfg: ExperimentConfig,
    start: int | None = None,
    stop: int | None = None,
    step: int | None = None,
) -> RunResult:
    """Re-run every model across a range of bag counts.

    Emits one row per (model, bag count) with the mean/std of the train and
    test accuracy over the repetitions, and reports the count that maximises
    the test accuracy per model (ties to the smallest count); without a test
    split the train accuracy decides.
    """
    cfg.validate()
    start = cfg.sweep_from if start is None else start
    stop = cfg.sweep_to if stop is None else stop
    step = cfg.sweep_step if step is None else step
    if step < 1 or start > stop:
        raise ConfigError("sweep range needs start <= stop and step >= 1")
    counts = list(range(start, stop + 1, step))
    base = load_experiment_dataset(cfg)
    out = _out_dir(cfg)
    models = cfg.models()

    splits = [_prepare_split(base, cfg, rep) for rep in range(cfg.repetitions)]
    rows = []
    table: dict[str, dict[int, dict[str, float | None]]] = {m: {} for m in models}
    for count in counts:
        for name in models:
            train_vals, test_vals = [], []
            for rep, (train, test) in enumerate(splits):
                ensemble, _ = _fit_model(name, train, test, cfg, rep, n_bags=count)
                scored = score_ensemble(ensemble, train, test)
                train_vals.append(scored["train_accuracy"])
                test_vals.append(scored["test_accuracy"])
            entry = {
                "train_mean": _summarise(train_vals)["mean"],
                "train_std": _summarise(train_vals)["std"],
                "test_mean": _summarise(test_vals)["mean"],
                "test_std": _summarise(test_vals)["std"],
            }
            table[name][count] = entry
            rows.append([name, count, entry["train_mean"], entry["train_std"],
                         entry["test_mean"], entry["test_std"]])
        logger.info("sweep-bags: %d bags done", count)

    best = {}
    for name in models:
        def key(count):
            entry = table[name][count]
            target = entry["test_mean"] if entry["test_mean"] is not None else entry["train_mean"]
            return (-target, count)
        best[name] = min(counts, key=key)

    files = {"sweep": os.path.join(out, "sweep_bags.csv")}
    _write_csv(
        files["sweep"], cfg, "sweep-bags",
        ["model", "n_bags", "train_mean", "train_std", "test_mean", "test_std"], rows,
    )
    payload = {"verb": "sweep-bags", "config": cfg.resolved(), "counts": counts,
               "results": table, "best": best}
    files["summary"] = os.path.join(out, "sweep_bags.json")
    _write_json(files["summary"], payload)
    if cfg.plots:
        from . import plots

        files["figure"] = os.path.join(out, "sweep_bags.png")
        plots.bag_sweep(table, files["figure"])
    return RunResult(payload=payload, files=files, metrics={}, telemetry={})


def variance_protocol(
    cfg: ExperimentConfig, runs: int | None = None, run_seeds: list[int] | None = None
) -> RunResult:
    """Across-training-set diversity of repeatedly fitted ensembles.

    One stratified test set is fixed; each run bootstraps a fresh training
    set of the same size from the training partition, fits every model, and
    collects its test predictions.  The six diversity measures are then
    computed across runs, treating each fitted ensemble as a single learner.
    """
    cfg.validate()
    n_runs = cfg.variance_runs if runs is None else runs
    if n_runs < 2:
        raise ConfigError("variance protocol needs at least 2 runs")
    if run_seeds is not None and len(run_seeds) != n_runs:
        raise ConfigError("run_seeds must provide one seed per run")
    if cfg.test_fraction <= 0.0:
        raise ConfigError("variance protocol needs a test split")

    base = load_experiment_dataset(cfg)
    out = _out_dir(cfg)
    models = cfg.models()
    train, test = _prepare_split(base, cfg, 0)

    predictions: dict[str, list[np.ndarray]] = {m: [] for m in models}
    for i in range(n_runs):
        seed_i = run_seeds[i] if run_seeds is not None else derived_seed(cfg.seed, _TAG_VARIANCE, i)
        boot = bootstrap_indices(train.n_samples, train.n_samples, np.random.default_rng(seed_i))
        boot_train = train.subset(boot)
        for name in models:
            run_cfg = dataclasses.replace(cfg, seed=seed_i)
            ensemble, _ = _fit_model(name, boot_train, None, run_cfg, 0)
            predictions[name].append(ensemble_predict(ensemble, test))
        logger.info("variance: run %d/%d done", i + 1, n_runs)

    reports = {}
    rows = []
    for name in models:
        matrix = PredictionMatrix(np.stack(predictions[name]), test.labels, base.n_classes)
        report = diversity_measures(matrix)
        reports[name] = report.to_dict()
        for measure, value in report.to_dict().items():
            rows.append([name, measure, value])

    files = {"variance": os.path.join(out, "variance.csv")}
    _write_csv(files["variance"], cfg, "variance", ["model", "measure", "value"], rows)
    payload = {"verb": "variance", "config": cfg.resolved(), "runs": n_runs, "reports": reports}
    files["summary"] = os.path.join(out, "variance.json")
    _write_json(files["summary"], payload)
    if cfg.plots:
        from . import plots

        files["figure"] = os.path.join(out, "variance.png")
        plots.diversity_bars(reports, files["figure"])
    return RunResult(payload=payload, files=files, metrics={}, telemetry={})


def imbalance_study(cfg: ExperimentConfig, keep_fractions: list[float] | None = None) -> RunResult:
    """Model comparison across majority-class undersampling levels.

    For every keep fraction the majority class is undersampled before the
    split, every configured model is run for the configured repetitions with
    F1-based fitness for the evolutionary model, and F1/precision/recall/AUC
    are reported for train and test.
    """
    cfg.validate()
    base = load_experiment_dataset(cfg)
    if base.n_classes != 2:
        raise ConfigError("the imbalance study needs a binary dataset")
    if keep_fractions is None:
        keep_fractions = [float(v) for v in cfg.imbalance_keeps.split(",") if v.strip()]
    for frac in keep_fractions:
        if not 0.0 < frac <= 1.0:
            raise ConfigError(f"keep fraction must be in (0, 1], got {frac}")

    out = _out_dir(cfg)
    models = cfg.models()
    counts = base.class_counts()
    majority = int(np.argmax(counts)) if counts[0] != counts[1] else 1
    minority_count = int(counts[1 - majority])

    rows = []
    results: dict[str, dict[str, dict]] = {}
    report_keys = [f"{split}_{key}" for key in ("f1", "precision", "recall", "auc", "accuracy")
                   for split in ("train", "test")]
    for frac in keep_fractions:
        kept_majority = math.ceil(frac * counts[majority])
        ratio = kept_majority / minority_count
        sub = dataclasses.replace(cfg, undersample_keep=frac, fitness_metric="f1")
        per_model: dict[str, list[dict]] = {m: [] for m in models}
        for rep in range(cfg.repetitions):
            train, test = _prepare_split(base, sub, rep)
            for name in models:
                ensemble, _ = _fit_model(name, train, test, sub, rep)
                per_model[name].append(score_ensemble(ensemble, train, test))
        for name in models:
            summary = {key: _summarise([s[key] for s in per_model[name]]) for key in report_keys}
            results.setdefault(name, {})[str(frac)] = {"imbalance_ratio": ratio, **summary}
            rows.append(
                [name, frac, round(ratio, 4)]
                + [summary[key]["mean"] for key in report_keys]
            )
        logger.info("imbalance: keep fraction %s done", frac)

    files = {"imbalance": os.path.join(out, "imbalance.csv")}
    _write_csv(
        files["imbalance"], cfg, "imbalance",
        ["model", "keep_fraction", "imbalance_ratio"] + [f"{k}_mean" for k in report_keys],
        rows,
    )
    payload = {"verb": "imbalance", "config": cfg.resolved(),
               "keep_fractions": keep_fractions, "results": results}
    files["summary"] = os.path.join(out, "imbalance.json")
    _write_json(files["summary"], payload)
    if cfg.plots:
        from . import plots

        files["figure"] = os.path.join(out, "imbalance.png")
        plots.imbalance_lines(results, keep_fractions, files["figure"])
    return RunResult(payload=payload, files=files, metrics={}, telemetry={})


def _stratified_folds(labels: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for c in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == c))
        for pos, idx in enumerate(members):
            folds[pos % k].append(int(idx))
    return [np.sort(np.asarray(f, dtype=np.int64)) for f in folds]


def sweep_hyper(cfg: ExperimentConfig) -> RunResult:
    """Grid search of the evolutionary hyperparameters by cross-validation.

    Grid axes come from the ``sweep_*`` config keys (gap percent, mutation
    percent, mutation size percent, size bias; defaults are the full
    protocol ranges).  Each candidate is scored by mean accuracy over
    stratified folds of the training partition; the argmax wins, ties going
    to the earliest candidate in grid order.
    """
    cfg.validate()
    gaps = [float(v) for v in cfg.sweep_gap_percents.split(",") if v.strip()]
    muts = [float(v) for v in cfg.sweep_mutation_percents.split(",") if v.strip()]
    sizes = [float(v) for v in cfg.sweep_mutation_size_percents.split(",") if v.strip()]
    biases = [float(v) for v in cfg.sweep_size_biases.split(",") if v.strip()]
    base = load_experiment_dataset(cfg)
    out = _out_dir(cfg)

    if cfg.test_fraction > 0.0:
        train, _ = _prepare_split(base, cfg, 0)
    else:
        train = base
    folds = _stratified_folds(train.labels, cfg.cv_folds, derived_seed(cfg.seed, _TAG_FOLDS))
    all_rows = np.arange(train.n_samples)

    rows = []
    best = None
    for g in gaps:
        for m in muts:
            for ms in sizes:
                for k in biases:
                    fold_scores = []
                    for fold_idx, val_rows in enumerate(folds):
                        fit_rows = np.setdiff1d(all_rows, val_rows)
                        fold_train = train.subset(fit_rows)
                        fold_val = train.subset(val_rows)
                        sub = dataclasses.replace(
                            cfg, gap_percent=g, mutation_percent=m,
                            mutation_size_percent=ms, size_bias=k,
                            seed=derived_seed(cfg.seed, _TAG_FOLDS, fold_idx),
                        )
                        ensemble, _ = _fit_model("evobagging", fold_train, None, sub, 0)
                        fold_scores.append(
                            accuracy(ensemble_predict(ensemble, fold_val), fold_val.labels)
                        )
                    mean_acc = float(np.mean(fold_scores))
                    rows.append([g, m, ms, k, mean_acc, float(np.std(fold_scores))])
                    if best is None or mean_acc > best[4]:
                        best = (g, m, ms, k, mean_acc)
                    logger.info(
                        "sweep-hyper: gap=%s mutation=%s size=%s bias=%s cv=%.4f",
                        g, m, ms, k, mean_acc,
                    )

    files = {"sweep": os.path.join(out, "sweep_hyper.csv")}
    _write_csv(
        files["sweep"], cfg, "sweep-hyper",
        ["gap_percent", "mutation_percent", "mutation_size_percent", "size_bias",
         "cv_accuracy_mean", "cv_accuracy_std"],
        rows,
    )
    payload = {
        "verb": "sweep-hyper",
        "config": cfg.resolved(),
        "best": {
            "gap_percent": best[0], "mutation_percent": best[1],
            "mutation_size_percent": best[2], "size_bias": best[3],
            "cv_accuracy": best[4],
        },
        "candidates": len(rows),
    }
    files["summary"] = os.path.join(out, "sweep_hyper.json")
    _write_json(files["summary"], payload)
    if cfg.plots:
        from . import plots

        files["figure"] = os.path.join(out, "sweep_hyper.png")
        plots.hyper_scores([r[4] for r in rows], files["figure"])
    return RunResult(payload=payload, files=files, metrics={}, telemetry={})
