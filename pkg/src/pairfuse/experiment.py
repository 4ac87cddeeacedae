"""Experiment harness: train every requested fusion method, compare accuracies.

One `run_experiment` call is a single seeded comparison on a fixed
train/test pair. `run_bench` layers R independent repeats on top (fresh data,
sketches and initialization per repeat) and aggregates mean and spread, the
synthetic stand-in for cross-validation splits.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .classifier import (
    ClassifierParams,
    TrainConfig,
    TrainResult,
    fit_softmax,
    fused_features,
    sgd_train,
    _softmax_rows,
)
from .fusion import FUSION_KINDS, FULL_BILINEAR_MAX_DIM, make_method
from .synthetic import SynthConfig, generate_synthetic
from .types import Dataset, check_seed

LATE_AVG = "avg-late"
METHOD_TOKENS = FUSION_KINDS + (LATE_AVG,)
DEFAULT_SKETCH_DIM = 64


@dataclass(frozen=True, eq=False)
class MethodResult:
    """Test-set outcome of one trained method."""

    method: str
    accuracy: float
    per_class_accuracy: np.ndarray
    confusion: np.ndarray
    loss_traces: tuple[np.ndarray, ...]


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Per-method results of one seeded run, plus the configuration echo."""

    results: dict[str, MethodResult]
    num_classes: int
    feature_dim: int
    sketch_dim: int
    train_config: TrainConfig
    seed: int


def _confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray, num_classes: int) -> np.ndarray:
    confusion = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    return confusion


def _summarize(y_true: np.ndarray, y_pred: np.ndarray, num_classes: int):
    confusion = _confusion_matrix(y_true, y_pred, num_classes)
    totals = confusion.sum(axis=1)
    per_class = np.divide(
        np.diag(confusion).astype(np.float64),
        totals,
        out=np.zeros(num_classes),
        where=totals > 0,
    )
    accuracy = float(np.trace(confusion)) / float(len(y_true))
    return accuracy, per_class, confusion


def _predict_rows(params: ClassifierParams, features: np.ndarray) -> np.ndarray:
    # ties broken toward the lowest class index, as argmax does
    return np.argmax(features @ params.W + params.b, axis=1)


def validate_methods(methods: list[str], feature_dim: int) -> list[str]:
    for token in methods:
        if token not in METHOD_TOKENS:
            raise ValueError(f"unknown method {token!r}; expected one of {METHOD_TOKENS}")
    if "full" in methods and feature_dim > FULL_BILINEAR_MAX_DIM:
        raise ValueError(
            f"full bilinear requires feature dim <= {FULL_BILINEAR_MAX_DIM}, got {feature_dim}"
        )
    if len(set(methods)) != len(methods):
        raise ValueError("duplicate method tokens")
    return list(methods)


def run_experiment(
    train: Dataset,
    test: Dataset,
    methods: list[str],
    sketch_dim: int,
    cfg: TrainConfig,
    seed: int,
) -> ExperimentReport:
    """Train and evaluate each method under identical seeds.

    Every method derives its own random streams (sketch hashes, weight init,
    shuffling) from the given seed by purpose tag, so results are independent
    of the order methods are listed in.
    """
    methods = validate_methods(methods, train.dim)
    seed = check_seed(seed)
    if train.num_classes != test.num_classes or train.dim != test.dim:
        raise ValueError("train and test datasets disagree on dims or classes")
    y_test = test.labels()

    results: dict[str, MethodResult] = {}
    for token in methods:
        if token == LATE_AVG:
            result = _run_late_avg(train, test, y_test, cfg, seed)
        else:
            method = make_method(token, train.dim, sketch_dim, seed)
            trained = sgd_train(train, method, cfg, init_seed=seed)
            preds = _predict_rows(trained.params, fused_features(method, test))
            accuracy, per_class, confusion = _summarize(y_test, preds, test.num_classes)
            result = MethodResult(
                method=token,
                accuracy=accuracy,
                per_class_accuracy=per_class,
                confusion=confusion,
                loss_traces=(trained.epoch_losses,),
            )
        results[token] = result
    return ExperimentReport(
        results=results,
        num_classes=train.num_classes,
        feature_dim=train.dim,
        sketch_dim=sketch_dim,
        train_config=cfg,
        seed=seed,
    )


def _run_late_avg(
    train: Dataset, test: Dataset, y_test: np.ndarray, cfg: TrainConfig, seed: int
) -> MethodResult:
    a_train, b_train = train.view_matrices()
    a_test, b_test = test.view_matrices()
    y_train = train.labels()
    head_a = fit_softmax(a_train, y_train, train.num_classes, cfg, init_seed=seed)
    head_b = fit_softmax(b_train, y_train, train.num_classes, cfg, init_seed=seed)
    proba = 0.5 * (
        _softmax_rows(a_test @ head_a.params.W + head_a.params.b)
        + _softmax_rows(b_test @ head_b.params.W + head_b.params.b)
    )
    preds = np.argmax(proba, axis=1)
    accuracy, per_class, confusion = _summarize(y_test, preds, test.num_classes)
    return MethodResult(
        method=LATE_AVG,
        accuracy=accuracy,
        per_class_accuracy=per_class,
        confusion=confusion,
        loss_traces=(head_a.epoch_losses, head_b.epoch_losses),
    )


@dataclass(frozen=True, eq=False)
class BenchSummary:
    """Mean/spread over independent repeats of the same experiment."""

    methods: list[str]
    mean_accuracy: dict[str, float]
    std_accuracy: dict[str, float]
    mean_per_class: dict[str, np.ndarray]
    mean_confusion: dict[str, np.ndarray]
    reports: list[ExperimentReport]
    synth_config: SynthConfig
    sketch_dim: int
    repeats: int


def repeat_seeds(root_seed: int, repeats: int) -> list[int]:
    """Derive well-separated per-repeat seeds from one root seed."""
    state = np.random.SeedSequence(check_seed(root_seed)).generate_state(repeats, dtype=np.uint64)
    return [int(v) for v in state]


def run_bench(
    synth: SynthConfig,
    methods: list[str],
    sketch_dim: int,
    cfg: TrainConfig,
    root_seed: int,
    repeats: int = 5,
) -> BenchSummary:
    """Repeat the synthetic comparison with independent seeds and aggregate.

    Each repeat regenerates data, sketch parameters, initialization and
    shuffling from its own derived seed.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be positive, got {repeats}")
    methods = validate_methods(methods, synth.dim)
    reports = []
    for seed in repeat_seeds(root_seed, repeats):
        train, test = generate_synthetic(replace(synth, seed=seed))
        run_cfg = replace(cfg, shuffle_seed=seed)
        reports.append(run_experiment(train, test, methods, sketch_dim, run_cfg, seed))

    accs = {m: np.array([r.results[m].accuracy for r in reports]) for m in methods}
    return BenchSummary(
        methods=methods,
        mean_accuracy={m: float(accs[m].mean()) for m in methods},
        std_accuracy={m: float(accs[m].std()) for m in methods},
        mean_per_class={
            m: np.mean([r.results[m].per_class_accuracy for r in reports], axis=0)
            for m in methods
        },
        mean_confusion={
            m: np.mean([r.results[m].confusion for r in reports], axis=0) for m in methods
        },
        reports=reports,
        synth_config=synth,
        sketch_dim=sketch_dim,
        repeats=repeats,
    )
