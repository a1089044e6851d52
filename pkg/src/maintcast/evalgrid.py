"""Sliding-window forecasting grid with a hard leakage guard.

Shifts anchor on the end of the aggregated series: with S shifts the last S
blocks are the test months, shared by every cell, so shift s of every
(window, horizon) combination predicts the same calendar block. Each cell
trains on the fixed-length span of window+horizon blocks immediately before
its test block (one sample per repository), mirroring monthly retraining.
Tree and ridge models retrain from scratch per shift; the recurrent model
warm-starts across consecutive shifts of one (task, window, horizon) chain.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptySampleSet,
    InvariantError,
    LeakageError,
    LengthMismatch,
    UnknownLabel,
    UsageError,
)
from .features import SampleSet, make_windowed_samples
from .labels import derive_seed, discretize, label_space
from .models import ModelConfig, incremental_update, modal_label, predict, train
from .targets import MonthlyPoint, Representation, bucketize_value, target_arrays

logger = logging.getLogger(__name__)

TASK_ORDER = (Representation.RAW, Representation.BUCKET, Representation.SLOPE, Representation.TREND)
MODEL_ORDER = ("majority", "varma", "forest", "lstm")


@dataclass
class GridSpec:
    tasks: tuple = TASK_ORDER
    models: tuple = ("varma", "forest", "lstm")
    windows: tuple = tuple(range(3, 13))
    horizons: tuple = tuple(range(1, 7))
    shifts: int = 12
    seed: int = 0
    epsilon: float = 0.5
    slope_step: float = 1.0
    forest_aggregate: str = "mean"

    def __post_init__(self):
        problems = self.validate()
        if problems:
            raise UsageError("; ".join(problems))

    def validate(self) -> list[str]:
        problems = []
        for w in self.windows:
            if not 3 <= w <= 12:
                problems.append(f"window {w} outside 3..12")
        for h in self.horizons:
            if not 1 <= h <= 6:
                problems.append(f"horizon {h} outside 1..6")
        if self.shifts < 1:
            problems.append("shifts must be >= 1")
        for t in self.tasks:
            if not isinstance(t, Representation):
                problems.append(f"unknown task {t!r}")
        for m in self.models:
            if m not in MODEL_ORDER:
                problems.append(f"unknown model {m!r}")
        if self.epsilon < 0:
            problems.append("epsilon must be >= 0")
        if self.slope_step <= 0:
            problems.append("slope step must be > 0")
        return problems


@dataclass
class EvaluationRecord:
    task: str
    model: str
    window: int
    horizon: int
    shift: int
    n_test: int
    accuracy: float
    mae: float
    r2: float
    macro_f1: float
    seed: int
    confusion: np.ndarray
    labels: np.ndarray

    def sort_key(self):
        return (self.task, self.model, self.window, self.horizon, self.shift)


@dataclass
class CellPredictions:
    """Optional per-sample capture for subpopulation analysis."""

    record: EvaluationRecord
    repo_ids: list[str]
    pred_labels: np.ndarray
    true_labels: np.ndarray


@dataclass
class GridRunResult:
    records: list[EvaluationRecord]
    skipped: list[tuple]
    predictions: list[CellPredictions] = field(default_factory=list)


@dataclass
class AggregateSummary:
    task: str
    model: str
    mean: float
    median: float
    q1: float
    q3: float
    iqr: float
    min: float
    max: float
    n_cells: int


def accuracy(pred_labels, true_labels) -> float:
    pred = np.asarray(pred_labels)
    true = np.asarray(true_labels)
    if pred.shape[0] != true.shape[0]:
        raise LengthMismatch(pred.shape[0], true.shape[0])
    if pred.shape[0] == 0:
        raise LengthMismatch(0, 0)
    return float(np.mean(pred == true))


def confusion_matrix(pred_labels, true_labels, labels: np.ndarray) -> np.ndarray:
    """Counts with entry (i, j) = (true label i, predicted label j)."""
    index = {float(lab): k for k, lab in enumerate(labels)}
    if not index:
        raise UnknownLabel(None if len(pred_labels) == 0 else pred_labels[0])
    out = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for p, t in zip(pred_labels, true_labels):
        try:
            out[index[float(t)], index[float(p)]] += 1
        except KeyError as exc:
            raise UnknownLabel(exc.args[0]) from None
    return out


def row_normalized(confusion: np.ndarray) -> np.ndarray:
    sums = confusion.sum(axis=1, keepdims=True)
    return np.divide(confusion, np.where(sums == 0, 1, sums), dtype=np.float64)


def macro_f1(confusion: np.ndarray) -> float:
    """Mean per-class F1 over the full label space; empty classes score 0."""
    tp = np.diag(confusion).astype(np.float64)
    fp = confusion.sum(axis=0) - tp
    fn = confusion.sum(axis=1) - tp
    denom = 2 * tp + fp + fn
    f1 = np.divide(2 * tp, np.where(denom == 0, 1, denom))
    return float(f1.mean())


def r_squared(pred: np.ndarray, true: np.ndarray) -> float:
    ss_res = float(np.sum((true - pred) ** 2))
    ss_tot = float(np.sum((true - true.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res <= 1e-12 else 0.0
    return 1.0 - ss_res / ss_tot


def leakage_check(samples: SampleSet, test_block: int) -> bool:
    """True iff every input block and every training target precede the test block."""
    if samples.n == 0:
        return True
    return bool(
        np.all(samples.input_end_blocks < test_block)
        and np.all(samples.target_blocks < test_block)
    )


def discretized(task: Representation, values, slope_step: float = 1.0) -> np.ndarray:
    return discretize(task, values, slope_step)


def _bucket_codes_from_raw_labels(labels: np.ndarray) -> np.ndarray:
    return np.array([int(bucketize_value(int(v))) for v in labels], dtype=np.int64)


def _make_record(task: Representation, model: str, window: int, horizon: int, shift: int,
                 seed: int, raw_pred: np.ndarray, test: SampleSet, slope_step: float) -> EvaluationRecord:
    labels = label_space(task, slope_step)
    pred_labels = discretize(task, raw_pred, slope_step)
    true_labels = discretize(task, test.targets, slope_step)
    conf = confusion_matrix(pred_labels, true_labels, labels)
    acc = accuracy(pred_labels, true_labels)
    if task is Representation.RAW:
        # Coarsening law: bucketing the same predictions can never lose exact matches.
        bucket_acc = accuracy(_bucket_codes_from_raw_labels(pred_labels),
                              _bucket_codes_from_raw_labels(true_labels))
        if bucket_acc < acc - 1e-12:
            raise InvariantError("bucketized accuracy fell below raw accuracy")
    rec = EvaluationRecord(
        task=task.value, model=model, window=window, horizon=horizon, shift=shift,
        n_test=test.n, accuracy=acc,
        mae=float(np.mean(np.abs(raw_pred - test.targets))),
        r2=r_squared(raw_pred, test.targets),
        macro_f1=macro_f1(conf),
        seed=seed, confusion=conf, labels=labels,
    )
    if int(np.trace(conf)) != round(acc * test.n):
        raise InvariantError("confusion trace inconsistent with accuracy")
    return rec


def majority_baseline_cell(task: Representation, train_targets, test_targets,
                           slope_step: float = 1.0) -> tuple[float, float, np.ndarray]:
    """Constant modal predictor scored on the test targets.

    Returns (modal label, accuracy, confusion matrix); exposed separately so
    the baseline can be checked against frequency-count oracles.
    """
    label = modal_label(task, np.asarray(train_targets, dtype=np.float64), slope_step)
    true_labels = discretize(task, np.asarray(test_targets, dtype=np.float64), slope_step)
    pred_labels = np.full(true_labels.shape, label)
    labels = label_space(task, slope_step)
    conf = confusion_matrix(pred_labels, true_labels, labels)
    return label, accuracy(pred_labels, true_labels), conf


def _model_config(spec: GridSpec, model: str, task: Representation, seed: int) -> ModelConfig:
    return ModelConfig(
        kind=model, seed=seed, task=task, slope_step=spec.slope_step,
        aggregate=spec.forest_aggregate,
    )


def _run_chain(spec: GridSpec, task: Representation, model: str, window: int, horizon: int,
               monthly: dict, targets_by_repo: dict, n_blocks: int,
               capture: bool) -> tuple[list[EvaluationRecord], list[tuple], list[CellPredictions]]:
    records: list[EvaluationRecord] = []
    skipped: list[tuple] = []
    captured: list[CellPredictions] = []
    lstm_state = None
    for shift in range(spec.shifts):
        cell = (task.value, model, window, horizon, shift)
        test_block = n_blocks - spec.shifts + shift
        lo = test_block - window - horizon
        if test_block - horizon - window + 1 < 0 or lo < 0:
            skipped.append(cell + ("insufficient history",))
            continue
        try:
            train_samples = make_windowed_samples(
                monthly, targets_by_repo, task, window, horizon, (lo, test_block))
            test_samples = make_windowed_samples(
                monthly, targets_by_repo, task, window, horizon,
                (test_block - horizon - window + 1, test_block + 1))
        except EmptySampleSet:
            skipped.append(cell + ("insufficient history",))
            continue
        if not leakage_check(train_samples, test_block):
            raise LeakageError(f"training sample at or past test block in cell {cell}")
        if np.any(test_samples.input_end_blocks >= test_block):
            raise LeakageError(f"test inputs reach the test block in cell {cell}")

        seed = derive_seed(spec.seed, task.value, model, window, horizon, shift)
        config = _model_config(spec, model, task, seed)
        if model == "lstm":
            if lstm_state is None:
                lstm_state = train(config, train_samples)
            else:
                lstm_state = incremental_update(lstm_state, train_samples)
            raw_pred = predict(lstm_state, test_samples)
        else:
            trained = train(config, train_samples)
            raw_pred = predict(trained, test_samples)
        record = _make_record(task, model, window, horizon, shift, seed,
                              raw_pred, test_samples, spec.slope_step)
        records.append(record)
        if capture:
            captured.append(CellPredictions(
                record=record,
                repo_ids=[origin[0] for origin in test_samples.origins],
                pred_labels=discretize(task, raw_pred, spec.slope_step),
                true_labels=discretize(task, test_samples.targets, spec.slope_step),
            ))
    return records, skipped, captured


def run_grid(spec: GridSpec, monthly: dict[str, list[MonthlyPoint]], jobs: int = 1,
             capture_predictions: bool = False) -> GridRunResult:
    """Execute every (task, model, window, horizon, shift) cell.

    The majority baseline runs for every cell whether or not it is listed in
    ``spec.models``. Cells without enough history are skipped and reported.
    Output ordering and values are independent of ``jobs``.
    """
    if not monthly:
        raise EmptySampleSet("empty corpus")
    chains = []
    for task in TASK_ORDER:
        if task not in spec.tasks:
            continue
        targets_by_repo = target_arrays(monthly, task, spec.epsilon)
        n_blocks = max(len(v) for v in targets_by_repo.values())
        model_set = [m for m in MODEL_ORDER if m == "majority" or m in spec.models]
        for model in model_set:
            for window in sorted(spec.windows):
                for horizon in sorted(spec.horizons):
                    chains.append((task, model, window, horizon, targets_by_repo, n_blocks))

    def execute(chain):
        task, model, window, horizon, targets_by_repo, n_blocks = chain
        return _run_chain(spec, task, model, window, horizon, monthly,
                          targets_by_repo, n_blocks, capture_predictions)

    results = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(execute, chains))
    else:
        results = [execute(c) for c in chains]

    records: list[EvaluationRecord] = []
    skipped: list[tuple] = []
    predictions: list[CellPredictions] = []
    for recs, skips, caps in results:
        records.extend(recs)
        skipped.extend(skips)
        predictions.extend(caps)
    records.sort(key=lambda r: r.sort_key())
    skipped.sort()
    predictions.sort(key=lambda c: c.record.sort_key())
    if skipped:
        logger.warning("run_grid skipped %d cells for insufficient history", len(skipped))
    return GridRunResult(records=records, skipped=skipped, predictions=predictions)


def aggregate(records: list[EvaluationRecord]) -> list[AggregateSummary]:
    """Accuracy distribution per (task, model); quartiles use linear interpolation."""
    groups: dict[tuple, list[float]] = {}
    for rec in records:
        groups.setdefault((rec.task, rec.model), []).append(rec.accuracy)
    out = []
    for (task, model) in sorted(groups):
        acc = np.asarray(groups[(task, model)])
        q1, med, q3 = np.percentile(acc, [25, 50, 75], method="linear")
        out.append(AggregateSummary(
            task=task, model=model,
            mean=float(acc.mean()), median=float(med),
            q1=float(q1), q3=float(q3), iqr=float(q3 - q1),
            min=float(acc.min()), max=float(acc.max()),
            n_cells=int(acc.size),
        ))
    return out
