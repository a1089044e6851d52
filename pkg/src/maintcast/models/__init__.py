"""Four forecasters behind one train/predict contract.

Kinds: ``majority`` (constant modal label), ``varma`` (ridge regression on the
expanded window features), ``forest`` (bagged regression trees), ``lstm``
(recurrent network). All are deterministic functions of (config.seed, samples)
and every prediction path is pure.
"""

from __future__ import annotations

import collections
import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..errors import EmptyTrainingSet, KindMismatch, ShapeMismatch, SingularSystem
from ..features import SampleSet, Standardization, expand_all, flatten_samples
from ..labels import clip_range, derive_seed, discretize
from ..targets import Representation
from . import forest as _forest
from . import lstm as _lstm

MODEL_KINDS = ("majority", "varma", "forest", "lstm")

SERIALIZATION_VERSION = 1


@dataclass
class ModelConfig:
    kind: str
    seed: int
    task: Representation
    slope_step: float = 1.0
    # varma
    ridge_lambda: float = 1.0
    # forest
    n_trees: int = 100
    min_samples_split: int = 2
    bootstrap: bool = True
    aggregate: str = "mean"
    # lstm
    hidden_size: int = 32
    dense_size: int = 16
    dropout: float = 0.2
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 50
    val_fraction: float = 0.1
    patience: int = 5

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.n_trees < 1 or self.min_samples_split < 2:
            raise ValueError("forest hyperparameters out of range")
        if self.aggregate not in ("mean", "median"):
            raise ValueError("aggregate must be 'mean' or 'median'")
        if self.ridge_lambda < 0:
            raise ValueError("ridge penalty must be non-negative")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.slope_step <= 0:
            raise ValueError("slope step must be positive")


@dataclass
class TrainedModel:
    kind: str
    task: Representation
    window_t: int
    n_features: int
    n_samples: int
    horizon_h: int
    config: ModelConfig
    standardization: Optional[Standardization] = None
    # majority
    label: float = 0.0
    # varma
    coef: Optional[np.ndarray] = None
    intercept: float = 0.0
    # forest
    trees: list = field(default_factory=list)
    # lstm (targets train in z-space; predictions map back through these)
    params: Optional[dict] = None
    target_mean: float = 0.0
    target_std: float = 1.0
    update_count: int = 0


def _check_shapes(model: TrainedModel, samples: SampleSet) -> None:
    if samples.n and (samples.window_t != model.window_t or samples.n_features != model.n_features):
        raise ShapeMismatch((model.window_t, model.n_features), (samples.window_t, samples.n_features))


def train(config: ModelConfig, samples: SampleSet) -> TrainedModel:
    if samples.n == 0:
        raise EmptyTrainingSet()
    if samples.task is not config.task:
        raise KindMismatch(config.task.value, samples.task.value)
    trainer = {
        "majority": _train_majority,
        "varma": _train_varma,
        "forest": _train_forest,
        "lstm": _train_lstm,
    }[config.kind]
    return trainer(config, samples)


def predict(model: TrainedModel, samples: SampleSet) -> np.ndarray:
    _check_shapes(model, samples)
    predictor = {
        "majority": _predict_majority,
        "varma": _predict_varma,
        "forest": _predict_forest,
        "lstm": _predict_lstm,
    }[model.kind]
    return predictor(model, samples)


# --- majority ---------------------------------------------------------------

def modal_label(task: Representation, targets: np.ndarray, slope_step: float = 1.0) -> float:
    """Most frequent discretized label; ties break to the smallest label."""
    labels = discretize(task, targets, slope_step)
    counts = collections.Counter(labels.tolist())
    best = max(sorted(counts), key=lambda lab: (counts[lab], -lab))
    return float(best)


def _train_majority(config: ModelConfig, samples: SampleSet) -> TrainedModel:
    label = modal_label(config.task, samples.targets, config.slope_step)
    return TrainedModel(
        kind="majority", task=config.task, window_t=samples.window_t,
        n_features=samples.n_features, n_samples=samples.n, horizon_h=samples.horizon_h,
        config=config, label=label,
    )


def _predict_majority(model: TrainedModel, samples: SampleSet) -> np.ndarray:
    return np.full(samples.n, model.label, dtype=np.float64)


# --- varma (ridge on expanded features) --------------------------------------

def _train_varma(config: ModelConfig, samples: SampleSet) -> TrainedModel:
    table = expand_all(samples)
    stats = Standardization.fit(table)
    x = stats.apply(table)
    y = samples.targets
    y_mean = float(y.mean())
    gram = x.T @ x + config.ridge_lambda * np.eye(x.shape[1])
    rhs = x.T @ (y - y_mean)
    try:
        factor = cho_factor(gram, lower=True)
    except np.linalg.LinAlgError:
        raise SingularSystem() from None
    coef = cho_solve(factor, rhs)
    return TrainedModel(
        kind="varma", task=config.task, window_t=samples.window_t,
        n_features=samples.n_features, n_samples=samples.n, horizon_h=samples.horizon_h,
        config=config, standardization=stats, coef=coef, intercept=y_mean,
    )


def _predict_varma(model: TrainedModel, samples: SampleSet) -> np.ndarray:
    x = model.standardization.apply(expand_all(samples))
    return x @ model.coef + model.intercept


# --- forest -------------------------------------------------------------------

def _train_forest(config: ModelConfig, samples: SampleSet) -> TrainedModel:
    table = flatten_samples(samples)
    stats = Standardization.fit(table)
    x = stats.apply(table)
    trees = _forest.train_forest(
        x, samples.targets,
        n_trees=config.n_trees,
        min_samples_split=config.min_samples_split,
        bootstrap=config.bootstrap,
        seed=config.seed,
    )
    return TrainedModel(
        kind="forest", task=config.task, window_t=samples.window_t,
        n_features=samples.n_features, n_samples=samples.n, horizon_h=samples.horizon_h,
        config=config, standardization=stats, trees=trees,
    )


def _predict_forest(model: TrainedModel, samples: SampleSet) -> np.ndarray:
    x = model.standardization.apply(flatten_samples(samples))
    return _forest.predict_forest(model.trees, x, aggregate=model.config.aggregate)


# --- lstm ----------------------------------------------------------------------

def _lstm_standardize(stats: Standardization, inputs: np.ndarray) -> np.ndarray:
    n, t, f = inputs.shape
    flat = inputs.reshape(n * t, f)
    return ((flat - stats.mean) / stats.std).reshape(n, t, f)


def _train_lstm(config: ModelConfig, samples: SampleSet) -> TrainedModel:
    n, t, f = samples.inputs.shape
    stats = Standardization.fit(samples.inputs.reshape(n * t, f))
    x = _lstm_standardize(stats, samples.inputs)
    lo, hi = clip_range(config.task)
    y = np.clip(samples.targets, lo, hi)
    y_mean = float(y.mean())
    y_std = float(y.std()) or 1.0
    params = _lstm.init_params(f, config.hidden_size, config.dense_size, derive_seed(config.seed, "init"))
    params = _lstm.fit(params, x, (y - y_mean) / y_std, config,
                       rng_seed=derive_seed(config.seed, "fit", 0))
    return TrainedModel(
        kind="lstm", task=config.task, window_t=t, n_features=f, n_samples=n,
        horizon_h=samples.horizon_h, config=config, standardization=stats,
        params=params, target_mean=y_mean, target_std=y_std, update_count=0,
    )


def _predict_lstm(model: TrainedModel, samples: SampleSet) -> np.ndarray:
    if samples.n == 0:
        return np.zeros(0)
    x = _lstm_standardize(model.standardization, samples.inputs)
    return _lstm.forward_batch(model.params, x) * model.target_std + model.target_mean


def incremental_update(model: TrainedModel, samples: SampleSet) -> TrainedModel:
    """Continue LSTM optimization on new samples with fresh early stopping.

    Weights carry over; the standardization statistics stay frozen from the
    original fit so feature scaling never drifts mid-stream. Returns a new
    model, leaving the input untouched.
    """
    if model.kind != "lstm":
        raise KindMismatch("lstm", model.kind)
    if samples.n == 0:
        return model
    _check_shapes(model, samples)
    x = _lstm_standardize(model.standardization, samples.inputs)
    lo, hi = clip_range(model.task)
    y = np.clip(samples.targets, lo, hi)
    y = (y - model.target_mean) / model.target_std
    params = {k: v.copy() for k, v in model.params.items()}
    seed = derive_seed(model.config.seed, "fit", model.update_count + 1)
    params = _lstm.fit(params, x, y, model.config, rng_seed=seed)
    return replace(model, params=params, update_count=model.update_count + 1,
                   n_samples=samples.n)


def lstm_gradient_check(window_t: int = 3, n_features: int = 2, hidden: int = 4,
                        dense: int = 3, seed: int = 1, zero_recurrent: bool = False) -> float:
    """Max relative error of analytic vs central-finite-difference gradients."""
    return _lstm.gradient_check(window_t, n_features, hidden, dense, seed,
                                zero_recurrent=zero_recurrent)


# --- serialization ---------------------------------------------------------------

def save_model(model: TrainedModel, path) -> None:
    """Versioned npz archive; round-trips bit-exactly."""
    header = {
        "version": SERIALIZATION_VERSION,
        "kind": model.kind,
        "task": model.task.value,
        "window_t": model.window_t,
        "n_features": model.n_features,
        "n_samples": model.n_samples,
        "horizon_h": model.horizon_h,
        "label": model.label,
        "intercept": model.intercept,
        "target_mean": model.target_mean,
        "target_std": model.target_std,
        "update_count": model.update_count,
        "config": {k: (v.value if isinstance(v, Representation) else v)
                   for k, v in vars(model.config).items()},
    }
    arrays = {"header": np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)}
    if model.standardization is not None:
        arrays["std_mean"] = model.standardization.mean
        arrays["std_std"] = model.standardization.std
    if model.coef is not None:
        arrays["coef"] = model.coef
    for i, tree in enumerate(model.trees):
        for name, arr in tree.as_arrays().items():
            arrays[f"tree_{i}_{name}"] = arr
    if model.params is not None:
        for name, arr in model.params.items():
            arrays[f"param_{name}"] = arr
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_model(path) -> TrainedModel:
    data = np.load(path)
    header = json.loads(bytes(data["header"]).decode())
    if header["version"] != SERIALIZATION_VERSION:
        raise ValueError(f"unsupported model format version {header['version']}")
    cfg_raw = dict(header["config"])
    cfg_raw["task"] = Representation(cfg_raw["task"])
    config = ModelConfig(**cfg_raw)
    stats = None
    if "std_mean" in data:
        stats = Standardization(mean=data["std_mean"], std=data["std_std"])
    trees = []
    i = 0
    while f"tree_{i}_feature" in data:
        trees.append(_forest.Tree.from_arrays({
            name: data[f"tree_{i}_{name}"] for name in ("feature", "threshold", "left", "right", "value")
        }))
        i += 1
    params = None
    param_keys = [k for k in data.files if k.startswith("param_")]
    if param_keys:
        params = {k[len("param_"):]: data[k] for k in sorted(param_keys)}
    return TrainedModel(
        kind=header["kind"],
        task=Representation(header["task"]),
        window_t=header["window_t"],
        n_features=header["n_features"],
        n_samples=header["n_samples"],
        horizon_h=header["horizon_h"],
        config=config,
        standardization=stats,
        label=header["label"],
        coef=data["coef"] if "coef" in data else None,
        intercept=header["intercept"],
        trees=trees,
        params=params,
        target_mean=header["target_mean"],
        target_std=header["target_std"],
        update_count=header["update_count"],
    )
