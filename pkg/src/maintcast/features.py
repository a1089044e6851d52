"""Leakage-free supervised sample construction from monthly blocks.

Samples pool across repositories: each one is a fixed-length window of
per-block features plus a single target strictly in its future. The tabular
statistical model consumes an expanded feature vector (lags, window
aggregates, moments, first differences, mean interactions, trends); the
forest consumes the flat window; the recurrent network the (t, f) window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySampleSet
from .targets import MonthlyPoint, Representation, feature_matrix


@dataclass
class SampleSet:
    """Pooled windowed samples for one (task, window, horizon) setting.

    ``inputs`` has shape (n, t, f); ``targets`` shape (n,). Block bookkeeping
    (``input_end_blocks``, ``target_blocks``) feeds the leakage guard, and
    ``origins`` maps each row back to (repo_id, last input block index).
    """

    task: Representation
    window_t: int
    horizon_h: int
    inputs: np.ndarray
    targets: np.ndarray
    input_end_blocks: np.ndarray
    target_blocks: np.ndarray
    origins: list[tuple[str, int]]

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_features(self) -> int:
        return self.inputs.shape[2]

    def __post_init__(self):
        # Structural no-leakage invariant: target strictly after every input block.
        if self.n and not np.all(self.input_end_blocks < self.target_blocks):
            raise ValueError("sample target does not lie strictly after its input window")


def make_windowed_samples(
    monthly: dict[str, list[MonthlyPoint]],
    targets_by_repo: dict[str, np.ndarray],
    task: Representation,
    window_t: int,
    horizon_h: int,
    block_range: tuple[int, int],
) -> SampleSet:
    """Enumerate every complete (window, target) pair inside ``block_range``.

    ``block_range`` is half-open ``[lo, hi)`` in target-series block indices.
    A window ends at block e (inputs are raw blocks e-t+1..e) and its target
    sits at block e+h of the task's target series; both ends must fall inside
    the range. Repos that cannot fill a window are skipped. Rows are ordered
    by (repo_id, window end) for determinism.
    """
    if window_t < 1:
        raise ValueError("window_t must be >= 1")
    if horizon_h < 1:
        raise ValueError("horizon_h must be >= 1")
    lo, hi = block_range
    inputs, targets = [], []
    ends, tblocks, origins = [], [], []
    for repo_id in sorted(monthly):
        if repo_id not in targets_by_repo:
            continue
        feats = feature_matrix(monthly[repo_id])
        tgt = targets_by_repo[repo_id]
        n_feat_blocks = feats.shape[0]
        for end in range(max(lo + window_t - 1, window_t - 1), hi):
            target_block = end + horizon_h
            if target_block >= hi:
                break
            if end >= n_feat_blocks or target_block >= len(tgt):
                continue
            start = end - window_t + 1
            inputs.append(feats[start:end + 1])
            targets.append(tgt[target_block])
            ends.append(end)
            tblocks.append(target_block)
            origins.append((repo_id, end))
    if not inputs:
        raise EmptySampleSet(
            f"no repo yields a window of {window_t} blocks plus a target {horizon_h} ahead in {block_range}"
        )
    return SampleSet(
        task=task,
        window_t=window_t,
        horizon_h=horizon_h,
        inputs=np.stack(inputs),
        targets=np.asarray(targets, dtype=np.float64),
        input_end_blocks=np.asarray(ends, dtype=np.int64),
        target_blocks=np.asarray(tblocks, dtype=np.int64),
        origins=origins,
    )


def flatten_samples(samples: SampleSet) -> np.ndarray:
    """Row-major (block-major then feature) flattening to (n, t*f)."""
    n, t, f = samples.inputs.shape
    return samples.inputs.reshape(n, t * f)


def unflatten(flat: np.ndarray, window_t: int, n_features: int) -> np.ndarray:
    return flat.reshape(flat.shape[0], window_t, n_features)


def varma_feature_expand(window: np.ndarray) -> np.ndarray:
    """Deterministic tabular expansion of one (t, f) window.

    Fixed layout: per-feature chronological lags; per-feature mean/std/min/max;
    per-feature first differences; pairwise products of per-feature means;
    per-feature last-minus-first trend. Length depends only on (t, f).
    """
    t, f = window.shape
    means = window.mean(axis=0)
    parts = [
        window.T.reshape(-1),                              # lags, feature-major
        np.column_stack([means, window.std(axis=0),
                         window.min(axis=0), window.max(axis=0)]).reshape(-1),
        np.diff(window, axis=0).T.reshape(-1),             # first differences
    ]
    interactions = [means[i] * means[j] for i in range(f) for j in range(i + 1, f)]
    parts.append(np.asarray(interactions, dtype=np.float64))
    parts.append(window[-1] - window[0])                   # trend
    return np.concatenate(parts)


def expanded_length(window_t: int, n_features: int) -> int:
    t, f = window_t, n_features
    return f * t + 4 * f + f * (t - 1) + f * (f - 1) // 2 + f


def expand_all(samples: SampleSet) -> np.ndarray:
    out = np.empty((samples.n, expanded_length(samples.window_t, samples.n_features)))
    for i in range(samples.n):
        out[i] = varma_feature_expand(samples.inputs[i])
    return out


@dataclass
class Standardization:
    """Per-column training-set statistics; constant columns keep scale 1."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, table: np.ndarray) -> "Standardization":
        mean = table.mean(axis=0)
        std = table.std(axis=0)
        std = np.where(std > 0.0, std, 1.0)
        return cls(mean=mean, std=std)

    def apply(self, table: np.ndarray) -> np.ndarray:
        return (table - self.mean) / self.std
