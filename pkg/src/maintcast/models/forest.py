"""Bagged regression trees built from first principles.

Trees grow without a depth limit, splitting on the sum-of-squared-error
reduction over all features, two samples minimum per split. Thresholds are
midpoints between consecutive distinct sorted values; ties in gain resolve to
the lowest feature index and then the lowest threshold, so growth is fully
deterministic. Each tree draws its own bootstrap sample from a seed derived
from the forest seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..labels import derive_seed, make_rng


@dataclass
class Tree:
    """Flat array encoding: feature < 0 marks a leaf, value holds its mean."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def as_arrays(self) -> dict:
        return {"feature": self.feature, "threshold": self.threshold,
                "left": self.left, "right": self.right, "value": self.value}

    @classmethod
    def from_arrays(cls, arrays: dict) -> "Tree":
        return cls(**arrays)

    def predict(self, x: np.ndarray) -> np.ndarray:
        node = np.zeros(x.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            nd = node[idx]
            go_left = x[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return self.value[node]


def _best_split(x: np.ndarray, y: np.ndarray):
    """Lowest-SSE split over all features, or None when no feature varies."""
    n = y.shape[0]
    order = np.argsort(x, axis=0, kind="stable")
    xs = np.take_along_axis(x, order, axis=0)
    ys = y[order]
    cs = np.cumsum(ys, axis=0)
    css = np.cumsum(ys * ys, axis=0)
    total_sum = cs[-1]
    total_sq = css[-1]

    counts = np.arange(1, n, dtype=np.float64)[:, None]
    left_sum = cs[:-1]
    left_sq = css[:-1]
    sse_left = left_sq - left_sum * left_sum / counts
    right_counts = n - counts
    right_sum = total_sum - left_sum
    sse_right = (total_sq - left_sq) - right_sum * right_sum / right_counts
    total_sse = sse_left + sse_right

    valid = xs[1:] > xs[:-1]
    if not valid.any():
        return None
    total_sse = np.where(valid, total_sse, np.inf)
    # Feature-major flat scan: argmin's first-wins rule gives the lowest
    # feature index and then the lowest threshold on ties.
    flat = total_sse.T.reshape(-1)
    best = int(np.argmin(flat))
    feat, pos = divmod(best, n - 1)
    threshold = 0.5 * (xs[pos, feat] + xs[pos + 1, feat])
    return feat, float(threshold)


def grow_tree(x: np.ndarray, y: np.ndarray, min_samples_split: int = 2) -> Tree:
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(y.shape[0], dtype=np.int64))]
    while stack:
        node_id, idx = stack.pop()
        yn = y[idx]
        value[node_id] = float(yn.mean())
        if idx.shape[0] < min_samples_split or np.all(yn == yn[0]):
            continue
        split = _best_split(x[idx], yn)
        if split is None:
            continue
        feat, thr = split
        go_left = x[idx, feat] <= thr
        feature[node_id] = feat
        threshold[node_id] = thr
        left_id = new_node()
        right_id = new_node()
        left[node_id] = left_id
        right[node_id] = right_id
        stack.append((right_id, idx[~go_left]))
        stack.append((left_id, idx[go_left]))

    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=np.float64),
    )


def train_forest(x: np.ndarray, y: np.ndarray, n_trees: int, min_samples_split: int,
                 bootstrap: bool, seed: int) -> list[Tree]:
    n = y.shape[0]
    trees = []
    for i in range(n_trees):
        if bootstrap:
            rng = make_rng(derive_seed(seed, "tree", i))
            rows = rng.integers(0, n, size=n)
            trees.append(grow_tree(x[rows], y[rows], min_samples_split))
        else:
            trees.append(grow_tree(x, y, min_samples_split))
    return trees


def predict_forest(trees: list[Tree], x: np.ndarray, aggregate: str = "mean") -> np.ndarray:
    stacked = np.stack([tree.predict(x) for tree in trees])
    if aggregate == "median":
        return np.median(stacked, axis=0)
    return stacked.mean(axis=0)
