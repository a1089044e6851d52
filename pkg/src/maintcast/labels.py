"""Label spaces and discretization shared by the models and the evaluator.

Every task trains as regression on numeric codes; predictions snap onto the
task's finite label space only at evaluation time. Raw scores discretize to
the integers 0..10, bucket and trend codes to {0,1,2}, slopes to multiples of
a configurable step inside [-10, 10]. Rounding is half away from zero
throughout.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .targets import Representation, round_half_away

SLOPE_LIMIT = 10.0


def label_space(task: Representation, slope_step: float = 1.0) -> np.ndarray:
    if task is Representation.RAW:
        return np.arange(11, dtype=np.float64)
    if task in (Representation.BUCKET, Representation.TREND):
        return np.arange(3, dtype=np.float64)
    k = int(round(SLOPE_LIMIT / slope_step))
    return np.arange(-k, k + 1, dtype=np.float64) * slope_step


def discretize(task: Representation, values, slope_step: float = 1.0) -> np.ndarray:
    """Snap raw model outputs onto the task's label space."""
    v = np.asarray(values, dtype=np.float64)
    if task is Representation.RAW:
        return np.clip(round_half_away(v), 0.0, 10.0)
    if task in (Representation.BUCKET, Representation.TREND):
        return np.clip(round_half_away(v), 0.0, 2.0)
    k = int(round(SLOPE_LIMIT / slope_step))
    steps = np.clip(round_half_away(v / slope_step), -k, k)
    return steps * slope_step + 0.0  # +0.0 normalizes -0.0


def clip_range(task: Representation) -> tuple[float, float]:
    """Target clipping bounds used by the recurrent network before training."""
    if task is Representation.SLOPE:
        return (-SLOPE_LIMIT, SLOPE_LIMIT)
    return (0.0, 10.0)


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a sequence of identifiers (counter-based splitting)."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))
