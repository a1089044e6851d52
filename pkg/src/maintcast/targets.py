"""Monthly aggregation and the four target representations.

A "month" is a fixed 30-day block anchored at the corpus period start (a
calendar-month mode exists behind a flag). From the block means derive: the
raw rounded score, the three-level bucket, the slope between consecutive
means, and the trend type under a stable-band threshold.
"""

from __future__ import annotations

import calendar
import enum
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import TooShort
from .scorecard import DailySignals, RepoScore, ScoreSeries

BLOCK_DAYS = 30


class Representation(str, enum.Enum):
    RAW = "raw"
    BUCKET = "bucket"
    SLOPE = "slope"
    TREND = "trend"


class Bucket(enum.IntEnum):
    LOW = 0
    MODERATE = 1
    HIGH = 2


class TrendType(enum.IntEnum):
    DOWNWARD = 0
    STABLE = 1
    UPWARD = 2


BUCKET_NAMES = ("low", "moderate", "high")
TREND_NAMES = ("downward", "stable", "upward")


def round_half_away(x):
    """Round half away from zero (4.5 -> 5, -4.5 -> -5); ndarray-friendly."""
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


@dataclass
class MonthlyPoint:
    repo_id: str
    block_index: int
    mean_score: float
    rounded_score: int
    commit_count: int
    issue_count: int
    gated_fraction: float


@dataclass
class TargetSeries:
    repo_id: str
    representation: Representation
    values: np.ndarray


def _block_bounds(n_days: int, period_start: date, calendar_months: bool) -> list[tuple[int, int]]:
    """Half-open (start, end) day offsets of each full block; partial blocks dropped."""
    if not calendar_months:
        n_blocks = n_days // BLOCK_DAYS
        return [(i * BLOCK_DAYS, (i + 1) * BLOCK_DAYS) for i in range(n_blocks)]
    bounds = []
    year, month = period_start.year, period_start.month
    if period_start.day != 1:
        month += 1
        if month > 12:
            year, month = year + 1, 1
    while True:
        first = date(year, month, 1)
        last_day = calendar.monthrange(year, month)[1]
        start = (first - period_start).days
        end = start + last_day
        if end > n_days:
            break
        bounds.append((start, end))
        month += 1
        if month > 12:
            year, month = year + 1, 1
    return bounds


def monthly_aggregate(series: ScoreSeries, signals: DailySignals,
                      calendar_months: bool = False) -> list[MonthlyPoint]:
    """Collapse daily scores and signals into consecutive full blocks."""
    n_days = len(series.score)
    bounds = _block_bounds(n_days, series.start, calendar_months)
    if not bounds:
        raise TooShort(f"{series.repo_id}: {n_days} days do not cover one full block")
    points = []
    for idx, (lo, hi) in enumerate(bounds):
        scores = series.score[lo:hi]
        mean = float(scores.sum()) / len(scores)
        points.append(
            MonthlyPoint(
                repo_id=series.repo_id,
                block_index=idx,
                mean_score=mean,
                rounded_score=int(round_half_away(mean)),
                commit_count=int(signals.commits[lo:hi].sum()),
                issue_count=int(signals.issue_activity[lo:hi].sum()),
                gated_fraction=float(series.gate[lo:hi].sum()) / len(scores),
            )
        )
    return points


def monthly_aggregate_corpus(scored: dict[str, RepoScore],
                             calendar_months: bool = False) -> dict[str, list[MonthlyPoint]]:
    return {
        repo_id: monthly_aggregate(rs.series, rs.signals, calendar_months)
        for repo_id, rs in sorted(scored.items())
    }


def raw_series(points: list[MonthlyPoint]) -> TargetSeries:
    values = np.array([p.rounded_score for p in points], dtype=np.int64)
    return TargetSeries(points[0].repo_id, Representation.RAW, values)


def bucketize_value(rounded_score: int) -> Bucket:
    """0-2 low, 3-7 moderate, 8-10 high."""
    if rounded_score <= 2:
        return Bucket.LOW
    if rounded_score <= 7:
        return Bucket.MODERATE
    return Bucket.HIGH


def bucketize(raw: TargetSeries) -> TargetSeries:
    if raw.representation is not Representation.RAW:
        raise ValueError("bucketize expects a raw-representation series")
    values = np.array([int(bucketize_value(int(v))) for v in raw.values], dtype=np.int64)
    return TargetSeries(raw.repo_id, Representation.BUCKET, values)


def slope_series(means, repo_id: str = "") -> TargetSeries:
    """Differences of consecutive unrounded block means; length n-1."""
    arr = np.asarray(means, dtype=np.float64)
    if arr.size < 2:
        raise TooShort("slope needs at least two monthly points")
    return TargetSeries(repo_id, Representation.SLOPE, np.diff(arr))


def trend_type(slopes: TargetSeries, epsilon: float) -> TargetSeries:
    """Sign band of the slope; |slope| <= epsilon counts as stable."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    v = slopes.values
    codes = np.full(v.shape, int(TrendType.STABLE), dtype=np.int64)
    codes[v < -epsilon] = int(TrendType.DOWNWARD)
    codes[v > epsilon] = int(TrendType.UPWARD)
    return TargetSeries(slopes.repo_id, Representation.TREND, codes)


def filter_constant_extremes(raw_by_repo: dict[str, TargetSeries]) -> tuple[dict[str, TargetSeries], int]:
    """Drop repos whose rounded monthly score sits at 0 everywhere or 10 everywhere."""
    kept = {}
    removed = 0
    for repo_id, series in raw_by_repo.items():
        v = series.values
        if v.size and (np.all(v == 0) or np.all(v == 10)):
            removed += 1
        else:
            kept[repo_id] = series
    return kept, removed


def target_arrays(monthly: dict[str, list[MonthlyPoint]], task: Representation,
                  epsilon: float = 0.5) -> dict[str, np.ndarray]:
    """Numeric per-repo target arrays for one representation.

    Raw and bucket/trend targets are integer-valued (bucket and trend coded
    0..2); slope targets are real. Slope/trend arrays are one block shorter
    than the raw series; a single-block repo yields an empty series rather
    than an error so one short repo cannot sink a corpus-wide run.
    """
    out = {}
    for repo_id, points in monthly.items():
        raw = raw_series(points)
        if task is Representation.RAW:
            out[repo_id] = raw.values.astype(np.float64)
        elif task is Representation.BUCKET:
            out[repo_id] = bucketize(raw).values.astype(np.float64)
        elif len(points) < 2:
            out[repo_id] = np.zeros(0)
        else:
            slopes = slope_series([p.mean_score for p in points], repo_id)
            if task is Representation.SLOPE:
                out[repo_id] = slopes.values
            else:
                out[repo_id] = trend_type(slopes, epsilon).values.astype(np.float64)
    return out


def feature_matrix(points: list[MonthlyPoint]) -> np.ndarray:
    """Per-block model inputs: mean score, commit count, issue count, gated fraction."""
    return np.array(
        [[p.mean_score, p.commit_count, p.issue_count, p.gated_fraction] for p in points],
        dtype=np.float64,
    )


BASE_FEATURES = ("mean_score", "commit_count", "issue_count", "gated_fraction")


def write_target_export(monthly: dict[str, list[MonthlyPoint]], epsilon: float, path) -> None:
    """Delimited export: repo,block,mean_score,rounded,bucket,slope,trend.

    Slope and trend columns describe the transition *into* the block, so they
    stay empty on each repo's first block.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("repo,block,mean_score,rounded,bucket,slope,trend\n")
        for repo_id in sorted(monthly):
            points = monthly[repo_id]
            means = [p.mean_score for p in points]
            slopes = np.diff(np.asarray(means)) if len(means) >= 2 else np.array([])
            trends = trend_type(TargetSeries(repo_id, Representation.SLOPE, slopes), epsilon).values \
                if slopes.size else np.array([], dtype=np.int64)
            for p in points:
                bucket = BUCKET_NAMES[bucketize_value(p.rounded_score)]
                if p.block_index == 0:
                    slope_txt = trend_txt = ""
                else:
                    slope_txt = repr(float(slopes[p.block_index - 1]))
                    trend_txt = TREND_NAMES[trends[p.block_index - 1]]
                fh.write(
                    f"{repo_id},{p.block_index},{p.mean_score!r},{p.rounded_score},"
                    f"{bucket},{slope_txt},{trend_txt}\n"
                )
