"""Daily maintenance-score reconstruction.

Pipeline per repository: daily activity signals -> inclusive 90-day rolling
sums -> availability gate -> 0..10 score. All arrays share one day index
anchored at the corpus period start. Arithmetic is integer-exact: the final
score is ``min(10, round_half_away(7*S/9))`` on gated days, computed as
``min(10, (14*S + 9) // 18)`` so no float rounding can drift.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .errors import MixedRepos
from .events import CORE_ROLES, ActivityEvent, Corpus, EventKind, RepoMetadata


@dataclass
class ScoreParams:
    lookback_days: int = 90
    activity_per_week: int = 1
    days_in_one_week: int = 7

    def __post_init__(self):
        if min(self.lookback_days, self.activity_per_week, self.days_in_one_week) <= 0:
            raise ValueError("score parameters must be strictly positive")


@dataclass
class DailySignals:
    repo_id: str
    start: date
    commits: np.ndarray        # C(day), int64
    issue_activity: np.ndarray  # deduplicated core-role issue interactions per day, int64

    def __post_init__(self):
        if self.commits.shape != self.issue_activity.shape:
            raise ValueError("signal arrays must share one day index")


@dataclass
class RollingSums:
    repo_id: str
    start: date
    commit_sum: np.ndarray
    issue_sum: np.ndarray


@dataclass
class ScoreSeries:
    repo_id: str
    start: date
    gate: np.ndarray           # {0,1} per day
    raw_unrounded: np.ndarray  # pre-gate, pre-rounding score value
    score: np.ndarray          # final integer score 0..10
    gate_open: date
    gate_close: date


def build_daily_signals(events: list[ActivityEvent], period_start: date, period_end: date,
                        repo_id: str | None = None) -> DailySignals:
    """Count per-day commits and deduplicated core-role issue interactions.

    Issue events collapse so each (date, role, kind) triple contributes at
    most one unit; commits count every event. Days without activity stay 0.
    """
    repo_ids = {e.repo_id for e in events}
    if len(repo_ids) > 1:
        raise MixedRepos(repo_ids)
    if repo_id is None:
        repo_id = next(iter(repo_ids)) if repo_ids else ""

    n_days = (period_end - period_start).days + 1
    if n_days <= 0:
        raise ValueError("empty period")
    commits = np.zeros(n_days, dtype=np.int64)
    issues = np.zeros(n_days, dtype=np.int64)
    seen_issue_triples: set[tuple[date, str, EventKind]] = set()
    for ev in events:
        offset = (ev.date - period_start).days
        if offset < 0 or offset >= n_days:
            continue
        if ev.kind is EventKind.COMMIT:
            commits[offset] += 1
        elif ev.author_role in CORE_ROLES:
            triple = (ev.date, ev.author_role.value, ev.kind)
            if triple not in seen_issue_triples:
                seen_issue_triples.add(triple)
                issues[offset] += 1
    return DailySignals(repo_id=repo_id, start=period_start, commits=commits, issue_activity=issues)


def rolling_window_sums(signals: DailySignals, params: ScoreParams | None = None) -> RollingSums:
    """Inclusive trailing-window sums; days before the series start contribute 0."""
    params = params or ScoreParams()
    w = params.lookback_days
    return RollingSums(
        repo_id=signals.repo_id,
        start=signals.start,
        commit_sum=_trailing_sum(signals.commits, w),
        issue_sum=_trailing_sum(signals.issue_activity, w),
    )


def _trailing_sum(values: np.ndarray, window: int) -> np.ndarray:
    cs = np.concatenate(([0], np.cumsum(values, dtype=np.int64)))
    idx = np.arange(1, len(values) + 1)
    lo = np.maximum(idx - window, 0)
    return cs[idx] - cs[lo]


def availability_gate(meta: RepoMetadata, period_start: date, period_end: date,
                      params: ScoreParams | None = None,
                      boundary_inclusive: bool = True) -> tuple[np.ndarray, date, date]:
    """Binary availability per day: open from creation + lookback until archival.

    With ``boundary_inclusive`` (the default) the day exactly ``lookback_days``
    after creation is already open.
    """
    params = params or ScoreParams()
    n_days = (period_end - period_start).days + 1
    if n_days <= 0:
        raise ValueError("empty period")
    gate_open = meta.created_on + timedelta(days=params.lookback_days)
    if not boundary_inclusive:
        gate_open += timedelta(days=1)
    gate_close = meta.archived_on if meta.archived_on is not None else period_end
    days = np.arange(n_days)
    open_off = (gate_open - period_start).days
    close_off = (gate_close - period_start).days
    gate = ((days >= open_off) & (days <= close_off)).astype(np.int64)
    return gate, gate_open, gate_close


def maintained_score_series(sums: RollingSums, gate: np.ndarray, gate_open: date, gate_close: date,
                            params: ScoreParams | None = None) -> ScoreSeries:
    """Apply the score formula day by day.

    The weekly-rate denominator stays an exact rational (lookback/7); scores
    round half away from zero after clipping at 10 and gating.
    """
    params = params or ScoreParams()
    total = sums.commit_sum + sums.issue_sum
    # 10 * S / (apw * lookback/week) == (10 * week * S) / (apw * lookback)
    numer = 10 * params.days_in_one_week
    denom = params.activity_per_week * params.lookback_days
    raw = (float(numer) * total) / denom
    # round_half_away(min(10, numer*S/denom)) in pure integer arithmetic:
    # floor(numer*S/denom + 1/2) == (2*numer*S + denom) // (2*denom)
    rounded = (2 * numer * total + denom) // (2 * denom)
    score = np.minimum(10, rounded) * gate
    return ScoreSeries(
        repo_id=sums.repo_id,
        start=sums.start,
        gate=gate,
        raw_unrounded=raw,
        score=score.astype(np.int64),
        gate_open=gate_open,
        gate_close=gate_close,
    )


@dataclass
class RepoScore:
    """Per-repository reconstruction bundle, all clipped to the corpus period."""

    signals: DailySignals
    sums: RollingSums
    series: ScoreSeries


def score_repository(meta: RepoMetadata, events: list[ActivityEvent], period_start: date,
                     period_end: date, params: ScoreParams | None = None,
                     boundary_inclusive: bool = True) -> RepoScore:
    """Full per-repository reconstruction over an extended index.

    Signals build over ``[period_start - (lookback-1), period_end]`` so the
    first in-period day already sees a full window, then everything is clipped
    back to the period.
    """
    params = params or ScoreParams()
    lead = params.lookback_days - 1
    ext_start = period_start - timedelta(days=lead)
    signals = build_daily_signals(events, ext_start, period_end, repo_id=meta.repo_id)
    sums = rolling_window_sums(signals, params)
    gate, gate_open, gate_close = availability_gate(meta, ext_start, period_end, params, boundary_inclusive)
    series = maintained_score_series(sums, gate, gate_open, gate_close, params)

    def clip(arr):
        return arr[lead:]

    return RepoScore(
        signals=DailySignals(meta.repo_id, period_start, clip(signals.commits), clip(signals.issue_activity)),
        sums=RollingSums(meta.repo_id, period_start, clip(sums.commit_sum), clip(sums.issue_sum)),
        series=ScoreSeries(
            repo_id=meta.repo_id,
            start=period_start,
            gate=clip(series.gate),
            raw_unrounded=clip(series.raw_unrounded),
            score=clip(series.score),
            gate_open=gate_open,
            gate_close=gate_close,
        ),
    )


def score_corpus(corpus: Corpus, params: ScoreParams | None = None,
                 boundary_inclusive: bool = True) -> dict[str, RepoScore]:
    """Reconstruct every repository in the corpus; order-independent by construction."""
    out = {}
    for repo_id in corpus.repo_ids():
        meta, events = corpus.repos[repo_id]
        out[repo_id] = score_repository(meta, events, corpus.period_start, corpus.period_end,
                                        params, boundary_inclusive)
    return out


def write_score_export(scored: dict[str, RepoScore], path) -> None:
    """Delimited export: repo,date,commit_sum,issue_sum,gate,score (bit-exact integers)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("repo,date,commit_sum,issue_sum,gate,score\n")
        for repo_id in sorted(scored):
            rs = scored[repo_id]
            for i in range(len(rs.series.score)):
                day = rs.series.start + timedelta(days=i)
                fh.write(
                    f"{repo_id},{day.isoformat()},{rs.sums.commit_sum[i]},{rs.sums.issue_sum[i]},"
                    f"{rs.series.gate[i]},{rs.series.score[i]}\n"
                )
