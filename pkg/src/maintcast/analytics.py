"""Dataset feasibility statistics: activity-gap means and contributor stability.

Both operations work on calendar years. Gap means use distinct activity dates
(duplicate events on one day collapse); contributor stability compares
identity sets between consecutive calendar months with the Jaccard
coefficient. Issue-side statistics consider core-role participants only,
matching what the score formula counts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MissingAuthorField
from .events import CORE_ROLES, ActivityEvent, Corpus, EventKind


@dataclass
class IntervalStats:
    year: int
    mean_commit_gap_days: float
    active_commit_repos: int
    mean_issue_gap_days: float
    active_issue_repos: int
    overall_mean: float


@dataclass
class StabilityStats:
    year: int
    mean_commit_jaccard: float
    active_commit_repos: int
    mean_issue_jaccard: float
    active_issue_repos: int


def _is_issue_core(ev: ActivityEvent) -> bool:
    return ev.kind in (EventKind.ISSUE_CREATED, EventKind.ISSUE_COMMENT) and ev.author_role in CORE_ROLES


def _mean_gap(dates: list) -> float:
    """(last - first) / (n - 1) over sorted distinct activity dates."""
    distinct = sorted(set(dates))
    return (distinct[-1] - distinct[0]).days / (len(distinct) - 1)


def mean_interactivity_days(corpus: Corpus, year: int) -> IntervalStats:
    """Per-repo mean day gap between activities, averaged over active repos.

    A repository is active for a kind when it has at least two distinct
    activity dates of that kind inside the year.
    """
    commit_means = []
    issue_means = []
    for repo_id in corpus.repo_ids():
        _, events = corpus.repos[repo_id]
        commit_dates = [e.date for e in events if e.kind is EventKind.COMMIT and e.date.year == year]
        issue_dates = [e.date for e in events if _is_issue_core(e) and e.date.year == year]
        if len(set(commit_dates)) >= 2:
            commit_means.append(_mean_gap(commit_dates))
        if len(set(issue_dates)) >= 2:
            issue_means.append(_mean_gap(issue_dates))
    mean_commit = sum(commit_means) / len(commit_means) if commit_means else 0.0
    mean_issue = sum(issue_means) / len(issue_means) if issue_means else 0.0
    present = [m for m, reps in ((mean_commit, commit_means), (mean_issue, issue_means)) if reps]
    overall = sum(present) / len(present) if present else 0.0
    return IntervalStats(
        year=year,
        mean_commit_gap_days=mean_commit,
        active_commit_repos=len(commit_means),
        mean_issue_gap_days=mean_issue,
        active_issue_repos=len(issue_means),
        overall_mean=overall,
    )


def jaccard(a: set, b: set) -> float:
    """|A ∩ B| / |A ∪ B|; both sets must not be empty at once."""
    union = a | b
    return len(a & b) / len(union)


def monthly_contributor_jaccard(corpus: Corpus, year: int, kind: str) -> tuple[float, int]:
    """Mean Jaccard similarity of contributor sets in consecutive months.

    ``kind`` is ``"commit"`` (all committers) or ``"issue"`` (core-role issue
    participants). Month pairs where both sides are empty are skipped; a pair
    with one empty side scores 0. A repo enters the cross-repo average only
    when it was active in at least two consecutive months. Raises
    :class:`MissingAuthorField` when a relevant event lacks an identity.
    """
    if kind not in ("commit", "issue"):
        raise ValueError("kind must be 'commit' or 'issue'")
    repo_means = []
    for repo_id in corpus.repo_ids():
        _, events = corpus.repos[repo_id]
        monthly_sets: list[set] = [set() for _ in range(12)]
        for ev in events:
            if ev.date.year != year:
                continue
            if kind == "commit" and ev.kind is not EventKind.COMMIT:
                continue
            if kind == "issue" and not _is_issue_core(ev):
                continue
            if ev.author is None:
                raise MissingAuthorField(repo_id)
            monthly_sets[ev.date.month - 1].add(ev.author)
        pair_values = [
            jaccard(monthly_sets[m], monthly_sets[m + 1])
            for m in range(11)
            if monthly_sets[m] or monthly_sets[m + 1]
        ]
        active_consecutive = any(monthly_sets[m] and monthly_sets[m + 1] for m in range(11))
        if pair_values and active_consecutive:
            repo_means.append(sum(pair_values) / len(pair_values))
    mean = sum(repo_means) / len(repo_means) if repo_means else 0.0
    return mean, len(repo_means)


def contributor_stability(corpus: Corpus, year: int) -> StabilityStats:
    commit_mean, commit_repos = monthly_contributor_jaccard(corpus, year, "commit")
    issue_mean, issue_repos = monthly_contributor_jaccard(corpus, year, "issue")
    return StabilityStats(
        year=year,
        mean_commit_jaccard=commit_mean,
        active_commit_repos=commit_repos,
        mean_issue_jaccard=issue_mean,
        active_issue_repos=issue_repos,
    )


def write_interval_report(stats: list[IntervalStats], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("year,commit_gap_days,active_commit_repos,issue_gap_days,active_issue_repos,mean\n")
        for s in stats:
            fh.write(
                f"{s.year},{s.mean_commit_gap_days!r},{s.active_commit_repos},"
                f"{s.mean_issue_gap_days!r},{s.active_issue_repos},{s.overall_mean!r}\n"
            )


def write_stability_report(stats: list[StabilityStats], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("year,commit_jaccard,active_commit_repos,issue_jaccard,active_issue_repos\n")
        for s in stats:
            fh.write(
                f"{s.year},{s.mean_commit_jaccard!r},{s.active_commit_repos},"
                f"{s.mean_issue_jaccard!r},{s.active_issue_repos}\n"
            )
