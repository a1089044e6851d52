"""Deterministic synthetic repository corpora with controllable regimes.

Persistent repositories place their activity on a pattern that repeats every
lookback period, so every full trailing window sees exactly the event count
that inverts the score formula to the requested level; their reconstructed
scores are exact, which is what makes them usable as acceptance fixtures.
Stochastic regimes draw from a counter-based generator seeded per repository.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from typing import Optional

from .errors import InvalidSpec
from .events import ActivityEvent, AuthorRole, Corpus, EventKind, RepoMetadata
from .labels import derive_seed, make_rng
from .targets import round_half_away

LOOKBACK = 90
MIN_DAYS = 120

PERSISTENT = "persistent"
DECAYING = "decaying"
BURSTY = "bursty"
ABANDONED = "abandoned"
NOISE = "noise"

_AUTHORS = ("ada", "brin", "chen", "dee", "eli")
_CORE = (AuthorRole.OWNER, AuthorRole.MEMBER, AuthorRole.COLLABORATOR)


@dataclass
class RegimeSpec:
    repo_id: str
    kind: str
    created_on: date
    n_days: int
    seed: int = 0
    archived_on: Optional[date] = None
    # persistent / abandoned
    level: int = 10
    active_days: int = 0
    # decaying
    start_level: float = 10.0
    half_life_days: float = 180.0
    # bursty / noise
    base_rate: float = 0.05
    burst_rate: float = 1.5
    burst_prob: float = 0.05
    rate: float = 0.1

    def __post_init__(self):
        if self.kind not in (PERSISTENT, DECAYING, BURSTY, ABANDONED, NOISE):
            raise InvalidSpec(f"unknown regime kind {self.kind!r}")
        if self.n_days < MIN_DAYS:
            raise InvalidSpec(f"n_days must be >= {MIN_DAYS} (gate plus one block)")
        if not 0 <= self.level <= 10:
            raise InvalidSpec("level must lie in 0..10")
        if min(self.base_rate, self.burst_rate, self.rate) < 0 or self.start_level < 0:
            raise InvalidSpec("rates must be non-negative")
        if self.kind == ABANDONED and not 0 < self.active_days <= self.n_days:
            raise InvalidSpec("active_days must lie in 1..n_days")


def activities_per_window(level: int) -> int:
    """Invert the score formula: events per lookback window for a target level."""
    return int(round_half_away(level * (LOOKBACK / 7.0) / 10.0))


def _pattern_offsets(per_window: int) -> set[int]:
    """Evenly spaced day offsets inside one lookback period."""
    return {int(round(j * LOOKBACK / per_window)) % LOOKBACK for j in range(per_window)}


def _periodic_commit_days(n_days: int, per_window: int, until: Optional[int] = None) -> list[int]:
    if per_window <= 0:
        return []
    offsets = _pattern_offsets(per_window)
    stop = n_days if until is None else min(until, n_days)
    return [d for d in range(stop) if d % LOOKBACK in offsets]


def _level_to_daily_rate(level: float) -> float:
    return level * (LOOKBACK / 7.0) / 10.0 / LOOKBACK


def generate_repo_activity(spec: RegimeSpec) -> tuple[RepoMetadata, list[ActivityEvent]]:
    """Deterministic event stream for one repository."""
    meta = RepoMetadata(
        repo_id=spec.repo_id,
        created_on=spec.created_on,
        archived_on=spec.archived_on,
        url=f"https://example.invalid/{spec.repo_id}",
    )
    events: list[ActivityEvent] = []

    def commit(day: int, author_idx: int) -> ActivityEvent:
        return ActivityEvent(
            repo_id=spec.repo_id,
            date=spec.created_on + timedelta(days=day),
            kind=EventKind.COMMIT,
            author=_AUTHORS[author_idx % len(_AUTHORS)],
        )

    if spec.kind == PERSISTENT:
        days = _periodic_commit_days(spec.n_days, activities_per_window(spec.level))
        events = [commit(d, i) for i, d in enumerate(days)]
    elif spec.kind == ABANDONED:
        days = _periodic_commit_days(spec.n_days, activities_per_window(spec.level), until=spec.active_days)
        events = [commit(d, i) for i, d in enumerate(days)]
    else:
        rng = make_rng(derive_seed("synth", spec.repo_id, spec.seed))
        for day in range(spec.n_days):
            if spec.kind == DECAYING:
                rate = _level_to_daily_rate(spec.start_level) * 0.5 ** (day / spec.half_life_days)
            elif spec.kind == BURSTY:
                rate = spec.burst_rate if rng.random() < spec.burst_prob else spec.base_rate
            else:
                rate = spec.rate
            count = int(rng.poisson(rate))
            for _ in range(count):
                roll = rng.random()
                author_idx = int(rng.integers(0, len(_AUTHORS)))
                if roll < 0.7:
                    events.append(commit(day, author_idx))
                else:
                    kind = EventKind.ISSUE_CREATED if roll < 0.85 else EventKind.ISSUE_COMMENT
                    events.append(ActivityEvent(
                        repo_id=spec.repo_id,
                        date=spec.created_on + timedelta(days=day),
                        kind=kind,
                        author_role=_CORE[author_idx % len(_CORE)] if roll < 0.97 else AuthorRole.OTHER,
                        author=_AUTHORS[author_idx % len(_AUTHORS)],
                    ))
    return meta, events


def generate_corpus(specs: list[RegimeSpec]) -> Corpus:
    if not specs:
        raise InvalidSpec("at least one regime spec is required")
    repos = {}
    starts, ends = [], []
    for spec in specs:
        meta, events = generate_repo_activity(spec)
        if meta.repo_id in repos:
            raise InvalidSpec(f"duplicate repo id {meta.repo_id!r}")
        repos[meta.repo_id] = (meta, events)
        starts.append(spec.created_on)
        ends.append(spec.created_on + timedelta(days=spec.n_days - 1))
    return Corpus(repos=repos, period_start=min(starts), period_end=max(ends))


#: Persistent levels used by the benchmark preset: all three buckets, full
#: score range, but away from the bucket edges (3-4 and 7-8) where the
#: integer-coded classes sit on margins too thin for a least-squares plane.
BENCHMARK_LEVELS = (1, 2, 5, 6, 9, 10)


def benchmark_specs(start: date, n_days: int, seed: int = 0,
                    n_persistent: int = 120, n_decaying: int = 40,
                    n_bursty: int = 40) -> list[RegimeSpec]:
    """Mixed preset: persistent repos at varied levels plus noisy regimes."""
    specs = []
    for i in range(n_persistent):
        specs.append(RegimeSpec(
            repo_id=f"persistent-{i:03d}", kind=PERSISTENT, created_on=start,
            n_days=n_days, level=BENCHMARK_LEVELS[i % len(BENCHMARK_LEVELS)],
            seed=derive_seed(seed, "p", i) % (2 ** 31),
        ))
    for i in range(n_decaying):
        specs.append(RegimeSpec(
            repo_id=f"decaying-{i:03d}", kind=DECAYING, created_on=start, n_days=n_days,
            start_level=4.0 + (i % 7), half_life_days=90.0 + 30.0 * (i % 6),
            seed=derive_seed(seed, "d", i) % (2 ** 31),
        ))
    for i in range(n_bursty):
        specs.append(RegimeSpec(
            repo_id=f"bursty-{i:03d}", kind=BURSTY, created_on=start, n_days=n_days,
            base_rate=0.02 + 0.02 * (i % 5), burst_rate=0.8 + 0.2 * (i % 4),
            burst_prob=0.03 + 0.01 * (i % 5), seed=derive_seed(seed, "b", i) % (2 ** 31),
        ))
    return specs


def smoke_specs(start: date, n_days: int = 400, seed: int = 0) -> list[RegimeSpec]:
    """Tiny corpus for quick end-to-end runs."""
    return [
        RegimeSpec(repo_id="steady-high", kind=PERSISTENT, created_on=start, n_days=n_days, level=10),
        RegimeSpec(repo_id="steady-mid", kind=PERSISTENT, created_on=start, n_days=n_days, level=5),
        RegimeSpec(repo_id="steady-low", kind=PERSISTENT, created_on=start, n_days=n_days, level=1),
        RegimeSpec(repo_id="fading", kind=DECAYING, created_on=start, n_days=n_days,
                   start_level=8.0, half_life_days=120.0, seed=seed),
        RegimeSpec(repo_id="spiky", kind=BURSTY, created_on=start, n_days=n_days, seed=seed + 1),
    ]
