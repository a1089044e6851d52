"""Core domain types shared across the pipeline."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Optional


class EventKind(enum.Enum):
    COMMIT = "commit"
    ISSUE_CREATED = "issue_created"
    ISSUE_COMMENT = "issue_comment"


class AuthorRole(enum.Enum):
    OWNER = "owner"
    MEMBER = "member"
    COLLABORATOR = "collaborator"
    OTHER = "other"


#: Roles whose issue activity counts toward the maintenance score.
CORE_ROLES = frozenset({AuthorRole.OWNER, AuthorRole.MEMBER, AuthorRole.COLLABORATOR})

_ROLE_BY_NAME = {r.value: r for r in AuthorRole}


def parse_role(raw: Optional[str]) -> AuthorRole:
    """Map a raw role string to a role; anything outside the three core roles is OTHER."""
    if raw is None:
        return AuthorRole.OTHER
    return _ROLE_BY_NAME.get(raw.strip().lower(), AuthorRole.OTHER)


@dataclass(frozen=True, order=True)
class ActivityEvent:
    """One dated commit or issue interaction.

    Commits count toward the score regardless of role; the role only matters
    for issue events. ``author`` is an optional identity consumed by the
    contributor-stability analytics and ignored by the score itself.
    """

    repo_id: str
    date: date
    kind: EventKind = field(compare=False)
    author_role: AuthorRole = field(default=AuthorRole.OTHER, compare=False)
    author: Optional[str] = field(default=None, compare=False)

    def sort_key(self):
        return (self.repo_id, self.date, self.kind.value, self.author_role.value, self.author or "")


@dataclass(frozen=True)
class RepoMetadata:
    repo_id: str
    created_on: date
    archived_on: Optional[date] = None
    url: str = ""

    def __post_init__(self):
        if self.archived_on is not None and self.archived_on < self.created_on:
            from .errors import InconsistentDates

            raise InconsistentDates(self.repo_id)


@dataclass
class DependencySnapshot:
    """Deduplicated dependency edges plus the library -> repository mapping."""

    edges: list[tuple[str, str]]
    library_to_repo: dict[str, Optional[str]]
    self_edge_warnings: int = 0

    @property
    def libraries(self) -> set[str]:
        libs = set(self.library_to_repo)
        for a, b in self.edges:
            libs.add(a)
            libs.add(b)
        return libs


@dataclass
class Corpus:
    """All repositories of one experiment with the period that bounds it."""

    repos: dict[str, tuple[RepoMetadata, list[ActivityEvent]]]
    period_start: date
    period_end: date
    dropped_events: int = 0

    def __post_init__(self):
        if self.period_start > self.period_end:
            raise ValueError("period_start after period_end")

    @property
    def n_days(self) -> int:
        return (self.period_end - self.period_start).days + 1

    def day_index(self, d: date) -> int:
        return (d - self.period_start).days

    def repo_ids(self) -> list[str]:
        return sorted(self.repos)


def clip_window(period_start: date, lookback_days: int = 90) -> date:
    """Earliest event date that can still influence an in-period rolling sum."""
    return period_start - timedelta(days=lookback_days - 1)
