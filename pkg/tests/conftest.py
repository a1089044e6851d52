from datetime import date, timedelta

import pytest

from maintcast.events import ActivityEvent, AuthorRole, Corpus, EventKind, RepoMetadata


def ev(repo, day, kind=EventKind.COMMIT, role=AuthorRole.OTHER, author=None, start=date(2021, 1, 1)):
    return ActivityEvent(repo_id=repo, date=start + timedelta(days=day), kind=kind,
                         author_role=role, author=author)


def make_corpus(repo_events, period_start=date(2021, 1, 1), period_end=date(2021, 12, 31),
                created=None, archived=None):
    """Corpus from {repo_id: [events]}; creation defaults to period start."""
    repos = {}
    for repo_id, events in repo_events.items():
        meta = RepoMetadata(
            repo_id=repo_id,
            created_on=(created or {}).get(repo_id, period_start) if isinstance(created, dict) else (created or period_start),
            archived_on=(archived or {}).get(repo_id) if isinstance(archived, dict) else archived,
        )
        repos[repo_id] = (meta, list(events))
    return Corpus(repos=repos, period_start=period_start, period_end=period_end)


@pytest.fixture
def period():
    return date(2021, 1, 1), date(2021, 12, 31)
