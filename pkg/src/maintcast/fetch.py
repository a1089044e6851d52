"""Narrow client for pulling one repository's activity export from a hosting API.

Replaces bulk crawling: a single repository per call, a bounded number of
requests, and the same normalization as the file readers. The endpoint speaks
a small query protocol: the client POSTs a JSON document and receives pages of
commit dates and issue interactions with their author roles stored verbatim.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Optional

import requests

from .errors import AuthFailure, MalformedRecord, RateLimited, RepoNotFound, RequestBudgetExceeded
from .events import ActivityEvent, EventKind, RepoMetadata, parse_role
from .ingest import _parse_date

QUERY_DOCUMENT = (
    "query RepositoryExport($url: String!, $since: Date!, $until: Date!, $cursor: String) {"
    " repository(url: $url) {"
    " url createdAt archivedAt"
    " activity(since: $since, until: $until, after: $cursor)"
    " { nodes { kind date role author } pageInfo { hasNextPage endCursor } } } }"
)


@dataclass
class FetchConfig:
    endpoint: str
    token_env: str = "MAINTCAST_TOKEN"
    request_budget: int = 20
    timeout_s: float = 30.0
    lookback_days: int = 90


def _token(config: FetchConfig, explicit: Optional[str]) -> str:
    if explicit:
        return explicit
    return os.environ.get(config.token_env, "")


def fetch_repository_export(
    repo_url: str,
    config: FetchConfig,
    period_start: date,
    period_end: date,
    auth_token: Optional[str] = None,
    session: Optional[requests.Session] = None,
) -> tuple[RepoMetadata, list[ActivityEvent]]:
    """Fetch metadata plus activity events for one repository.

    Requests only the experiment period plus the lookback window; pagination
    stops when the request budget is exhausted. Events run through the same
    date and role normalization as :func:`maintcast.ingest.read_event_log`.
    """
    sess = session or requests.Session()
    since = period_start - timedelta(days=config.lookback_days - 1)
    headers = {"Authorization": f"Bearer {_token(config, auth_token)}"}
    cursor: Optional[str] = None
    meta: Optional[RepoMetadata] = None
    events: list[ActivityEvent] = []

    for request_no in range(1, config.request_budget + 1):
        payload = {
            "query": QUERY_DOCUMENT,
            "variables": {
                "url": repo_url,
                "since": since.isoformat(),
                "until": period_end.isoformat(),
                "cursor": cursor,
            },
        }
        resp = sess.post(config.endpoint, json=payload, headers=headers, timeout=config.timeout_s)
        if resp.status_code == 401:
            raise AuthFailure()
        if resp.status_code in (403, 429):
            raise RateLimited(float(resp.headers.get("Retry-After", "60")))
        if resp.status_code == 404:
            raise RepoNotFound(repo_url)
        resp.raise_for_status()

        body = resp.json()
        repository = (body.get("data") or {}).get("repository") if "data" in body else body.get("repository")
        if repository is None:
            raise RepoNotFound(repo_url)

        if meta is None:
            repo_id = _repo_id_from_url(repository.get("url", repo_url))
            archived = repository.get("archivedAt")
            meta = RepoMetadata(
                repo_id=repo_id,
                created_on=_parse_date(str(repository["createdAt"]), request_no),
                archived_on=_parse_date(str(archived), request_no) if archived else None,
                url=repository.get("url", repo_url),
            )

        activity = repository.get("activity", {})
        for node in activity.get("nodes", []):
            kind = {k.value: k for k in EventKind}.get(node.get("kind"))
            if kind is None:
                raise MalformedRecord(request_no, f"unknown kind {node.get('kind')!r}")
            events.append(
                ActivityEvent(
                    repo_id=meta.repo_id,
                    date=_parse_date(str(node["date"]), request_no),
                    kind=kind,
                    author_role=parse_role(node.get("role")),
                    author=node.get("author"),
                )
            )
        page = activity.get("pageInfo", {})
        if not page.get("hasNextPage"):
            return meta, events
        cursor = page.get("endCursor")

    raise RequestBudgetExceeded(config.request_budget)


def _repo_id_from_url(url: str) -> str:
    tail = url.rstrip("/").split("//")[-1]
    parts = tail.split("/")
    return "/".join(parts[-2:]) if len(parts) >= 2 else tail
