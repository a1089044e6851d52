"""Readers and writers for the on-disk exchange formats.

Event logs and metadata files are line-delimited JSON; dependency snapshots
are two-column delimited text with a companion library->repo map. All readers
are pure functions of file content and safe to call concurrently on distinct
paths.
"""

from __future__ import annotations

import json
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Optional

from .errors import (
    DuplicateRepo,
    InvalidDate,
    MalformedRecord,
    UnknownRepo,
)
from .events import (
    ActivityEvent,
    Corpus,
    DependencySnapshot,
    EventKind,
    RepoMetadata,
    clip_window,
    parse_role,
)

_KIND_BY_NAME = {k.value: k for k in EventKind}

DEP_HEADER = "dependent,dependency"
LIBMAP_HEADER = "library,repo"


def _parse_date(raw: str, line_no: int) -> date:
    """Normalize an ISO date or datetime to a UTC calendar date."""
    raw = raw.strip()
    try:
        if len(raw) == 10:
            return date.fromisoformat(raw)
        dt = datetime.fromisoformat(raw.replace("Z", "+00:00"))
        if dt.tzinfo is not None:
            dt = dt.astimezone(timezone.utc)
        return dt.date()
    except ValueError:
        raise InvalidDate(line_no, raw) from None


def read_event_log(path) -> list[ActivityEvent]:
    """Parse a line-delimited event log, in file order.

    Unknown role strings map to OTHER; commits may omit the role entirely.
    """
    events = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_no, str(exc)) from None
            if not isinstance(rec, dict):
                raise MalformedRecord(line_no, "record is not an object")
            try:
                repo = rec["repo"]
                kind_raw = rec["kind"]
                date_raw = rec["date"]
            except KeyError as exc:
                raise MalformedRecord(line_no, f"missing field {exc}") from None
            kind = _KIND_BY_NAME.get(kind_raw)
            if kind is None:
                raise MalformedRecord(line_no, f"unknown kind {kind_raw!r}")
            events.append(
                ActivityEvent(
                    repo_id=str(repo),
                    date=_parse_date(str(date_raw), line_no),
                    kind=kind,
                    author_role=parse_role(rec.get("role")),
                    author=rec.get("author"),
                )
            )
    return events


def write_event_log(events: list[ActivityEvent], path) -> None:
    """Write events in canonical form: sorted, LF line endings, stable field order."""
    ordered = sorted(events, key=lambda e: e.sort_key())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ev in ordered:
            rec = {"repo": ev.repo_id, "kind": ev.kind.value, "date": ev.date.isoformat()}
            if ev.kind is not EventKind.COMMIT or ev.author_role.value != "other":
                rec["role"] = ev.author_role.value
            if ev.author is not None:
                rec["author"] = ev.author
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_repo_metadata(path) -> dict[str, RepoMetadata]:
    """Parse the metadata file; one entry per repository, duplicates are an error."""
    out: dict[str, RepoMetadata] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_no, str(exc)) from None
            try:
                repo = str(rec["repo"])
                created = _parse_date(str(rec["created"]), line_no)
            except KeyError as exc:
                raise MalformedRecord(line_no, f"missing field {exc}") from None
            if repo in out:
                raise DuplicateRepo(repo)
            archived = rec.get("archived")
            out[repo] = RepoMetadata(
                repo_id=repo,
                created_on=created,
                archived_on=_parse_date(str(archived), line_no) if archived else None,
                url=rec.get("url", ""),
            )
    return out


def write_repo_metadata(metas: dict[str, RepoMetadata], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for repo_id in sorted(metas):
            m = metas[repo_id]
            rec = {"repo": m.repo_id, "url": m.url, "created": m.created_on.isoformat()}
            if m.archived_on is not None:
                rec["archived"] = m.archived_on.isoformat()
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_dependency_snapshot(edges_path, libmap_path=None) -> DependencySnapshot:
    """Load dependency edges and the optional library->repo map.

    Self-edges are dropped (counted as warnings) and duplicate edges collapsed.
    """
    edges: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    warnings = 0
    with open(edges_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line_no == 1 and line.strip() == DEP_HEADER:
                continue
            parts = line.split(",")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise MalformedRecord(line_no, f"expected two columns, got {line!r}")
            a, b = parts[0].strip(), parts[1].strip()
            if a == b:
                warnings += 1
                continue
            if (a, b) not in seen:
                seen.add((a, b))
                edges.append((a, b))

    library_to_repo: dict[str, Optional[str]] = {}
    if libmap_path is not None and Path(libmap_path).exists():
        with open(libmap_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                if line_no == 1 and line.strip() == LIBMAP_HEADER:
                    continue
                parts = line.split(",")
                if len(parts) != 2 or not parts[0].strip():
                    raise MalformedRecord(line_no, f"expected two columns, got {line!r}")
                library_to_repo[parts[0].strip()] = parts[1].strip() or None
    for a, b in edges:
        library_to_repo.setdefault(a, None)
        library_to_repo.setdefault(b, None)
    return DependencySnapshot(edges=edges, library_to_repo=library_to_repo, self_edge_warnings=warnings)


def write_dependency_snapshot(snapshot: DependencySnapshot, edges_path, libmap_path) -> None:
    with open(edges_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(DEP_HEADER + "\n")
        for a, b in sorted(snapshot.edges):
            fh.write(f"{a},{b}\n")
    with open(libmap_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(LIBMAP_HEADER + "\n")
        for lib in sorted(snapshot.library_to_repo):
            repo = snapshot.library_to_repo[lib] or ""
            fh.write(f"{lib},{repo}\n")


def load_corpus(events_path, metadata_path, period_start: date, period_end: date) -> Corpus:
    """Assemble a Corpus, dropping events that cannot influence any in-period score.

    Events earlier than ``period_start - 89 days`` or later than ``period_end``
    are dropped and counted; every surviving event must have a metadata entry.
    """
    metas = read_repo_metadata(metadata_path)
    events = read_event_log(events_path)
    earliest = clip_window(period_start)
    kept: dict[str, list[ActivityEvent]] = {repo: [] for repo in metas}
    dropped = 0
    for ev in events:
        if ev.repo_id not in metas:
            raise UnknownRepo(ev.repo_id)
        if ev.date < earliest or ev.date > period_end:
            dropped += 1
            continue
        kept[ev.repo_id].append(ev)
    repos = {rid: (metas[rid], kept[rid]) for rid in metas}
    return Corpus(repos=repos, period_start=period_start, period_end=period_end, dropped_events=dropped)
