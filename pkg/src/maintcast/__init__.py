"""Maintenance-score reconstruction and forecasting benchmark toolkit."""

__version__ = "0.1.0"

from .events import ActivityEvent, AuthorRole, Corpus, DependencySnapshot, EventKind, RepoMetadata
from .targets import Bucket, Representation, TrendType

__all__ = [
    "ActivityEvent",
    "AuthorRole",
    "Bucket",
    "Corpus",
    "DependencySnapshot",
    "EventKind",
    "RepoMetadata",
    "Representation",
    "TrendType",
    "__version__",
]
