"""Run configuration: one declarative INI file drives the whole pipeline.

Flags given on the command line override file values; the only environment
variable ever consulted is the fetch token (its name is itself configured).
Validation returns every problem rather than stopping at the first.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Optional

from .errors import UsageError
from .targets import Representation

TASK_NAMES = {r.value: r for r in Representation}
MODEL_NAMES = ("majority", "varma", "forest", "lstm")


@dataclass
class RunConfig:
    events_path: Optional[str] = None
    metadata_path: Optional[str] = None
    dependencies_path: Optional[str] = None
    library_map_path: Optional[str] = None
    output_dir: str = "out"

    period_start: Optional[date] = None
    period_end: Optional[date] = None

    selection_fraction: float = 0.01

    tasks: tuple = tuple(TASK_NAMES)
    models: tuple = ("varma", "forest", "lstm")
    windows: tuple = tuple(range(3, 13))
    horizons: tuple = tuple(range(1, 7))
    shifts: int = 12
    seed: int = 0

    epsilon: float = 0.5
    slope_step: float = 1.0

    gate_boundary_inclusive: bool = True
    calendar_months: bool = False
    forest_median: bool = False
    reverse_pagerank_edges: bool = False

    pagerank_damping: float = 0.85
    pagerank_tol: float = 1e-8
    pagerank_max_iter: int = 100

    fetch_endpoint: str = ""
    fetch_token_env: str = "MAINTCAST_TOKEN"
    fetch_request_budget: int = 20

    config_hash: str = "none"
    source_path: Optional[str] = None

    def validate(self, require_inputs: bool = False) -> list[str]:
        """Every violation, not just the first."""
        problems = []
        for w in self.windows:
            if not 3 <= w <= 12:
                problems.append(f"window {w} outside 3..12")
        for h in self.horizons:
            if not 1 <= h <= 6:
                problems.append(f"horizon {h} outside 1..6")
        if self.shifts < 1:
            problems.append("shifts must be >= 1")
        for t in self.tasks:
            if t not in TASK_NAMES:
                problems.append(f"unknown task {t!r}")
        for m in self.models:
            if m not in MODEL_NAMES:
                problems.append(f"unknown model {m!r}")
        if not 0.0 < self.selection_fraction <= 1.0:
            problems.append("selection fraction outside (0, 1]")
        if self.epsilon < 0:
            problems.append("epsilon must be >= 0")
        if self.slope_step <= 0:
            problems.append("slope step must be > 0")
        if not 0.0 < self.pagerank_damping < 1.0:
            problems.append("pagerank damping outside (0, 1)")
        if self.period_start and self.period_end and self.period_start > self.period_end:
            problems.append("period start after period end")
        if require_inputs:
            for label, path in (("events", self.events_path), ("metadata", self.metadata_path)):
                if not path:
                    problems.append(f"missing {label} path")
                elif not Path(path).exists():
                    problems.append(f"{label} path does not exist: {path}")
        return problems


def _split_list(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text.decode("utf-8"))
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from None

    cfg = RunConfig(config_hash=hashlib.sha256(text).hexdigest()[:12], source_path=str(path))

    def get(section, option, fallback=None):
        return parser.get(section, option, fallback=fallback)

    cfg.events_path = get("paths", "events")
    cfg.metadata_path = get("paths", "metadata")
    cfg.dependencies_path = get("paths", "dependencies")
    cfg.library_map_path = get("paths", "library_map")
    cfg.output_dir = get("paths", "output_dir", cfg.output_dir)

    try:
        if parser.has_option("period", "start"):
            cfg.period_start = date.fromisoformat(get("period", "start"))
        if parser.has_option("period", "end"):
            cfg.period_end = date.fromisoformat(get("period", "end"))
    except ValueError as exc:
        raise UsageError(f"bad period date in config: {exc}") from None

    try:
        if parser.has_option("selection", "fraction"):
            cfg.selection_fraction = parser.getfloat("selection", "fraction")
        if parser.has_option("grid", "tasks"):
            cfg.tasks = tuple(_split_list(get("grid", "tasks")))
        if parser.has_option("grid", "models"):
            cfg.models = tuple(_split_list(get("grid", "models")))
        if parser.has_option("grid", "windows"):
            cfg.windows = tuple(int(w) for w in _split_list(get("grid", "windows")))
        if parser.has_option("grid", "horizons"):
            cfg.horizons = tuple(int(h) for h in _split_list(get("grid", "horizons")))
        if parser.has_option("grid", "shifts"):
            cfg.shifts = parser.getint("grid", "shifts")
        if parser.has_option("grid", "seed"):
            cfg.seed = parser.getint("grid", "seed")
        if parser.has_option("targets", "epsilon"):
            cfg.epsilon = parser.getfloat("targets", "epsilon")
        if parser.has_option("targets", "slope_step"):
            cfg.slope_step = parser.getfloat("targets", "slope_step")
        for flag in ("gate_boundary_inclusive", "calendar_months", "forest_median",
                     "reverse_pagerank_edges"):
            if parser.has_option("flags", flag):
                setattr(cfg, flag, parser.getboolean("flags", flag))
        if parser.has_option("pagerank", "damping"):
            cfg.pagerank_damping = parser.getfloat("pagerank", "damping")
        if parser.has_option("pagerank", "tol"):
            cfg.pagerank_tol = parser.getfloat("pagerank", "tol")
        if parser.has_option("pagerank", "max_iter"):
            cfg.pagerank_max_iter = parser.getint("pagerank", "max_iter")
        if parser.has_option("fetch", "endpoint"):
            cfg.fetch_endpoint = get("fetch", "endpoint")
        if parser.has_option("fetch", "token_env"):
            cfg.fetch_token_env = get("fetch", "token_env")
        if parser.has_option("fetch", "request_budget"):
            cfg.fetch_request_budget = parser.getint("fetch", "request_budget")
    except ValueError as exc:
        raise UsageError(f"bad value in config: {exc}") from None
    return cfg


def validate_config(cfg: RunConfig, require_inputs: bool = False) -> list[str]:
    return cfg.validate(require_inputs=require_inputs)
