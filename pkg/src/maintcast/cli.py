"""Command-line entry point wiring the pipeline stages.

Subcommands: ingest-check, reconstruct, rank, analyze, targets, evaluate,
synth, report. Each reads its declared inputs, writes its outputs atomically,
and prints one machine-readable JSON summary line. Exit codes: 0 success,
1 usage, 2 data error, 3 internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import date
from pathlib import Path

from . import analytics, depgraph, evalgrid, ingest, report, scorecard, synth, targets
from .config import RunConfig, load_config, validate_config
from .errors import DataError, InvariantError, MaintcastError, UsageError
from .evalgrid import GridSpec
from .targets import Representation


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="maintcast", description=__doc__)
    parser.add_argument("--config", help="path to the INI run configuration")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker threads for the evaluation grid")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    sub.add_parser("ingest-check", help="validate event and metadata files")
    sub.add_parser("reconstruct", help="rebuild daily scores and export them")
    sub.add_parser("rank", help="rank libraries and select the top fraction")
    sub.add_parser("analyze", help="activity-gap and contributor-stability tables")
    sub.add_parser("targets", help="export monthly targets in all four representations")
    sub.add_parser("evaluate", help="run the full forecasting grid")
    sub.add_parser("report", help="render summary, confusion files, and figures")

    p_synth = sub.add_parser("synth", help="generate a synthetic corpus")
    p_synth.add_argument("--preset", choices=("smoke", "benchmark"), default="smoke")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--days", type=int, default=1095)
    p_synth.add_argument("--start", default="2021-01-01", help="corpus start date (ISO)")
    return parser


def _load_required_config(args) -> RunConfig:
    if not args.config:
        raise UsageError("this subcommand requires --config")
    cfg = load_config(args.config)
    problems = validate_config(cfg)
    if problems:
        raise UsageError("config problems: " + "; ".join(problems))
    return cfg


def _require_corpus(cfg: RunConfig):
    problems = validate_config(cfg, require_inputs=True)
    if problems:
        raise UsageError("config problems: " + "; ".join(problems))
    if not cfg.period_start or not cfg.period_end:
        raise UsageError("config must set [period] start and end")
    return ingest.load_corpus(cfg.events_path, cfg.metadata_path, cfg.period_start, cfg.period_end)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _atomic(path: Path, write_fn) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _grid_spec(cfg: RunConfig) -> GridSpec:
    return GridSpec(
        tasks=tuple(Representation(t) for t in cfg.tasks),
        models=tuple(m for m in cfg.models if m != "majority"),
        windows=cfg.windows,
        horizons=cfg.horizons,
        shifts=cfg.shifts,
        seed=cfg.seed,
        epsilon=cfg.epsilon,
        slope_step=cfg.slope_step,
        forest_aggregate="median" if cfg.forest_median else "mean",
    )


def _selected_repo_ids(cfg: RunConfig):
    snapshot = ingest.read_dependency_snapshot(cfg.dependencies_path, cfg.library_map_path)
    graph = depgraph.build_dependency_graph(snapshot, reverse_edges=cfg.reverse_pagerank_edges)
    graph = depgraph.pagerank(graph, cfg.pagerank_damping, cfg.pagerank_tol, cfg.pagerank_max_iter)
    selection = depgraph.select_top_fraction(graph, snapshot, cfg.selection_fraction)
    return selection, graph


def cmd_ingest_check(args) -> int:
    cfg = _load_required_config(args)
    corpus = _require_corpus(cfg)
    n_events = sum(len(evs) for _, evs in corpus.repos.values())
    payload = {
        "subcommand": "ingest-check", "status": "ok",
        "repos": len(corpus.repos), "events": n_events,
        "dropped_events": corpus.dropped_events,
    }
    if cfg.dependencies_path:
        snapshot = ingest.read_dependency_snapshot(cfg.dependencies_path, cfg.library_map_path)
        payload["dependency_edges"] = len(snapshot.edges)
        payload["self_edge_warnings"] = snapshot.self_edge_warnings
    _emit(payload)
    return 0


def cmd_reconstruct(args) -> int:
    cfg = _load_required_config(args)
    corpus = _require_corpus(cfg)
    scored = scorecard.score_corpus(corpus, boundary_inclusive=cfg.gate_boundary_inclusive)
    out = _outdir(cfg) / "scores.csv"
    _atomic(out, lambda p: scorecard.write_score_export(scored, p))
    _emit({"subcommand": "reconstruct", "status": "ok", "repos": len(scored), "scores": str(out)})
    return 0


def cmd_rank(args) -> int:
    cfg = _load_required_config(args)
    if not cfg.dependencies_path or not Path(cfg.dependencies_path).exists():
        raise UsageError("rank requires [paths] dependencies")
    selection, graph = _selected_repo_ids(cfg)
    out = _outdir(cfg) / "selection.csv"
    _atomic(out, lambda p: depgraph.write_selection(selection, p))
    _emit({
        "subcommand": "rank", "status": "ok", "libraries": len(graph.nodes),
        "selected": len(selection.selected), "excluded_no_repo": selection.excluded_no_repo,
        "converged": graph.converged, "selection": str(out),
    })
    return 0


def cmd_analyze(args) -> int:
    cfg = _load_required_config(args)
    corpus = _require_corpus(cfg)
    years = list(range(corpus.period_start.year, corpus.period_end.year + 1))
    intervals = [analytics.mean_interactivity_days(corpus, year) for year in years]
    outdir = _outdir(cfg)
    interval_path = outdir / "interval_stats.csv"
    _atomic(interval_path, lambda p: analytics.write_interval_report(intervals, p))
    payload = {"subcommand": "analyze", "status": "ok", "years": years,
               "interval_stats": str(interval_path)}
    try:
        stability = [analytics.contributor_stability(corpus, year) for year in years]
        stability_path = outdir / "stability_stats.csv"
        _atomic(stability_path, lambda p: analytics.write_stability_report(stability, p))
        payload["stability_stats"] = str(stability_path)
    except MaintcastError as exc:
        payload["stability_stats"] = None
        payload["stability_skipped"] = str(exc)
    _emit(payload)
    return 0


def _monthly_filtered(cfg: RunConfig, corpus):
    scored = scorecard.score_corpus(corpus, boundary_inclusive=cfg.gate_boundary_inclusive)
    monthly = targets.monthly_aggregate_corpus(scored, calendar_months=cfg.calendar_months)
    raw = {repo_id: targets.raw_series(points) for repo_id, points in monthly.items()}
    kept, removed = targets.filter_constant_extremes(raw)
    monthly = {repo_id: monthly[repo_id] for repo_id in sorted(kept)}
    return monthly, removed


def cmd_targets(args) -> int:
    cfg = _load_required_config(args)
    corpus = _require_corpus(cfg)
    monthly, removed = _monthly_filtered(cfg, corpus)
    out = _outdir(cfg) / "targets.csv"
    _atomic(out, lambda p: targets.write_target_export(monthly, cfg.epsilon, p))
    _emit({
        "subcommand": "targets", "status": "ok", "repos": len(monthly),
        "removed_constant_extremes": removed, "epsilon": cfg.epsilon, "targets": str(out),
    })
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load_required_config(args)
    corpus = _require_corpus(cfg)
    if cfg.dependencies_path and Path(cfg.dependencies_path).exists():
        selection, _ = _selected_repo_ids(cfg)
        wanted = {repo for _, repo, _ in selection.selected if repo}
        corpus.repos = {rid: v for rid, v in corpus.repos.items() if rid in wanted}
    monthly, removed = _monthly_filtered(cfg, corpus)
    spec = _grid_spec(cfg)
    result = evalgrid.run_grid(spec, monthly, jobs=max(1, args.jobs))
    outdir = _outdir(cfg)
    records_path = outdir / "records.csv"
    _atomic(records_path, lambda p: report.write_records_csv(result.records, p, cfg.config_hash))
    confusion_files = report.write_confusion_csvs(result.records, outdir, cfg.slope_step)
    _emit({
        "subcommand": "evaluate", "status": "ok",
        "repos": len(monthly), "removed_constant_extremes": removed,
        "records": len(result.records), "skipped_cells": len(result.skipped),
        "records_csv": str(records_path), "confusion_files": confusion_files,
    })
    return 0


def cmd_synth(args) -> int:
    start = date.fromisoformat(args.start)
    if args.preset == "benchmark":
        specs = synth.benchmark_specs(start, args.days, seed=args.seed)
    else:
        specs = synth.smoke_specs(start, n_days=args.days, seed=args.seed)
    corpus = synth.generate_corpus(specs)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    events_path = outdir / "events.jsonl"
    metadata_path = outdir / "repos.jsonl"
    all_events = [ev for _, evs in corpus.repos.values() for ev in evs]
    metas = {rid: meta for rid, (meta, _) in corpus.repos.items()}
    _atomic(events_path, lambda p: ingest.write_event_log(all_events, p))
    _atomic(metadata_path, lambda p: ingest.write_repo_metadata(metas, p))
    config_path = outdir / "maintcast.ini"
    config_path.write_text(
        "[paths]\n"
        f"events = {events_path}\n"
        f"metadata = {metadata_path}\n"
        f"output_dir = {outdir / 'out'}\n\n"
        "[period]\n"
        f"start = {corpus.period_start.isoformat()}\n"
        f"end = {corpus.period_end.isoformat()}\n\n"
        "[grid]\n"
        f"seed = {args.seed}\n",
        encoding="utf-8",
    )
    _emit({
        "subcommand": "synth", "status": "ok", "preset": args.preset,
        "repos": len(corpus.repos), "events": len(all_events),
        "events_path": str(events_path), "metadata_path": str(metadata_path),
        "config_path": str(config_path),
        "period": [corpus.period_start.isoformat(), corpus.period_end.isoformat()],
    })
    return 0


def cmd_report(args) -> int:
    cfg = _load_required_config(args)
    outdir = _outdir(cfg)
    records_path = outdir / "records.csv"
    if not records_path.exists():
        raise DataError(f"no records.csv in {outdir}; run `evaluate` first")
    records = report.read_records_csv(records_path)
    summary_path = outdir / "summary.csv"
    _atomic(summary_path, lambda p: report.write_summary_from_records(records, p, cfg.config_hash))
    boxplot_path = outdir / "accuracy_boxplots.svg"
    report.render_accuracy_boxplots(records, boxplot_path)
    heatmaps = report.render_heatmaps_from_csvs(outdir)
    _emit({
        "subcommand": "report", "status": "ok", "records": len(records),
        "summary_csv": str(summary_path), "boxplots": str(boxplot_path),
        "heatmaps": heatmaps,
    })
    return 0


_HANDLERS = {
    "ingest-check": cmd_ingest_check,
    "reconstruct": cmd_reconstruct,
    "rank": cmd_rank,
    "analyze": cmd_analyze,
    "targets": cmd_targets,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.subcommand:
            raise UsageError(parser.format_usage())
        return _HANDLERS[args.subcommand](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return 3
    except MaintcastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # anything unexpected is an internal failure
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


def entrypoint():  # pragma: no cover
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entrypoint()
