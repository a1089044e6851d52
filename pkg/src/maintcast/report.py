"""Delimited reports and figure rendering.

CSV files are the authoritative outputs: LF endings, shortest round-trip
float formatting, canonical row order, and a provenance comment carrying the
tool version and config hash, so identical inputs produce identical bytes.
Figures (accuracy boxplots per task, confusion heatmaps) are conveniences
rendered next to the data files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import DataError
from .evalgrid import AggregateSummary, EvaluationRecord, aggregate, row_normalized
from .labels import label_space
from .targets import BUCKET_NAMES, TREND_NAMES, Representation

TOOL_VERSION = "0.1.0"

RECORD_COLUMNS = "task,model,window,horizon,shift,n_test,accuracy,mae,r2,macro_f1,seed"
SUMMARY_COLUMNS = "task,model,mean,median,q1,q3,iqr,min,max,n_cells"


def provenance_line(config_hash: str) -> str:
    return f"# maintcast {TOOL_VERSION} config={config_hash}"


def fmt(x) -> str:
    """Shortest round-trip decimal for floats, plain text otherwise."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_records_csv(records: list[EvaluationRecord], path, config_hash: str = "none") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(provenance_line(config_hash) + "\n")
        fh.write(RECORD_COLUMNS + "\n")
        for r in records:
            fh.write(",".join([
                r.task, r.model, str(r.window), str(r.horizon), str(r.shift), str(r.n_test),
                fmt(r.accuracy), fmt(r.mae), fmt(r.r2), fmt(r.macro_f1), str(r.seed),
            ]) + "\n")


def read_records_csv(path) -> list[EvaluationRecord]:
    """Re-load the scalar record fields (confusions live in their own files)."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#") or line == RECORD_COLUMNS:
                continue
            parts = line.split(",")
            if len(parts) != 11:
                raise DataError(f"bad records row: {line!r}")
            records.append(EvaluationRecord(
                task=parts[0], model=parts[1], window=int(parts[2]), horizon=int(parts[3]),
                shift=int(parts[4]), n_test=int(parts[5]), accuracy=float(parts[6]),
                mae=float(parts[7]), r2=float(parts[8]), macro_f1=float(parts[9]),
                seed=int(parts[10]), confusion=np.zeros((0, 0), dtype=np.int64),
                labels=np.zeros(0),
            ))
    return records


def write_summary_csv(summaries: list[AggregateSummary], path, config_hash: str = "none") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(provenance_line(config_hash) + "\n")
        fh.write(SUMMARY_COLUMNS + "\n")
        for s in summaries:
            fh.write(",".join([
                s.task, s.model, fmt(s.mean), fmt(s.median), fmt(s.q1), fmt(s.q3),
                fmt(s.iqr), fmt(s.min), fmt(s.max), str(s.n_cells),
            ]) + "\n")


def _label_names(task: str, slope_step: float) -> list[str]:
    if task == Representation.BUCKET.value:
        return list(BUCKET_NAMES)
    if task == Representation.TREND.value:
        return list(TREND_NAMES)
    space = label_space(Representation(task), slope_step)
    if task == Representation.RAW.value:
        return [str(int(v)) for v in space]
    return [repr(float(v)) for v in space]


def aggregate_confusions(records: list[EvaluationRecord]) -> dict[tuple, np.ndarray]:
    """Sum per-cell confusion counts into one matrix per (task, model)."""
    out: dict[tuple, np.ndarray] = {}
    for r in records:
        if r.confusion.size == 0:
            continue
        key = (r.task, r.model)
        if key in out:
            out[key] = out[key] + r.confusion
        else:
            out[key] = r.confusion.copy()
    return out


def write_confusion_csvs(records: list[EvaluationRecord], outdir, slope_step: float = 1.0) -> list[str]:
    outdir = Path(outdir)
    written = []
    for (task, model), conf in sorted(aggregate_confusions(records).items()):
        names = _label_names(task, slope_step)
        path = outdir / f"confusion_{task}_{model}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("label," + ",".join(names) + "\n")
            for i, name in enumerate(names):
                fh.write(name + "," + ",".join(str(int(v)) for v in conf[i]) + "\n")
        norm_path = outdir / f"confusion_{task}_{model}_rownorm.csv"
        norm = row_normalized(conf)
        with open(norm_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("label," + ",".join(names) + "\n")
            for i, name in enumerate(names):
                fh.write(name + "," + ",".join(fmt(float(v)) for v in norm[i]) + "\n")
        written.extend([str(path), str(norm_path)])
    return written


def render_accuracy_boxplots(records: list[EvaluationRecord], path) -> None:
    """One column of boxplots per task, one box per model, over cell accuracies."""
    tasks = sorted({r.task for r in records})
    if not tasks:
        return
    fig, axes = plt.subplots(1, len(tasks), figsize=(3.2 * len(tasks), 4.0), sharey=True)
    if len(tasks) == 1:
        axes = [axes]
    for ax, task in zip(axes, tasks):
        models = sorted({r.model for r in records if r.task == task})
        data = [[r.accuracy for r in records if r.task == task and r.model == m] for m in models]
        ax.boxplot(data, tick_labels=models)
        ax.set_title(task)
        ax.set_ylim(0.0, 1.05)
        ax.tick_params(axis="x", rotation=45)
    axes[0].set_ylabel("accuracy")
    fig.suptitle("Accuracy across windows, horizons, and shifts")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _render_heatmap(task: str, model: str, names: list[str], conf: np.ndarray, path) -> None:
    norm = row_normalized(conf)
    fig, ax = plt.subplots(figsize=(1.0 + 0.5 * len(names), 1.0 + 0.5 * len(names)))
    im = ax.imshow(norm, cmap="Blues", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(names)), labels=names, rotation=45, ha="right")
    ax.set_yticks(range(len(names)), labels=names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(f"{task} / {model}")
    if len(names) <= 12:
        for i in range(len(names)):
            for j in range(len(names)):
                ax.text(j, i, f"{norm[i, j]:.2f}", ha="center", va="center",
                        color="white" if norm[i, j] > 0.5 else "black", fontsize=7)
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_confusion_heatmaps(records: list[EvaluationRecord], outdir,
                              slope_step: float = 1.0) -> list[str]:
    outdir = Path(outdir)
    written = []
    for (task, model), conf in sorted(aggregate_confusions(records).items()):
        names = _label_names(task, slope_step)
        path = outdir / f"confusion_{task}_{model}.svg"
        _render_heatmap(task, model, names, conf, path)
        written.append(str(path))
    return written


def read_confusion_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        names = header[1:]
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(names) + 1:
                raise DataError(f"bad confusion row in {path}: {line!r}")
            rows.append([int(v) for v in parts[1:]])
    return names, np.asarray(rows, dtype=np.int64)


def render_heatmaps_from_csvs(outdir) -> list[str]:
    """Render one heatmap per confusion_<task>_<model>.csv found in the directory."""
    outdir = Path(outdir)
    written = []
    for csv_path in sorted(outdir.glob("confusion_*_*.csv")):
        if csv_path.stem.endswith("_rownorm"):
            continue
        parts = csv_path.stem.split("_")
        task, model = parts[1], parts[2]
        names, conf = read_confusion_csv(csv_path)
        path = outdir / f"confusion_{task}_{model}.svg"
        _render_heatmap(task, model, names, conf, path)
        written.append(str(path))
    return written


def write_summary_from_records(records: list[EvaluationRecord], path, config_hash: str = "none") -> None:
    write_summary_csv(aggregate(records), path, config_hash)
