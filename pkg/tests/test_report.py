import numpy as np
import pytest

from maintcast import report
from maintcast.evalgrid import EvaluationRecord, aggregate
from maintcast.labels import label_space
from maintcast.targets import Representation


def record(task="bucket", model="varma", window=3, horizon=1, shift=0, acc=0.9):
    labels = label_space(Representation(task))
    n = len(labels)
    conf = np.zeros((n, n), dtype=np.int64)
    conf[0, 0] = 9
    conf[1, 0] = 1
    return EvaluationRecord(
        task=task, model=model, window=window, horizon=horizon, shift=shift,
        n_test=10, accuracy=acc, mae=0.12, r2=0.5, macro_f1=0.6, seed=42,
        confusion=conf, labels=labels,
    )


def test_records_csv_round_trip(tmp_path):
    records = [record(shift=s, acc=0.5 + 0.1 * s) for s in range(3)]
    path = tmp_path / "records.csv"
    report.write_records_csv(records, path, config_hash="cafe12")
    text = path.read_text()
    assert text.startswith("# maintcast 0.1.0 config=cafe12\n")
    assert "\r" not in text
    loaded = report.read_records_csv(path)
    assert len(loaded) == 3
    for orig, back in zip(records, loaded):
        assert back.accuracy == orig.accuracy
        assert back.seed == orig.seed
        assert back.mae == orig.mae


def test_records_csv_byte_stable(tmp_path):
    records = [record(acc=1 / 3)]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    report.write_records_csv(records, p1, "x")
    report.write_records_csv(records, p2, "x")
    assert p1.read_bytes() == p2.read_bytes()
    assert repr(1 / 3) in p1.read_text()  # shortest round-trip float text


def test_summary_csv(tmp_path):
    summaries = aggregate([record(acc=0.2), record(shift=1, acc=0.4)])
    path = tmp_path / "summary.csv"
    report.write_summary_csv(summaries, path, "beef")
    lines = path.read_text().splitlines()
    assert lines[1] == report.SUMMARY_COLUMNS
    row = lines[2].split(",")
    assert row[0] == "bucket" and row[1] == "varma"
    assert float(row[2]) == pytest.approx(0.3)


def test_confusion_csvs_and_rownorm(tmp_path):
    records = [record(), record(shift=1)]
    written = report.write_confusion_csvs(records, tmp_path)
    assert len(written) == 2
    names, conf = report.read_confusion_csv(tmp_path / "confusion_bucket_varma.csv")
    assert names == ["low", "moderate", "high"]
    assert conf[0, 0] == 18  # summed over the two cells
    norm_lines = (tmp_path / "confusion_bucket_varma_rownorm.csv").read_text().splitlines()
    assert norm_lines[1].split(",")[1] == "1.0"


def test_confusion_label_names_per_task(tmp_path):
    for task, first in (("raw", "0"), ("bucket", "low"), ("trend", "downward"),
                        ("slope", repr(-10.0))):
        labels = label_space(Representation(task))
        n = len(labels)
        rec = record(task=task)
        rec.confusion = np.eye(n, dtype=np.int64)
        rec.labels = labels
        report.write_confusion_csvs([rec], tmp_path)
        header = (tmp_path / f"confusion_{task}_varma.csv").read_text().splitlines()[0]
        assert header.split(",")[1] == first


def test_boxplot_rendering(tmp_path):
    records = [record(task=t, model=m, shift=s, acc=0.5 + 0.05 * s)
               for t in ("raw", "bucket") for m in ("varma", "forest") for s in range(4)]
    out = tmp_path / "box.svg"
    report.render_accuracy_boxplots(records, out)
    assert out.exists() and out.stat().st_size > 0
    assert b"<svg" in out.read_bytes()[:500]


def test_heatmaps_from_csvs(tmp_path):
    report.write_confusion_csvs([record()], tmp_path)
    written = report.render_heatmaps_from_csvs(tmp_path)
    assert written and all(p.endswith(".svg") for p in written)


def test_fmt_shortest_roundtrip():
    assert report.fmt(0.1) == "0.1"
    assert report.fmt(1 / 3) == "0.3333333333333333"
    assert report.fmt(7) == "7"
    assert float(report.fmt(0.30000000000000004)) == 0.30000000000000004
