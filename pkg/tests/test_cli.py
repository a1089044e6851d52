import json
from pathlib import Path

import pytest

from maintcast import cli
from maintcast.config import load_config, validate_config
from maintcast.errors import UsageError


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def last_json(out):
    lines = [line for line in out.strip().splitlines() if line.startswith("{")]
    return json.loads(lines[-1])


@pytest.fixture
def synth_dir(tmp_path, capsys):
    out = tmp_path / "corpus"
    code, stdout, _ = run(capsys, "synth", "--preset", "smoke", "--out", str(out),
                          "--days", "400", "--seed", "3")
    assert code == 0
    return Path(last_json(stdout)["config_path"]).parent


def write_config(path, body):
    path.write_text(body, encoding="utf-8")
    return str(path)


def test_unknown_subcommand(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 1
    assert "usage" in err.lower()


def test_no_subcommand(capsys):
    code, _, err = run(capsys)
    assert code == 1


def test_missing_config(capsys):
    code, _, err = run(capsys, "reconstruct")
    assert code == 1
    assert "--config" in err


def test_synth_writes_corpus(synth_dir):
    assert (synth_dir / "events.jsonl").exists()
    assert (synth_dir / "repos.jsonl").exists()
    assert (synth_dir / "maintcast.ini").exists()


def test_ingest_check(synth_dir, capsys):
    code, out, _ = run(capsys, "--config", str(synth_dir / "maintcast.ini"), "ingest-check")
    assert code == 0
    payload = last_json(out)
    assert payload["repos"] == 5
    assert payload["events"] > 0


def test_reconstruct_scores(synth_dir, capsys):
    code, out, _ = run(capsys, "--config", str(synth_dir / "maintcast.ini"), "reconstruct")
    assert code == 0
    scores = Path(last_json(out)["scores"])
    lines = scores.read_text().splitlines()
    assert lines[0] == "repo,date,commit_sum,issue_sum,gate,score"
    # the level-10 repo scores 10 on every gated day
    ten_rows = [l.split(",") for l in lines[1:] if l.startswith("steady-high,")]
    gated = [r for r in ten_rows if r[4] == "1"]
    assert gated and all(r[5] == "10" for r in gated)


def test_targets_subcommand(synth_dir, capsys):
    code, out, _ = run(capsys, "--config", str(synth_dir / "maintcast.ini"), "targets")
    assert code == 0
    payload = last_json(out)
    assert Path(payload["targets"]).exists()


def test_analyze_subcommand(synth_dir, capsys):
    code, out, _ = run(capsys, "--config", str(synth_dir / "maintcast.ini"), "analyze")
    assert code == 0
    payload = last_json(out)
    assert Path(payload["interval_stats"]).exists()


def test_rank_subcommand(tmp_path, capsys):
    deps = tmp_path / "deps.csv"
    deps.write_text("dependent,dependency\napp,lib\nplugin,lib\n", encoding="utf-8")
    libmap = tmp_path / "libmap.csv"
    libmap.write_text("library,repo\nlib,org/lib\napp,org/app\nplugin,\n", encoding="utf-8")
    cfg = write_config(tmp_path / "cfg.ini", f"""
[paths]
dependencies = {deps}
library_map = {libmap}
output_dir = {tmp_path / 'out'}

[selection]
fraction = 0.5
""")
    code, out, _ = run(capsys, "--config", cfg, "rank")
    assert code == 0
    selection = Path(last_json(out)["selection"])
    rows = selection.read_text().splitlines()
    assert rows[0] == "rank,library,repo,pagerank"
    assert rows[1].split(",")[1] == "lib"  # both dependents point at lib


def test_evaluate_and_report(synth_dir, capsys):
    ini = synth_dir / "maintcast.ini"
    body = ini.read_text() + (
        "\n[grid]\n"
        "tasks = bucket\n"
        "models = varma\n"
        "windows = 3\n"
        "horizons = 1\n"
        "shifts = 2\n"
        "seed = 3\n"
    )
    # configparser forbids duplicate sections; rewrite cleanly
    body = body.replace("[grid]\nseed = 3\n\n", "", 1)
    cfg = write_config(synth_dir / "eval.ini", body)

    code, out, _ = run(capsys, "--config", cfg, "--jobs", "2", "evaluate")
    assert code == 0
    payload = last_json(out)
    assert payload["records"] == 4  # 2 cells x (varma + majority)
    records_csv = Path(payload["records_csv"])
    lines = records_csv.read_text().splitlines()
    assert lines[0].startswith("# maintcast")
    assert lines[1] == "task,model,window,horizon,shift,n_test,accuracy,mae,r2,macro_f1,seed"
    assert len(lines) == 2 + 4

    code, out, _ = run(capsys, "--config", cfg, "report")
    assert code == 0
    payload = last_json(out)
    summary = Path(payload["summary_csv"])
    assert summary.exists()
    header = summary.read_text().splitlines()[1]
    assert header == "task,model,mean,median,q1,q3,iqr,min,max,n_cells"
    assert Path(payload["boxplots"]).exists()
    assert all(Path(p).exists() for p in payload["heatmaps"])


def test_evaluate_with_dependency_selection(synth_dir, capsys):
    # map two libraries onto synth repos; selection keeps the top half -> the
    # grid runs on a single repository
    deps = synth_dir / "deps.csv"
    deps.write_text("dependent,dependency\nsteady-mid-lib,steady-high-lib\n", encoding="utf-8")
    libmap = synth_dir / "libmap.csv"
    libmap.write_text("library,repo\nsteady-high-lib,steady-high\nsteady-mid-lib,steady-mid\n",
                      encoding="utf-8")
    body = (synth_dir / "maintcast.ini").read_text()
    body = body.replace("[paths]", f"[paths]\ndependencies = {deps}\nlibrary_map = {libmap}")
    body += ("tasks = bucket\nmodels = varma\nwindows = 3\nhorizons = 1\nshifts = 2\n"
             "\n[selection]\nfraction = 0.5\n")
    cfg = write_config(synth_dir / "sel.ini", body)
    code, out, _ = run(capsys, "--config", cfg, "evaluate")
    assert code == 0
    payload = last_json(out)
    assert payload["repos"] == 1  # only the higher-ranked library's repo survives
    assert payload["records"] == 4


def test_report_without_records_is_data_error(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.ini", f"[paths]\noutput_dir = {tmp_path / 'empty'}\n")
    code, _, err = run(capsys, "--config", cfg, "report")
    assert code == 2


def test_validate_config_collects_all_problems(tmp_path):
    cfg = load_config(write_config(tmp_path / "bad.ini", """
[grid]
windows = 2,13
horizons = 7
shifts = 0
"""))
    problems = validate_config(cfg)
    assert any("window 2" in p for p in problems)
    assert any("window 13" in p for p in problems)
    assert any("horizon 7" in p for p in problems)
    assert any("shifts" in p for p in problems)
    assert len(problems) >= 4


def test_validate_config_ok(tmp_path):
    cfg = load_config(write_config(tmp_path / "ok.ini", """
[grid]
windows = 3,6
horizons = 1,2
shifts = 2
"""))
    assert validate_config(cfg) == []


def test_unparseable_config(tmp_path):
    with pytest.raises(UsageError):
        load_config(write_config(tmp_path / "broken.ini", "not an ini file [[["))


def test_bad_config_is_usage_error(tmp_path, capsys):
    cfg = write_config(tmp_path / "bad.ini", "[grid]\nwindows = 13\n")
    code, _, err = run(capsys, "--config", cfg, "reconstruct")
    assert code == 1
    assert "window 13" in err


def test_data_error_exit_code(tmp_path, capsys):
    events = tmp_path / "events.jsonl"
    events.write_text("this is not json\n", encoding="utf-8")
    metas = tmp_path / "repos.jsonl"
    metas.write_text('{"repo":"r","url":"u","created":"2020-01-01"}\n', encoding="utf-8")
    cfg = write_config(tmp_path / "cfg.ini", f"""
[paths]
events = {events}
metadata = {metas}
output_dir = {tmp_path / 'out'}

[period]
start = 2021-01-01
end = 2021-12-31
""")
    code, _, err = run(capsys, "--config", cfg, "reconstruct")
    assert code == 2
    assert "data error" in err
