import collections

import numpy as np
import pytest

from maintcast import evalgrid
from maintcast.errors import LeakageError, LengthMismatch, UnknownLabel, UsageError
from maintcast.evalgrid import (
    GridSpec,
    accuracy,
    aggregate,
    confusion_matrix,
    leakage_check,
    macro_f1,
    majority_baseline_cell,
    run_grid,
)
from maintcast.features import make_windowed_samples
from maintcast.labels import discretize, label_space
from maintcast.targets import Representation

from test_features import monthly_points, raw_targets


def grid_spec(**kw):
    defaults = dict(tasks=(Representation.BUCKET,), models=("varma",),
                    windows=(3,), horizons=(1,), shifts=2, seed=7)
    defaults.update(kw)
    return GridSpec(**defaults)


def make_monthly(n_blocks=10, repos=("a", "b", "c", "d")):
    return {r: monthly_points(r, [(i + k) % 11 for i in range(n_blocks)])
            for k, r in enumerate(repos)}


# --- discretize ------------------------------------------------------------------

@pytest.mark.parametrize("task,value,expected", [
    (Representation.RAW, 9.6, 10.0),
    (Representation.RAW, 12.3, 10.0),
    (Representation.RAW, -0.7, 0.0),
    (Representation.RAW, 4.5, 5.0),
    (Representation.BUCKET, 1.4, 1.0),
    (Representation.BUCKET, 2.9, 2.0),
    (Representation.TREND, -0.2, 0.0),
    (Representation.SLOPE, -0.4, 0.0),
    (Representation.SLOPE, 0.5, 1.0),
    (Representation.SLOPE, -11.2, -10.0),
])
def test_discretize(task, value, expected):
    out = discretize(task, np.array([value]))
    assert out[0] == expected


def test_slope_discretize_with_step():
    out = discretize(Representation.SLOPE, np.array([0.3, 0.74, -0.76]), slope_step=0.5)
    np.testing.assert_allclose(out, [0.5, 0.5, -1.0])


# --- accuracy / confusion ----------------------------------------------------------

def test_accuracy_basic():
    assert accuracy([1, 2, 3], [1, 2, 4]) == pytest.approx(2 / 3)
    assert accuracy([1, 2], [1, 2]) == 1.0
    assert accuracy([1, 2], [3, 4]) == 0.0


def test_accuracy_length_mismatch():
    with pytest.raises(LengthMismatch):
        accuracy([1], [1, 2])


def test_confusion_diagonal_on_perfect():
    labels = label_space(Representation.BUCKET)
    conf = confusion_matrix([0, 1, 2, 1], [0, 1, 2, 1], labels)
    assert np.trace(conf) == 4
    assert conf.sum() == 4


def test_confusion_counts_by_hand():
    labels = label_space(Representation.TREND)
    # preds all Stable(1), truths [Stable, Upward]
    conf = confusion_matrix([1, 1], [1, 2], labels)
    assert conf[1, 1] == 1   # true stable predicted stable
    assert conf[2, 1] == 1   # true upward predicted stable
    assert conf.sum() == 2


def test_confusion_unknown_label():
    labels = label_space(Representation.BUCKET)
    with pytest.raises(UnknownLabel):
        confusion_matrix([5], [1], labels)
    with pytest.raises(UnknownLabel):
        confusion_matrix([], [], np.array([]))


def test_macro_f1_perfect_and_empty_classes():
    labels = label_space(Representation.BUCKET)
    conf = confusion_matrix([0, 0, 1], [0, 0, 1], labels)
    # classes 0 and 1 perfect; class 2 absent scores 0
    assert macro_f1(conf) == pytest.approx((1.0 + 1.0 + 0.0) / 3)


# --- majority baseline ---------------------------------------------------------------

def test_majority_cell_modal_wins():
    label, acc, _ = majority_baseline_cell(Representation.RAW, [0, 0, 10], [0, 0])
    assert label == 0.0 and acc == 1.0


def test_majority_cell_tie_to_smaller():
    label, acc, _ = majority_baseline_cell(Representation.BUCKET, [0, 2], [2])
    assert label == 0.0 and acc == 0.0


def test_majority_cell_all_stable():
    label, acc, _ = majority_baseline_cell(Representation.TREND, [1, 1, 1], [1, 1])
    assert label == 1.0 and acc == 1.0


def test_majority_cell_matches_counter_oracle():
    rng = np.random.default_rng(5)
    for _ in range(200):
        train = rng.integers(0, 11, size=rng.integers(1, 30)).astype(float)
        test = rng.integers(0, 11, size=5).astype(float)
        label, acc, _ = majority_baseline_cell(Representation.RAW, train, test)
        counts = collections.Counter(train.tolist())
        best = min([lab for lab in counts if counts[lab] == max(counts.values())])
        assert label == best
        assert acc == pytest.approx(np.mean(test == best))


# --- leakage ----------------------------------------------------------------------------

def test_leakage_check_pass_and_fail():
    pts = make_monthly(8)
    targets = {r: raw_targets(p) for r, p in pts.items()}
    s = make_windowed_samples(pts, targets, Representation.RAW, 3, 1, (0, 4))
    assert leakage_check(s, 4)       # window [0..2] -> target 3, test at 4
    assert not leakage_check(s, 3)   # target at 3 collides with test block
    assert not leakage_check(s, 2)   # inputs reach past the test block


def test_run_grid_aborts_on_injected_leak(monkeypatch):
    monthly = make_monthly()

    real = evalgrid.make_windowed_samples

    def leaky(monthly_arg, targets_arg, task, w, h, rng):
        s = real(monthly_arg, targets_arg, task, w, h, rng)
        s.target_blocks = s.target_blocks + 100  # pretend targets sit in the future
        return s

    monkeypatch.setattr(evalgrid, "make_windowed_samples", leaky)
    with pytest.raises(LeakageError):
        run_grid(grid_spec(), monthly)


# --- grid --------------------------------------------------------------------------------

def test_grid_spec_validation():
    with pytest.raises(UsageError):
        GridSpec(windows=(13,))
    with pytest.raises(UsageError):
        GridSpec(horizons=(7,))
    with pytest.raises(UsageError):
        GridSpec(shifts=0)
    problems = GridSpec.__new__(GridSpec)
    # validate() itself lists every problem
    object.__setattr__(problems, "windows", (2, 13))
    object.__setattr__(problems, "horizons", (0,))
    object.__setattr__(problems, "shifts", 0)
    object.__setattr__(problems, "tasks", (Representation.RAW,))
    object.__setattr__(problems, "models", ("varma",))
    object.__setattr__(problems, "epsilon", 0.5)
    object.__setattr__(problems, "slope_step", 1.0)
    assert len(problems.validate()) == 4


def test_two_cell_majority_grid():
    # 6 blocks, window 3, horizon 1, 2 shifts, majority only -> exactly 2 records
    monthly = make_monthly(6)
    spec = GridSpec(tasks=(Representation.BUCKET,), models=(),
                    windows=(3,), horizons=(1,), shifts=2, seed=1)
    result = run_grid(spec, monthly)
    assert len(result.records) == 2
    assert all(r.model == "majority" for r in result.records)
    assert [r.shift for r in result.records] == [0, 1]
    assert result.skipped == []


def test_grid_single_shift_matches_manual_split():
    monthly = make_monthly(9)
    task = Representation.RAW
    spec = GridSpec(tasks=(task,), models=("varma",), windows=(4,), horizons=(2,),
                    shifts=1, seed=3)
    result = run_grid(spec, monthly)
    rec = [r for r in result.records if r.model == "varma"][0]

    # manual split: test block = 8, training targets < 8
    from maintcast.models import ModelConfig, predict, train
    from maintcast.targets import target_arrays

    targets = target_arrays(monthly, task)
    train_s = make_windowed_samples(monthly, targets, task, 4, 2, (2, 8))
    test_s = make_windowed_samples(monthly, targets, task, 4, 2, (3, 9))
    assert np.all(test_s.target_blocks == 8)
    seed = rec.seed
    model = train(ModelConfig(kind="varma", seed=seed, task=task), train_s)
    pred = discretize(task, predict(model, test_s))
    true = discretize(task, test_s.targets)
    assert rec.accuracy == pytest.approx(float(np.mean(pred == true)))


def test_insufficient_history_skipped():
    monthly = make_monthly(4)
    spec = GridSpec(tasks=(Representation.RAW,), models=(), windows=(12,),
                    horizons=(1,), shifts=2, seed=0)
    result = run_grid(spec, monthly)
    assert result.records == []
    assert len(result.skipped) == 2


def test_baseline_rows_exist_for_every_model_cell():
    monthly = make_monthly(8)
    spec = grid_spec(models=("forest",), shifts=2)
    result = run_grid(spec, monthly)
    cells = {(r.window, r.horizon, r.shift) for r in result.records if r.model == "forest"}
    baseline_cells = {(r.window, r.horizon, r.shift) for r in result.records if r.model == "majority"}
    assert cells == baseline_cells
    assert len(result.records) == 2 * len(cells)


def test_grid_deterministic_across_jobs():
    monthly = make_monthly(10)
    spec = GridSpec(tasks=(Representation.BUCKET, Representation.TREND),
                    models=("varma", "forest", "lstm"),
                    windows=(3, 4), horizons=(1, 2), shifts=2, seed=5)
    r1 = run_grid(spec, monthly, jobs=1)
    r8 = run_grid(spec, monthly, jobs=8)
    assert len(r1.records) == len(r8.records)
    for a, b in zip(r1.records, r8.records):
        assert a.sort_key() == b.sort_key()
        assert a.accuracy == b.accuracy
        assert a.mae == b.mae
        np.testing.assert_array_equal(a.confusion, b.confusion)


def test_short_repo_does_not_sink_slope_grid():
    monthly = make_monthly(9)
    monthly["stub"] = monthly["a"][:1]  # one block only
    spec = GridSpec(tasks=(Representation.SLOPE,), models=(), windows=(3,),
                    horizons=(1,), shifts=2, seed=0)
    result = run_grid(spec, monthly)
    assert len(result.records) == 2
    assert all(r.n_test == 4 for r in result.records)  # stub contributes nothing


def test_slope_grid_with_lstm_chain():
    monthly = make_monthly(12)
    spec = GridSpec(tasks=(Representation.SLOPE,), models=("lstm",), windows=(3,),
                    horizons=(1,), shifts=3, seed=2)
    result = run_grid(spec, monthly)
    lstm_records = [r for r in result.records if r.model == "lstm"]
    assert len(lstm_records) == 3
    assert all(0.0 <= r.accuracy <= 1.0 for r in lstm_records)


def test_slope_task_consumes_extra_block():
    # raw series of B blocks -> slope series of B-1; window+horizon+shifts == B-1 fits
    monthly = make_monthly(7)
    spec = GridSpec(tasks=(Representation.SLOPE,), models=(), windows=(3,),
                    horizons=(1,), shifts=2, seed=0)
    result = run_grid(spec, monthly)
    assert len(result.records) == 2
    # with only 6 raw blocks the slope series is too short for both shifts
    short = make_monthly(6)
    result = run_grid(spec, short)
    assert len(result.records) == 1 and len(result.skipped) == 1


def test_record_confusion_consistency():
    monthly = make_monthly(8)
    result = run_grid(grid_spec(shifts=2), monthly)
    for rec in result.records:
        assert rec.confusion.sum() == rec.n_test
        assert np.trace(rec.confusion) == round(rec.accuracy * rec.n_test)


def test_capture_predictions():
    monthly = make_monthly(8)
    result = run_grid(grid_spec(shifts=1), monthly, capture_predictions=True)
    assert len(result.predictions) == len(result.records)
    cap = result.predictions[0]
    assert len(cap.repo_ids) == cap.record.n_test
    assert cap.pred_labels.shape == cap.true_labels.shape


# --- aggregate -----------------------------------------------------------------------------

def rec(task, model, acc):
    return evalgrid.EvaluationRecord(
        task=task, model=model, window=3, horizon=1, shift=0, n_test=10,
        accuracy=acc, mae=0.0, r2=1.0, macro_f1=1.0, seed=0,
        confusion=np.zeros((2, 2), dtype=np.int64), labels=np.arange(2),
    )


def test_aggregate_single_record():
    out = aggregate([rec("raw", "varma", 0.8)])
    assert out[0].mean == 0.8 and out[0].iqr == 0.0 and out[0].n_cells == 1


def test_aggregate_mean_of_extremes():
    out = aggregate([rec("raw", "varma", 0.0), rec("raw", "varma", 1.0)])
    assert out[0].mean == 0.5


def test_aggregate_linear_interpolation_quartiles():
    records = [rec("raw", "varma", v) for v in (0.1, 0.2, 0.3, 0.4)]
    out = aggregate(records)[0]
    assert out.q1 == pytest.approx(0.175)
    assert out.q3 == pytest.approx(0.325)
    assert out.iqr == pytest.approx(0.15)


def test_aggregate_groups_sorted():
    records = [rec("raw", "varma", 0.5), rec("bucket", "forest", 0.9),
               rec("bucket", "varma", 0.8)]
    out = aggregate(records)
    assert [(s.task, s.model) for s in out] == [
        ("bucket", "forest"), ("bucket", "varma"), ("raw", "varma")]
