import numpy as np
import pytest

from maintcast.errors import InvariantError
from maintcast.models import (
    incremental_update,
    lstm_gradient_check,
    predict,
    train,
)
from maintcast.models import lstm as L
from maintcast.labels import derive_seed, make_rng
from maintcast.targets import Representation

from test_models import build_samples, config


def test_gradient_check_seed_one():
    assert lstm_gradient_check(window_t=3, n_features=2, hidden=4, dense=3, seed=1) <= 1e-4


def test_gradient_check_zero_recurrent_weights():
    err = lstm_gradient_check(window_t=3, n_features=2, hidden=4, dense=3, seed=2,
                              zero_recurrent=True)
    assert np.isfinite(err) and err <= 1e-4


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_gradient_check_five_seeds(seed):
    assert lstm_gradient_check(window_t=3, n_features=2, hidden=4, dense=3, seed=seed) <= 1e-4


def test_training_deterministic():
    samples = build_samples()
    m1 = train(config("lstm"), samples)
    m2 = train(config("lstm"), samples)
    for name in L.PARAM_NAMES:
        np.testing.assert_array_equal(m1.params[name], m2.params[name])


def test_prediction_finite_on_zero_input():
    samples = build_samples()
    model = train(config("lstm"), samples)
    zeros = build_samples()
    zeros.inputs = np.zeros_like(zeros.inputs)
    out = predict(model, zeros)
    assert np.all(np.isfinite(out))


def test_update_with_empty_set_unchanged():
    samples = build_samples()
    model = train(config("lstm"), samples)
    empty = build_samples()
    empty.inputs = empty.inputs[:0]
    empty.targets = empty.targets[:0]
    empty.input_end_blocks = empty.input_end_blocks[:0]
    empty.target_blocks = empty.target_blocks[:0]
    empty.origins = []
    updated = incremental_update(model, empty)
    assert updated is model


def test_update_deterministic():
    samples = build_samples()
    fresh = build_samples(value_fn=lambda k, i: (i * 2 + k) % 11)
    model = train(config("lstm"), samples)
    u1 = incremental_update(model, fresh)
    u2 = incremental_update(model, fresh)
    for name in L.PARAM_NAMES:
        np.testing.assert_array_equal(u1.params[name], u2.params[name])
    # and the original model is untouched
    p_before = predict(model, samples)
    np.testing.assert_array_equal(p_before, predict(model, samples))


def test_update_makes_progress_on_new_window():
    samples = build_samples()
    fresh = build_samples(value_fn=lambda k, i: (i * 3 + k) % 11)
    model = train(config("lstm"), samples)

    def loss_on(m, s):
        p = predict(m, s)
        return float(np.mean((p - s.targets) ** 2))

    before = loss_on(model, fresh)
    updated = incremental_update(model, fresh)
    after = loss_on(updated, fresh)
    assert after <= before + 1e-9


def test_update_counter_advances():
    samples = build_samples()
    model = train(config("lstm"), samples)
    updated = incremental_update(model, samples)
    assert updated.update_count == model.update_count + 1


def test_non_finite_guard():
    class Cfg:
        hidden_size = 4; dense_size = 3; dropout = 0.0; learning_rate = 1e-3
        beta1 = 0.9; beta2 = 0.999; adam_eps = 1e-8; batch_size = 4
        max_epochs = 1; val_fraction = 0.1; patience = 5

    params = L.init_params(2, 4, 3, derive_seed(1, "x"))
    params["W2"][:] = np.inf
    x = make_rng(0).normal(size=(8, 3, 2))
    y = np.zeros(8)
    with np.errstate(all="ignore"), pytest.raises(InvariantError):
        L.fit(params, x, y, Cfg, rng_seed=1)


def test_dropout_only_during_training():
    samples = build_samples()
    model = train(config("lstm"), samples)
    p1 = predict(model, samples)
    p2 = predict(model, samples)
    np.testing.assert_array_equal(p1, p2)


def test_target_clipping_by_task():
    samples = build_samples(task=Representation.SLOPE)
    samples.targets = np.linspace(-30.0, 30.0, samples.n)
    model = train(config("lstm", task=Representation.SLOPE), samples)
    assert model.target_mean == pytest.approx(0.0, abs=1e-9)  # clipped range is symmetric
