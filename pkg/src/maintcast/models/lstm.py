"""Recurrent forecaster built from first principles.

Single recurrent layer over the (t, f) window, dropout on the final recurrent
output, one rectified dense layer, linear scalar head, squared-error loss,
adaptive-moment updates. The backward pass is hand-derived and verified
against central finite differences by :func:`gradient_check`.

Gate layout inside the stacked weight matrices is (input, forget, cell,
output); the forget-gate bias initializes to 1.0 to keep early training
stable.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvariantError
from ..labels import derive_seed, make_rng

PARAM_NAMES = ("Wx", "Wh", "b", "W1", "b1", "W2", "b2")


def init_params(n_features: int, hidden: int, dense: int, seed: int,
                zero_recurrent: bool = False) -> dict:
    rng = make_rng(seed)
    scale = 0.08
    params = {
        "Wx": rng.uniform(-scale, scale, size=(n_features, 4 * hidden)),
        "Wh": rng.uniform(-scale, scale, size=(hidden, 4 * hidden)),
        "b": np.zeros(4 * hidden),
        "W1": rng.uniform(-scale, scale, size=(hidden, dense)),
        "b1": np.zeros(dense),
        "W2": rng.uniform(-scale, scale, size=(dense, 1)),
        "b2": np.zeros(1),
    }
    params["b"][hidden:2 * hidden] = 1.0
    if zero_recurrent:
        params["Wh"][:] = 0.0
    return params


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _forward(params: dict, x: np.ndarray, dropout_mask: np.ndarray | None):
    """Run the network; returns predictions and the cache for backprop."""
    n, t, _ = x.shape
    hidden = params["Wh"].shape[0]
    h = np.zeros((n, hidden))
    c = np.zeros((n, hidden))
    steps = []
    for s in range(t):
        z = x[:, s, :] @ params["Wx"] + h @ params["Wh"] + params["b"]
        gi = _sigmoid(z[:, :hidden])
        gf = _sigmoid(z[:, hidden:2 * hidden])
        gg = np.tanh(z[:, 2 * hidden:3 * hidden])
        go = _sigmoid(z[:, 3 * hidden:])
        c_next = gf * c + gi * gg
        tc = np.tanh(c_next)
        h_next = go * tc
        steps.append((x[:, s, :], h, c, gi, gf, gg, go, tc))
        h, c = h_next, c_next
    mask = dropout_mask if dropout_mask is not None else 1.0
    dropped = h * mask
    a1 = dropped @ params["W1"] + params["b1"]
    r1 = np.maximum(a1, 0.0)
    y = (r1 @ params["W2"] + params["b2"]).ravel()
    cache = (steps, h, mask, dropped, a1, r1)
    return y, cache


def forward_batch(params: dict, x: np.ndarray) -> np.ndarray:
    """Deterministic inference path (dropout disabled)."""
    y, _ = _forward(params, x, None)
    return y


def mse_loss(params: dict, x: np.ndarray, y_true: np.ndarray) -> float:
    y, _ = _forward(params, x, None)
    return float(np.mean((y - y_true) ** 2))


def _backward(params: dict, cache, y: np.ndarray, y_true: np.ndarray) -> dict:
    steps, h_final, mask, dropped, a1, r1 = cache
    n = y.shape[0]
    hidden = params["Wh"].shape[0]

    dy = (2.0 / n) * (y - y_true)
    dW2 = r1.T @ dy[:, None]
    db2 = np.array([dy.sum()])
    dr1 = dy[:, None] @ params["W2"].T
    da1 = dr1 * (a1 > 0.0)
    dW1 = dropped.T @ da1
    db1 = da1.sum(axis=0)
    ddropped = da1 @ params["W1"].T
    dh = ddropped * mask
    dc = np.zeros_like(dh)

    dWx = np.zeros_like(params["Wx"])
    dWh = np.zeros_like(params["Wh"])
    db = np.zeros_like(params["b"])
    for x_s, h_prev, c_prev, gi, gf, gg, go, tc in reversed(steps):
        do = dh * tc
        dc = dc + dh * go * (1.0 - tc * tc)
        di = dc * gg
        dg = dc * gi
        df = dc * c_prev
        dz = np.concatenate(
            [di * gi * (1.0 - gi), df * gf * (1.0 - gf), dg * (1.0 - gg * gg), do * go * (1.0 - go)],
            axis=1,
        )
        dWx += x_s.T @ dz
        dWh += h_prev.T @ dz
        db += dz.sum(axis=0)
        dh = dz @ params["Wh"].T
        dc = dc * gf
    return {"Wx": dWx, "Wh": dWh, "b": db, "W1": dW1, "b1": db1, "W2": dW2, "b2": db2}


def fit(params: dict, x: np.ndarray, y: np.ndarray, config, rng_seed: int) -> dict:
    """Mini-batch training with tail validation and patience-based stopping.

    Returns the parameter set with the best validation loss seen (final
    parameters when the set is too small for a validation split). Raises
    :class:`InvariantError` if anything turns non-finite.
    """
    n = x.shape[0]
    rng = make_rng(rng_seed)
    params = {k: v.copy() for k, v in params.items()}

    val_n = max(1, math.floor(config.val_fraction * n)) if n >= 2 else 0
    train_n = n - val_n
    x_train, y_train = x[:train_n], y[:train_n]
    x_val, y_val = x[train_n:], y[train_n:]

    m_state = {k: np.zeros_like(v) for k, v in params.items()}
    v_state = {k: np.zeros_like(v) for k, v in params.items()}
    step = 0
    best_val = np.inf
    best_params = {k: v.copy() for k, v in params.items()}
    stale_epochs = 0
    keep_prob = 1.0 - config.dropout

    for _ in range(config.max_epochs):
        order = rng.permutation(train_n)
        for lo in range(0, train_n, config.batch_size):
            rows = order[lo:lo + config.batch_size]
            xb, yb = x_train[rows], y_train[rows]
            if config.dropout > 0.0:
                mask = (rng.random((len(rows), params["Wh"].shape[0])) < keep_prob) / keep_prob
            else:
                mask = None
            y_hat, cache = _forward(params, xb, mask)
            grads = _backward(params, cache, y_hat, yb)
            step += 1
            bc1 = 1.0 - config.beta1 ** step
            bc2 = 1.0 - config.beta2 ** step
            for name in PARAM_NAMES:
                g = grads[name]
                m_state[name] = config.beta1 * m_state[name] + (1.0 - config.beta1) * g
                v_state[name] = config.beta2 * v_state[name] + (1.0 - config.beta2) * (g * g)
                params[name] -= config.learning_rate * (m_state[name] / bc1) / (
                    np.sqrt(v_state[name] / bc2) + config.adam_eps)

        for name in PARAM_NAMES:
            if not np.all(np.isfinite(params[name])):
                raise InvariantError(f"non-finite values in parameter {name} during training")
        if val_n:
            val_loss = mse_loss(params, x_val, y_val)
            if not np.isfinite(val_loss):
                raise InvariantError("non-finite validation loss during training")
            if val_loss < best_val - 1e-12:
                best_val = val_loss
                best_params = {k: v.copy() for k, v in params.items()}
                stale_epochs = 0
            else:
                stale_epochs += 1
                if stale_epochs >= config.patience:
                    return best_params
    return best_params if val_n else params


def gradient_check(window_t: int, n_features: int, hidden: int, dense: int, seed: int,
                   zero_recurrent: bool = False, step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Dropout is disabled; every parameter element is perturbed both ways.
    """
    rng = make_rng(derive_seed(seed, "gradcheck"))
    params = init_params(n_features, hidden, dense, derive_seed(seed, "gradcheck-init"),
                         zero_recurrent=zero_recurrent)
    batch = 5
    x = rng.normal(size=(batch, window_t, n_features))
    y_true = rng.normal(size=batch)

    y_hat, cache = _forward(params, x, None)
    grads = _backward(params, cache, y_hat, y_true)

    worst = 0.0
    for name in PARAM_NAMES:
        arr = params[name]
        flat = arr.ravel()
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + step
            up = mse_loss(params, x, y_true)
            flat[j] = orig - step
            down = mse_loss(params, x, y_true)
            flat[j] = orig
            numeric = (up - down) / (2.0 * step)
            analytic = grads[name].ravel()[j]
            rel = abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-4)
            worst = max(worst, rel)
    return worst
