"""Pure-NumPy backend for the training kernels.

Reference implementation of the batched forward pass, backpropagation and
the fused train-epochs loop. The compiled backend (``relbias._fastcore``)
implements the same functions with identical semantics; either can be
selected through :mod:`relbias.backend`.

Conventions shared by both backends:

* layer weights are (out_dim, in_dim) float64, biases (out_dim,);
* the final layer has one unit and always applies a sigmoid;
* ``mid_extra`` (if given) is appended to the first hidden layer's
  activations before the next layer, contributing no gradients upstream;
* batch gradients are of the *mean* batch loss; the loss value clamps
  probabilities to [EPS, 1-EPS] while the gradient uses the exact
  sigmoid-cross-entropy form (p - y) / batch.
"""

from __future__ import annotations

import numpy as np

from .nn import ADAM_BETA1, ADAM_BETA2, ADAM_EPS, EPS

NAME = "numpy"


def _act(z: np.ndarray, act_id: int) -> np.ndarray:
    if act_id == 0:
        return np.maximum(z, 0.0)
    if act_id == 1:
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    return np.tanh(z)


def _dact(z: np.ndarray, a: np.ndarray, act_id: int) -> np.ndarray:
    if act_id == 0:
        return (z > 0.0).astype(np.float64)
    if act_id == 1:
        return a * (1.0 - a)
    return 1.0 - a * a


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return _act(z, 1)


def _forward(ws, bs, x, mid_extra, act_id):
    """Returns (prob, zs, acts) where acts[l] is the input of layer l+1."""
    n_layers = len(ws)
    zs, acts = [], []
    a = x
    for l in range(n_layers - 1):
        z = a @ ws[l].T + bs[l]
        a = _act(z, act_id)
        if l == 0 and mid_extra is not None:
            a = np.concatenate([a, mid_extra], axis=1)
        zs.append(z)
        acts.append(a)
    z_out = a @ ws[-1].T + bs[-1]
    p = _sigmoid(z_out[:, 0])
    return p, zs, acts


def forward_probs(ws, bs, x, mid_extra, act_id):
    return _forward(ws, bs, x, mid_extra, act_id)[0]


def loss_and_grads(ws, bs, x, mid_extra, y, act_id):
    """Mean loss over the batch plus gradients per layer."""
    n = x.shape[0]
    n_layers = len(ws)
    p, zs, acts = _forward(ws, bs, x, mid_extra, act_id)
    pc = np.clip(p, EPS, 1.0 - EPS)
    loss = float(-np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)))

    g_w = [None] * n_layers
    g_b = [None] * n_layers
    delta = ((p - y) / n)[:, None]
    for l in range(n_layers - 1, -1, -1):
        inp = x if l == 0 else acts[l - 1]
        g_w[l] = delta.T @ inp
        g_b[l] = delta.sum(axis=0)
        if l == 0:
            break
        d_inp = delta @ ws[l]
        hidden_width = ws[l - 1].shape[0]
        d_inp = d_inp[:, :hidden_width]  # DR columns carry no gradient
        delta = d_inp * _dact(zs[l - 1], acts[l - 1][:, :hidden_width], act_id)
    return loss, g_w, g_b


def _adam(param, grad, m, v, step, lr):
    m += (1.0 - ADAM_BETA1) * (grad - m)
    v += (1.0 - ADAM_BETA2) * (grad * grad - v)
    bc1 = 1.0 - ADAM_BETA1 ** step
    bc2 = 1.0 - ADAM_BETA2 ** step
    param -= lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)


def train_epochs(ws, bs, m_w, v_w, m_b, v_b, x, mid_extra, y, perms,
                 batch_size, lr, act_id, step0):
    """Seeded-permutation minibatch Adam training, parameters updated in place.

    Returns (per-epoch mean losses, final step count, diverged_epoch) where
    diverged_epoch is -1 for a clean run. Training stops at the first epoch
    whose running mean loss is non-finite.
    """
    n = x.shape[0]
    n_epochs = perms.shape[0]
    losses = np.zeros(n_epochs)
    step = int(step0)
    diverged = -1
    for e in range(n_epochs):
        order = perms[e]
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            xb = x[idx]
            eb = mid_extra[idx] if mid_extra is not None else None
            yb = y[idx]
            loss_b, g_w, g_b = loss_and_grads(ws, bs, xb, eb, yb, act_id)
            total += loss_b * len(idx)
            step += 1
            for l in range(len(ws)):
                _adam(ws[l], g_w[l], m_w[l], v_w[l], step, lr)
                _adam(bs[l], g_b[l], m_b[l], v_b[l], step, lr)
        losses[e] = total / n
        if not np.isfinite(losses[e]):
            diverged = e
            break
    return losses, step, diverged
