"""Dense-network numerical core.

Activations, affine layers, binary cross-entropy, Glorot initialisation
and an Adam optimizer. Everything is float64; the batched hot paths live
in the backend kernels (:mod:`relbias._slowcore` / ``relbias._fastcore``)
which share these formulas exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigurationError
from .utils import make_rng

# Loss clamp: predictions are clipped to [EPS, 1-EPS] before taking logs.
EPS = 1e-7

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class ActivationKind(str, Enum):
    RELU = "relu"
    SIGMOID = "sigmoid"
    TANH = "tanh"


# Integer codes shared with the compiled kernel.
ACTIVATION_IDS = {
    ActivationKind.RELU: 0,
    ActivationKind.SIGMOID: 1,
    ActivationKind.TANH: 2,
}


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def apply_activation(kind: ActivationKind, x) -> np.ndarray:
    """Elementwise activation; total on finite input."""
    x = np.asarray(x, dtype=np.float64)
    kind = ActivationKind(kind)
    if kind is ActivationKind.RELU:
        return np.maximum(x, 0.0)
    if kind is ActivationKind.SIGMOID:
        return sigmoid(x)
    return np.tanh(x)


def activation_derivative(kind: ActivationKind, z: np.ndarray, activated: np.ndarray) -> np.ndarray:
    """Derivative w.r.t. pre-activation ``z``; ``activated`` is activation(z)."""
    kind = ActivationKind(kind)
    if kind is ActivationKind.RELU:
        return (z > 0.0).astype(np.float64)
    if kind is ActivationKind.SIGMOID:
        return activated * (1.0 - activated)
    return 1.0 - activated * activated


@dataclass
class LayerParams:
    """One affine layer: ``weights`` is (out_dim, in_dim), ``bias`` is (out_dim,)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise ConfigurationError("weights must be 2-d and bias 1-d")
        if self.weights.shape[0] != self.bias.shape[0]:
            raise ConfigurationError(
                f"bias length {self.bias.shape[0]} does not match out_dim {self.weights.shape[0]}"
            )
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ConfigurationError("layer parameters must be finite")

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "LayerParams":
        return LayerParams(self.weights.copy(), self.bias.copy())


def dense_forward(params: LayerParams, x) -> np.ndarray:
    """Pre-activation ``weights @ x + bias`` for a single input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.in_dim,):
        raise ConfigurationError(
            f"input of length {x.shape} does not match layer in_dim {params.in_dim}"
        )
    return params.weights @ x + params.bias


def bce_loss(prediction, label) -> np.ndarray:
    """Binary cross-entropy with predictions clamped to [EPS, 1-EPS]."""
    p = np.clip(np.asarray(prediction, dtype=np.float64), EPS, 1.0 - EPS)
    y = np.asarray(label, dtype=np.float64)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


def init_params(layer_dims, seed: int) -> list[LayerParams]:
    """Glorot-uniform weights, zero biases, deterministic for a fixed seed.

    ``layer_dims`` is a sequence of (out_dim, in_dim) pairs, drawn in order
    from a single seeded stream.
    """
    rng = make_rng(seed)
    layers = []
    for out_dim, in_dim in layer_dims:
        if out_dim < 1 or in_dim < 1:
            raise ConfigurationError(f"invalid layer dims ({out_dim}, {in_dim})")
        limit = math.sqrt(6.0 / (in_dim + out_dim))
        w = rng.uniform(-limit, limit, size=(out_dim, in_dim))
        layers.append(LayerParams(w, np.zeros(out_dim)))
    return layers


@dataclass
class OptimizerState:
    """Adam accumulators mirroring a list of layers."""

    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    step_count: int = 0

    @classmethod
    def for_layers(cls, layers: list[LayerParams]) -> "OptimizerState":
        return cls(
            m_w=[np.zeros_like(l.weights) for l in layers],
            v_w=[np.zeros_like(l.weights) for l in layers],
            m_b=[np.zeros_like(l.bias) for l in layers],
            v_b=[np.zeros_like(l.bias) for l in layers],
        )


def adam_update(param: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray,
                step: int, learning_rate: float) -> None:
    """In-place Adam update of one parameter array; ``step`` is 1-based."""
    m += (1.0 - ADAM_BETA1) * (grad - m)
    v += (1.0 - ADAM_BETA2) * (grad * grad - v)
    bc1 = 1.0 - ADAM_BETA1 ** step
    bc2 = 1.0 - ADAM_BETA2 ** step
    param -= learning_rate * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)


def optimizer_step(state: OptimizerState, params: list[LayerParams],
                   gradients_w: list[np.ndarray], gradients_b: list[np.ndarray],
                   learning_rate: float) -> tuple[list[LayerParams], OptimizerState]:
    """One Adam step over all layers, updating ``params`` and ``state`` in place."""
    if learning_rate < 0:
        raise ConfigurationError("learning_rate must be >= 0")
    state.step_count += 1
    t = state.step_count
    for i, layer in enumerate(params):
        adam_update(layer.weights, np.asarray(gradients_w[i]), state.m_w[i], state.v_w[i], t, learning_rate)
        adam_update(layer.bias, np.asarray(gradients_b[i]), state.m_b[i], state.v_b[i], t, learning_rate)
    return params, state


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run.

    ``learning_rate`` 0 is accepted so a run can be asserted to be a no-op.
    """

    epochs: int = 20
    learning_rate: float = 0.001
    batch_size: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.learning_rate < 0:
            raise ConfigurationError("learning_rate must be >= 0")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
