"""Differentiator-rectifier units and fusion architectures.

A DR unit compares one input dimension across the two vectors of a pair
by computing the absolute difference |x - y|; its input weights are fixed
at 1 and it carries no bias or activation, so it is structural wiring,
never a trainable parameter. Networks come in three flavours:

* ``plain``  - input [v1, v2] (width 2n) -> hidden stack -> 1 sigmoid unit
* ``early``  - DR outputs are appended to the input, width 3n
* ``mid``    - DR outputs are appended to the first hidden layer's
               activations, so the next layer fans in hidden_sizes[0] + n

With several hidden layers the DR block still attaches only at the first
layer connected to the inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _slowcore
from .data import Representation
from .errors import ConfigurationError
from .nn import ACTIVATION_IDS, ActivationKind, LayerParams, init_params

DR_READOUT_WEIGHT = -10.0
DR_READOUT_BIAS = 5.0


class FusionMode(str, Enum):
    PLAIN = "plain"
    EARLY = "early"
    MID = "mid"


def dr_compute(v1, v2) -> np.ndarray:
    """Elementwise |v1 - v2|; zero exactly where the inputs agree."""
    a = np.asarray(v1, dtype=np.float64)
    b = np.asarray(v2, dtype=np.float64)
    if a.shape != b.shape:
        raise ConfigurationError(f"DR inputs must have equal shape, got {a.shape} vs {b.shape}")
    return np.abs(a - b)


@dataclass(frozen=True)
class ModelSpec:
    """Architecture description: dimensions, activation, fusion and encoding."""

    dim: int
    hidden_sizes: tuple[int, ...] = (10,)
    activation: ActivationKind = ActivationKind.RELU
    fusion: FusionMode = FusionMode.PLAIN
    representation: Representation = Representation.ZERO_ONE

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        object.__setattr__(self, "activation", ActivationKind(self.activation))
        object.__setattr__(self, "fusion", FusionMode(self.fusion))
        object.__setattr__(self, "representation", Representation(self.representation))
        if self.dim < 1:
            raise ConfigurationError("vector dimension must be >= 1")
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ConfigurationError("hidden_sizes must be non-empty positive integers")

    @property
    def input_width(self) -> int:
        return 3 * self.dim if self.fusion is FusionMode.EARLY else 2 * self.dim

    def layer_dims(self) -> list[tuple[int, int]]:
        """(out_dim, in_dim) of every trainable layer, DR wiring excluded."""
        dims = []
        fan_in = self.input_width
        for i, h in enumerate(self.hidden_sizes):
            dims.append((h, fan_in))
            fan_in = h + (self.dim if self.fusion is FusionMode.MID and i == 0 else 0)
        dims.append((1, fan_in))
        return dims


@dataclass
class MLPModel:
    """Trainable layers plus the spec describing the fixed DR wiring."""

    spec: ModelSpec
    layers: list[LayerParams]

    def __post_init__(self):
        expected = self.spec.layer_dims()
        got = [(l.out_dim, l.in_dim) for l in self.layers]
        if got != expected:
            raise ConfigurationError(f"layer shapes {got} do not match spec {expected}")

    @property
    def trainable_parameter_count(self) -> int:
        return sum(l.weights.size + l.bias.size for l in self.layers)

    def copy(self) -> "MLPModel":
        return MLPModel(self.spec, [l.copy() for l in self.layers])


def build_model(spec: ModelSpec, seed: int) -> MLPModel:
    """Glorot-initialised model; deterministic for a fixed seed."""
    return MLPModel(spec, init_params(spec.layer_dims(), seed))


def fusion_inputs(spec: ModelSpec, x: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    """Kernel inputs for encoded pairs ``x`` of shape (N, 2n).

    Returns (net_input, mid_extra): DR outputs become extra input columns
    for early fusion and a separate block appended after the first hidden
    layer for mid fusion.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 2 * spec.dim:
        raise ConfigurationError(f"encoded input must be (N, {2 * spec.dim}), got {x.shape}")
    dr = np.abs(x[:, : spec.dim] - x[:, spec.dim :])
    if spec.fusion is FusionMode.EARLY:
        return np.ascontiguousarray(np.concatenate([x, dr], axis=1)), None
    if spec.fusion is FusionMode.MID:
        return x, np.ascontiguousarray(dr)
    return x, None


def predict_proba(model: MLPModel, x: np.ndarray) -> np.ndarray:
    """Output probabilities for encoded pairs ``x`` of shape (N, 2n)."""
    net_in, mid_extra = fusion_inputs(model.spec, x)
    return _slowcore.forward_probs(
        [l.weights for l in model.layers],
        [l.bias for l in model.layers],
        net_in,
        mid_extra,
        ACTIVATION_IDS[model.spec.activation],
    )


def forward_pair(model: MLPModel, encoded_pair) -> float:
    """Probability for one encoded pair (length 2n)."""
    x = np.asarray(encoded_pair, dtype=np.float64)
    if x.shape != (2 * model.spec.dim,):
        raise ConfigurationError(
            f"encoded pair must have length {2 * model.spec.dim}, got {x.shape}"
        )
    return float(predict_proba(model, x[None, :])[0])


def batch_loss_and_grads(model: MLPModel, x: np.ndarray, y: np.ndarray):
    """Mean batch loss and its gradients w.r.t. every trainable parameter.

    The fixed DR wiring has no parameters, so no gradient exists for it.
    """
    net_in, mid_extra = fusion_inputs(model.spec, x)
    return _slowcore.loss_and_grads(
        [l.weights for l in model.layers],
        [l.bias for l in model.layers],
        net_in,
        mid_extra,
        np.asarray(y, dtype=np.float64),
        ACTIVATION_IDS[model.spec.activation],
    )


def equality_readout(model: MLPModel) -> MLPModel:
    """Mid-fusion model with a hand-set output layer that needs no training.

    Every DR channel gets weight -10, hidden channels 0 and the bias is +5:
    equal pairs (all DR outputs zero) score sigmoid(5) and any unequal
    0/1-encoded pair scores at most sigmoid(-5).
    """
    if model.spec.fusion is not FusionMode.MID:
        raise ConfigurationError("the hand-set equality readout requires mid fusion")
    if len(model.spec.hidden_sizes) != 1:
        raise ConfigurationError("the hand-set readout assumes a single hidden layer")
    out = model.copy()
    readout = out.layers[-1]
    readout.weights[:] = 0.0
    readout.weights[0, model.spec.hidden_sizes[0] :] = DR_READOUT_WEIGHT
    readout.bias[:] = DR_READOUT_BIAS
    return out
