"""Training loop, evaluation and the repeated-simulation protocol."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import stats
from .backend import get_backend
from .data import Dataset, encode_dataset
from .errors import ConfigurationError, TrainingDiverged
from .model import MLPModel, ModelSpec, build_model, fusion_inputs, predict_proba
from .nn import ACTIVATION_IDS, OptimizerState, TrainConfig
from .utils import make_rng, spawn_seeds


@dataclass(frozen=True)
class RunResult:
    """Metrics of one training run."""

    train_accuracy: float
    test_accuracy: float | None
    per_epoch_loss: tuple[float, ...]
    seed: int


@dataclass(frozen=True)
class SimulationSummary:
    """Test accuracies over repeated seeded runs of one configuration."""

    accuracies: tuple[float, ...]
    mean: float
    sd: float  # sample SD in percentage points
    train_accuracies: tuple[float, ...]
    seeds: tuple[int, ...]


def train(spec: ModelSpec, train_data: Dataset, config: TrainConfig,
          test_data: Dataset | None = None, backend=None) -> tuple[MLPModel, RunResult]:
    """Train a freshly initialised model on ``train_data``.

    Minibatch Adam with seeded per-epoch shuffling; aborts with
    :class:`TrainingDiverged` if the epoch loss goes non-finite.
    ``test_accuracy`` is filled only when ``test_data`` is given.
    """
    if train_data.n != spec.dim:
        raise ConfigurationError(f"dataset dimension {train_data.n} != model dim {spec.dim}")
    init_seed, shuffle_seed = spawn_seeds(config.seed, 2)
    model = build_model(spec, init_seed)

    x, y = encode_dataset(train_data, spec.representation)
    net_in, mid_extra = fusion_inputs(spec, x)
    rng = make_rng(shuffle_seed, 0x0E0C)
    perms = np.stack([rng.permutation(len(train_data)) for _ in range(config.epochs)]).astype(np.int64)

    state = OptimizerState.for_layers(model.layers)
    kernel = backend if backend is not None else get_backend()
    losses, _, diverged = kernel.train_epochs(
        [l.weights for l in model.layers],
        [l.bias for l in model.layers],
        state.m_w, state.v_w, state.m_b, state.v_b,
        net_in, mid_extra, y, perms,
        config.batch_size, config.learning_rate,
        ACTIVATION_IDS[spec.activation], 0,
    )
    if diverged >= 0:
        raise TrainingDiverged(
            f"non-finite loss at epoch {diverged} (seed {config.seed}, lr {config.learning_rate})",
            epoch=int(diverged), seed=config.seed,
        )

    result = RunResult(
        train_accuracy=evaluate(model, train_data),
        test_accuracy=evaluate(model, test_data) if test_data is not None else None,
        per_epoch_loss=tuple(float(v) for v in losses),
        seed=config.seed,
    )
    return model, result


def evaluate(model: MLPModel, data: Dataset) -> float:
    """Fraction of pairs classified correctly; probability 0.5 counts as class 1."""
    if data.n != model.spec.dim:
        raise ConfigurationError(f"dataset dimension {data.n} != model dim {model.spec.dim}")
    x, y = encode_dataset(data, model.spec.representation)
    p = predict_proba(model, x)
    return float(np.mean((p >= 0.5) == (y == 1.0)))


def run_simulations(spec: ModelSpec, data_generator, config: TrainConfig,
                    k: int = 10, backend=None) -> SimulationSummary:
    """``k`` independent runs with seeds config.seed + 0 .. k-1.

    Each simulation regenerates its dataset through ``data_generator(seed)``
    (returning a (train, test) pair) and reinitialises the network, so the
    summary's spread reflects both data and initialisation variance.
    """
    if k < 1:
        raise ConfigurationError("simulation count must be >= 1")
    accuracies, train_accuracies, seeds = [], [], []
    for i in range(k):
        seed = config.seed + i
        try:
            train_data, test_data = data_generator(seed)
            _, result = train(spec, train_data, replace(config, seed=seed),
                              test_data=test_data, backend=backend)
        except Exception as exc:
            raise RuntimeError(f"simulation {i} (seed {seed}) failed: {exc}") from exc
        accuracies.append(result.test_accuracy)
        train_accuracies.append(result.train_accuracy)
        seeds.append(seed)
    mean_pct, sd_pp = stats.summarize(accuracies)
    return SimulationSummary(
        accuracies=tuple(accuracies),
        mean=mean_pct / 100.0,
        sd=sd_pp,
        train_accuracies=tuple(train_accuracies),
        seeds=tuple(seeds),
    )
