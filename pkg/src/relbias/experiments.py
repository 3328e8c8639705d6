"""Declarative experiment catalog, grid runner and report emission.

Each catalog entry sweeps one factor (dimension, training fraction, split
ratio, vector coverage, depth, width, activation, input representation,
task, or a fixed combined variant) over the three fusion modes, with 10
seeded simulations per grid cell. Reports come out as CSV (full
precision), markdown tables (whole-percent accuracies with an SD footer
row) or tab-separated plot data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import (
    CoverageMode,
    Representation,
    TaskKind,
    balanced_subset,
    gen_coverage_dataset,
    gen_equality_dataset,
    gen_task_dataset,
    stratified_split,
)
from .errors import ConfigurationError
from .model import FusionMode, ModelSpec
from .nn import ActivationKind, TrainConfig
from .training import SimulationSummary, run_simulations

DEFAULT_BASE_SEED = 1729
TASK_DATASET_SIZE = 10_000

# Tiny datasets (exhaustive low-dimension protocol) need many small steps
# to converge inside the fixed 20-epoch budget; the 10k-pair datasets use
# conventional minibatches. The cutoff sits well away from every shipped
# training-set size.
SMALL_DATA_LIMIT = 600
SMALL_DATA_CONFIG = {"batch_size": 1, "learning_rate": 0.01}
LARGE_DATA_CONFIG = {"batch_size": 16, "learning_rate": 0.001}

ALL_FUSIONS = (FusionMode.PLAIN, FusionMode.EARLY, FusionMode.MID)


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: a varying factor, fixed architecture fields, and seeds."""

    id: str
    description: str
    sweep_param: str
    sweep_values: tuple
    task: TaskKind = TaskKind.EQUALITY
    fusion_modes: tuple[FusionMode, ...] = ALL_FUSIONS
    dim: int = 10
    hidden_sizes: tuple[int, ...] = (10,)
    activation: ActivationKind = ActivationKind.RELU
    representation: Representation = Representation.ZERO_ONE
    simulations: int = 10
    epochs: int = 20
    base_seed: int = DEFAULT_BASE_SEED

    def __post_init__(self):
        if not self.sweep_values:
            raise ConfigurationError(f"experiment {self.id} has no sweep values")


@dataclass(frozen=True)
class ReportRow:
    """One grid cell: (sweep value, fusion mode) with its accuracy summary."""

    experiment: str
    sweep_value: str
    fusion: str
    mean_acc: float | None
    sd: float | None
    accuracies: tuple[float, ...]
    error: str | None = None


def catalog() -> list[ExperimentSpec]:
    """The built-in experiment suite."""
    return [
        ExperimentSpec(
            id="dim-sweep",
            description="equality accuracy across vector dimensions 2..100",
            sweep_param="dimension",
            sweep_values=(2, 3, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100),
        ),
        ExperimentSpec(
            id="trainsize-sweep",
            description="equality at n=10, training on 1..50% of the data with the test half fixed",
            sweep_param="train_fraction",
            sweep_values=(0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5),
        ),
        ExperimentSpec(
            id="split-sweep",
            description="equality at n=10 under train/test splits from 75/25 to 95/5",
            sweep_param="split_ratio",
            sweep_values=(0.75, 0.8, 0.85, 0.9, 0.95),
        ),
        ExperimentSpec(
            id="coverage",
            description="equality at n=10 with test vectors covered by training unequal pairs",
            sweep_param="coverage",
            sweep_values=(CoverageMode.ONE_POSITION, CoverageMode.BOTH_POSITIONS),
        ),
        ExperimentSpec(
            id="depth-sweep",
            description="equality at n=3 for 1..5 hidden layers of 10 units each",
            sweep_param="depth",
            sweep_values=(1, 2, 3, 4, 5),
            dim=3,
        ),
        ExperimentSpec(
            id="width-sweep",
            description="equality at n=3 for a single hidden layer of 10..100 units",
            sweep_param="width",
            sweep_values=(10, 20, 30, 40, 50, 80, 100),
            dim=3,
        ),
        ExperimentSpec(
            id="activation-sweep",
            description="equality at n=3 under relu, sigmoid and tanh hidden activations",
            sweep_param="activation",
            sweep_values=(ActivationKind.RELU, ActivationKind.SIGMOID, ActivationKind.TANH),
            dim=3,
        ),
        ExperimentSpec(
            id="representation",
            description="equality at n=3 with inputs encoded as 0/1 vs -1/1",
            sweep_param="representation",
            sweep_values=(Representation.ZERO_ONE, Representation.SIGN),
            dim=3,
        ),
        ExperimentSpec(
            id="combined-factors",
            description="equality at n=3 with five sigmoid hidden layers and -1/1 inputs",
            sweep_param="variant",
            sweep_values=("deep_sigmoid_sign",),
            dim=3,
            hidden_sizes=(10, 10, 10, 10, 10),
            activation=ActivationKind.SIGMOID,
            representation=Representation.SIGN,
        ),
        ExperimentSpec(
            id="tasks",
            description="comparison, digit-sum>=3, reversal and parity tasks at n=10",
            sweep_param="task",
            sweep_values=(TaskKind.COMPARISON, TaskKind.DIGITSUM3,
                          TaskKind.REVERSAL, TaskKind.PARITY),
        ),
    ]


def find_experiment(exp_id: str) -> ExperimentSpec:
    for spec in catalog():
        if spec.id == exp_id:
            return spec
    known = ", ".join(s.id for s in catalog())
    raise ConfigurationError(f"unknown experiment {exp_id!r}; valid ids: {known}")


def _cell_model_spec(exp: ExperimentSpec, value, fusion: FusionMode) -> ModelSpec:
    dim = exp.dim
    hidden = exp.hidden_sizes
    activation = exp.activation
    representation = exp.representation
    if exp.sweep_param == "dimension":
        dim = int(value)
    elif exp.sweep_param == "depth":
        hidden = (10,) * int(value)
    elif exp.sweep_param == "width":
        hidden = (int(value),)
    elif exp.sweep_param == "activation":
        activation = ActivationKind(value)
    elif exp.sweep_param == "representation":
        representation = Representation(value)
    return ModelSpec(dim, hidden, activation, fusion, representation)


def _cell_data_generator(exp: ExperimentSpec, value):
    dim = int(value) if exp.sweep_param == "dimension" else exp.dim

    if exp.sweep_param == "coverage":
        return lambda seed: gen_coverage_dataset(dim, CoverageMode(value), seed)

    if exp.sweep_param == "task":
        def gen(seed):
            full = gen_task_dataset(TaskKind(value), dim, TASK_DATASET_SIZE, seed)
            return stratified_split(full, 0.75, seed)
        return gen

    if exp.sweep_param == "train_fraction":
        def gen(seed):
            full = gen_equality_dataset(dim, seed)
            pool, test = stratified_split(full, 0.5, seed)
            train = balanced_subset(pool, int(round(float(value) * len(full))), seed)
            return train, test
        return gen

    if exp.sweep_param == "split_ratio":
        def gen(seed):
            full = gen_equality_dataset(dim, seed)
            return stratified_split(full, float(value), seed)
        return gen

    def gen(seed):
        full = gen_equality_dataset(dim, seed)
        return stratified_split(full, 0.75, seed)
    return gen


def cell_train_config(train_size: int, base_seed: int, epochs: int = 20) -> TrainConfig:
    tier = SMALL_DATA_CONFIG if train_size <= SMALL_DATA_LIMIT else LARGE_DATA_CONFIG
    return TrainConfig(epochs=epochs, seed=base_seed, **tier)


def format_sweep_value(value) -> str:
    if hasattr(value, "value"):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_experiment_summaries(
    exp: ExperimentSpec, base_seed: int | None = None, simulations: int | None = None,
    backend=None, progress=None,
) -> tuple[list[ReportRow], dict[tuple[str, str], SimulationSummary]]:
    """Run the full grid; failed cells become marked rows, the rest proceed.

    Every cell uses the same simulation seeds (base_seed + i), so sweep
    values and fusion modes are paired over matched data and seeds.
    """
    seed = exp.base_seed if base_seed is None else int(base_seed)
    k = exp.simulations if simulations is None else int(simulations)
    rows: list[ReportRow] = []
    summaries: dict[tuple[str, str], SimulationSummary] = {}
    for value in exp.sweep_values:
        value_str = format_sweep_value(value)
        try:
            generator = _cell_data_generator(exp, value)
            probe_train, _ = generator(seed)
            config = cell_train_config(len(probe_train), seed, exp.epochs)
        except Exception as exc:
            rows.extend(ReportRow(exp.id, value_str, fusion.value, None, None, (), error=str(exc))
                        for fusion in exp.fusion_modes)
            continue
        for fusion in exp.fusion_modes:
            if progress is not None:
                progress(f"{exp.id}: {exp.sweep_param}={value_str} fusion={fusion.value}")
            try:
                spec = _cell_model_spec(exp, value, fusion)
                summary = run_simulations(spec, generator, config, k, backend=backend)
            except Exception as exc:
                rows.append(ReportRow(exp.id, value_str, fusion.value,
                                      None, None, (), error=str(exc)))
                continue
            summaries[(value_str, fusion.value)] = summary
            rows.append(ReportRow(exp.id, value_str, fusion.value,
                                  summary.mean, summary.sd, summary.accuracies))
    return rows, summaries


def run_experiment(exp: ExperimentSpec, base_seed: int | None = None,
                   simulations: int | None = None, backend=None, progress=None) -> list[ReportRow]:
    rows, _ = run_experiment_summaries(exp, base_seed, simulations, backend, progress)
    return rows


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def emit_report(rows: list[ReportRow], fmt: str = "csv") -> str:
    """Render rows as csv, markdown or plotdata; see the module docstring."""
    if not rows:
        raise ConfigurationError("no rows to report")
    if fmt == "csv":
        return _emit_csv(rows)
    if fmt == "markdown":
        return _emit_markdown(rows)
    if fmt == "plotdata":
        return _emit_plotdata(rows)
    raise ConfigurationError(f"unknown report format {fmt!r} (csv, markdown or plotdata)")


def _emit_csv(rows: list[ReportRow]) -> str:
    k = max((len(r.accuracies) for r in rows), default=0)
    header = "experiment,sweep_value,fusion,mean_acc,sd" + "".join(f",acc_{i + 1}" for i in range(k))
    lines = [header]
    for r in rows:
        accs = [_fmt(a) for a in r.accuracies] + [""] * (k - len(r.accuracies))
        lines.append(",".join([r.experiment, r.sweep_value, r.fusion,
                               _fmt(r.mean_acc), _fmt(r.sd), *accs]))
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> list[ReportRow]:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or not lines[0].startswith("experiment,sweep_value,fusion,mean_acc,sd"):
        raise ConfigurationError("not a results CSV")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        exp_id, value, fusion, mean_s, sd_s = parts[:5]
        accs = tuple(float(a) for a in parts[5:] if a != "")
        if mean_s == "":
            rows.append(ReportRow(exp_id, value, fusion, None, None, (), error="failed"))
        else:
            rows.append(ReportRow(exp_id, value, fusion, float(mean_s), float(sd_s), accs))
    return rows


def _row_grid(rows: list[ReportRow]) -> tuple[list[str], list[str], dict]:
    values, fusions = [], []
    cells = {}
    for r in rows:
        if r.sweep_value not in values:
            values.append(r.sweep_value)
        if r.fusion not in fusions:
            fusions.append(r.fusion)
        cells[(r.sweep_value, r.fusion)] = r
    return values, fusions, cells


def _emit_markdown(rows: list[ReportRow]) -> str:
    values, fusions, cells = _row_grid(rows)
    header = "| value | " + " | ".join(fusions) + " |"
    sep = "|" + " --- |" * (len(fusions) + 1)
    lines = [header, sep]
    for v in values:
        cols = []
        for f in fusions:
            r = cells.get((v, f))
            if r is None or r.mean_acc is None:
                cols.append("failed")
            else:
                cols.append(f"{int(np.floor(r.mean_acc * 100 + 0.5))}%")
        lines.append("| " + v + " | " + " | ".join(cols) + " |")
    sd_cols = []
    for f in fusions:
        sds = [cells[(v, f)].sd for v in values
               if (v, f) in cells and cells[(v, f)].sd is not None]
        sd_cols.append(f"{float(np.mean(sds)):.2f}" if sds else "failed")
    lines.append("| SD | " + " | ".join(sd_cols) + " |")
    return "\n".join(lines) + "\n"


def _emit_plotdata(rows: list[ReportRow]) -> str:
    """One x column plus a mean-accuracy (percent) series per fusion mode."""
    values, fusions, cells = _row_grid(rows)
    lines = ["\t".join(["x", *fusions])]
    for v in values:
        cols = [v]
        for f in fusions:
            r = cells.get((v, f))
            cols.append("nan" if r is None or r.mean_acc is None else repr(r.mean_acc * 100.0))
        lines.append("\t".join(cols))
    return "\n".join(lines) + "\n"
