"""Experiment lab for identity-relation generalisation in feed-forward
networks augmented with differentiator-rectifier (DR) units."""

from .backend import active_backend_name, available_backends, get_backend
from .data import (
    CoverageMode,
    Dataset,
    Representation,
    TaskKind,
    balanced_subset,
    encode_dataset,
    encode_pair,
    gen_coverage_dataset,
    gen_equality_dataset,
    gen_task_dataset,
    label_task,
    read_dataset_csv,
    sample_unequal_pair,
    stratified_split,
    write_dataset_csv,
)
from .errors import ConfigurationError, TrainingDiverged
from .experiments import (
    ExperimentSpec,
    ReportRow,
    catalog,
    emit_report,
    find_experiment,
    parse_report_csv,
    run_experiment,
    run_experiment_summaries,
)
from .model import (
    FusionMode,
    MLPModel,
    ModelSpec,
    batch_loss_and_grads,
    build_model,
    dr_compute,
    equality_readout,
    forward_pair,
    fusion_inputs,
    predict_proba,
)
from .nn import (
    ActivationKind,
    LayerParams,
    OptimizerState,
    TrainConfig,
    apply_activation,
    bce_loss,
    dense_forward,
    init_params,
    optimizer_step,
)
from .stats import (
    GroupComparison,
    WilcoxonResult,
    compare_groups,
    summarize,
    wilcoxon_signed_rank,
)
from .training import RunResult, SimulationSummary, evaluate, run_simulations, train

__version__ = "0.1.0"
