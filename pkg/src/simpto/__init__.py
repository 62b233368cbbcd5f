"""Simulated classifier predictions for predict-then-optimize experiments on
single-machine weighted-completion-time scheduling."""
from .kernels import BACKEND
from .metrics import (
    ConfusionMatrix,
    LabelSet,
    RateProfile,
    binary_rates,
    build_confusion,
    count_confusion_matrices,
    enumerate_confusion_matrices,
    macro_rates,
    matrix_at,
    matrix_index,
    rates_one_vs_rest,
)
from .schedule import Job, SchedulingInstance, brute_force_optimal, gap, optimal_twct, twct, wspt_order
from .seeding import SeedSpec, UniformStream
from .simulate import SimulatedPrediction, simulate_binary, simulate_dataset, simulate_multiclass
from .experiment import (
    ExperimentConfig,
    ExperimentRecord,
    IngestedModel,
    aggregate_report,
    evaluate_model,
    generate_instance,
    run_cell,
    run_grid,
)

__version__ = "0.1.0"
