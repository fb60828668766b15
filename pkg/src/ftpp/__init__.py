"""Decoupled learning and prediction for factorial marked temporal point processes.

Event sequences whose events carry a tuple of discrete markers are modeled
with one history-driven softmax per marker dimension over a shared feature
vector, trained under a sparse-group penalty by either an alternating
splitting solver or a direct accelerated proximal-gradient solver.
"""

from .core import (
    Dataset,
    DurationScale,
    Event,
    EventSequence,
    MarkerSpace,
    ParamMatrix,
    Violation,
    param_counts,
    validate,
)
from .errors import (
    ConfigError,
    DataFormatError,
    DomainError,
    FtppError,
    NumericError,
)
from .features import (
    FeatureVector,
    Standardizer,
    build_features,
    intensities,
    marker_probabilities,
)
from .inference import (
    CvReport,
    EvalReport,
    Prediction,
    cross_validate,
    evaluate,
    inspect_sparsity,
    predict_next,
)
from .kernels import KernelSpec, baseline_modulation, decay, median_gap
from .objective import (
    RegularizationSpec,
    TrainingMatrix,
    build_training_matrix,
    loss,
    loss_gradient,
    penalty,
    regularized_objective,
)
from .prox import (
    group_soft_threshold,
    group_soft_threshold_columns,
    soft_threshold,
    sparse_group_prox,
)
from .solvers import (
    AdmmState,
    ConvergenceTrace,
    FistaConfig,
    admm_fit,
    fista_solve,
    gamma_update,
    softmax_fit,
    uni_support_mask,
)
from .synth import GapSpec, GeneratorSpec, GroundTruth, LengthSpec, ThetaSpec, generate
from .training import FitConfig, TrainedModel, fit_model

__version__ = "0.1.0"

__all__ = [
    "AdmmState", "ConfigError", "ConvergenceTrace", "CvReport", "DataFormatError", "Dataset",
    "DomainError", "DurationScale", "EvalReport", "Event", "EventSequence",
    "FeatureVector", "FistaConfig", "FitConfig", "FtppError", "GapSpec",
    "GeneratorSpec", "GroundTruth", "KernelSpec", "LengthSpec", "MarkerSpace",
    "NumericError", "ParamMatrix", "Prediction", "RegularizationSpec",
    "Standardizer", "ThetaSpec", "TrainedModel", "TrainingMatrix", "Violation",
    "admm_fit", "baseline_modulation", "build_features", "build_training_matrix",
    "cross_validate", "decay", "evaluate", "fista_solve", "fit_model",
    "gamma_update", "generate", "group_soft_threshold",
    "group_soft_threshold_columns", "inspect_sparsity", "intensities", "loss",
    "loss_gradient", "marker_probabilities", "median_gap", "param_counts",
    "penalty", "predict_next", "regularized_objective", "soft_threshold",
    "softmax_fit", "sparse_group_prox", "uni_support_mask", "validate",
]
