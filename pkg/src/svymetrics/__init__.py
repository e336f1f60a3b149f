"""svymetrics: design-based evaluation of binary classifiers on survey data.

Estimates finite-population sensitivity, specificity, and AUROC from a
weighted test split of complex-survey data, and ships a Monte Carlo
simulation harness that checks the estimators against exact population
truths on synthetic populations.
"""

from .errors import (
    AggregationError,
    DataValidationError,
    DegenerateSplitError,
    DesignError,
    NonConvergenceError,
    NumericalError,
    SchemaError,
    SeparationError,
    SvymetricsError,
    UndefinedMetricError,
)
from .estimation import (
    ht_total,
    population_truth,
    ratio_standard_error,
    sensitivity,
    specificity,
    tally_confusion,
    weight_diagnostics,
)
from .evaluation import EvaluationSummary, ThresholdMetrics, evaluation_summary
from .rng import derive_stream, stream_seed
from .roc import RocCurve, RocPoint, auroc, roc_sweep, score_adapted_grid, uniform_grid
from .sampling import (
    StratifiedDesign,
    inclusion_probability_of_evaluation,
    split_train_test,
    stratified_sample,
)
from .types import (
    ConfusionTally,
    EvaluationSet,
    FinitePopulation,
    MetricResult,
    Record,
    SampleMember,
    SurveySample,
    ValidationReport,
    validate_sample,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationError",
    "ConfusionTally",
    "DataValidationError",
    "DegenerateSplitError",
    "DesignError",
    "EvaluationSet",
    "EvaluationSummary",
    "FinitePopulation",
    "MetricResult",
    "NonConvergenceError",
    "NumericalError",
    "Record",
    "RocCurve",
    "RocPoint",
    "SampleMember",
    "SchemaError",
    "SeparationError",
    "StratifiedDesign",
    "SurveySample",
    "SvymetricsError",
    "ThresholdMetrics",
    "UndefinedMetricError",
    "ValidationReport",
    "auroc",
    "derive_stream",
    "evaluation_summary",
    "ht_total",
    "inclusion_probability_of_evaluation",
    "population_truth",
    "ratio_standard_error",
    "roc_sweep",
    "score_adapted_grid",
    "sensitivity",
    "specificity",
    "split_train_test",
    "stratified_sample",
    "stream_seed",
    "tally_confusion",
    "uniform_grid",
    "validate_sample",
    "weight_diagnostics",
]
