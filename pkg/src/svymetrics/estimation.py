"""Design-based estimators.

Implements the inverse-probability total estimator, weighted confusion
tallies, the ratio estimators of sensitivity and specificity with their
Taylor-linearization standard errors, finite-population truth metrics, and
weight-distribution diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import DataValidationError, UndefinedMetricError
from .types import ConfusionTally, EvaluationSet, MetricResult

EstimatorWeighting = Literal["weighted", "unweighted"]


def ht_total(values: Iterable[tuple[float, float]]) -> float:
    """Estimate a population total as sum(w_i * z_i) over (value, weight) pairs.

    Unbiased for the true total under the randomization design when the
    weights are inverse inclusion probabilities.
    """
    pairs = np.asarray(list(values), dtype=np.float64)
    if pairs.size == 0:
        return 0.0
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise DataValidationError("expected a sequence of (value, weight) pairs")
    z, w = pairs[:, 0], pairs[:, 1]
    if not np.all(np.isfinite(z)) or not np.all(np.isfinite(w)):
        raise DataValidationError("values and weights must be finite")
    if np.any(w <= 0):
        raise DataValidationError("weights must be positive")
    return float(w @ z)


def tally_confusion(evaluation: EvaluationSet, threshold: float) -> ConfusionTally:
    """Tally weighted and raw confusion totals at a decision threshold.

    A record is classified positive iff its score s_i >= threshold, so a
    threshold of 0 classifies everything positive.  Weighted totals are
    sums of compound weights over each confusion cell.
    """
    if evaluation.size == 0:
        raise DataValidationError("evaluation set is empty")
    scores = evaluation.require_scores()
    y = evaluation.outcomes
    w = evaluation.weights
    predicted = scores >= threshold
    actual = y == 1
    tp_mask = predicted & actual
    fn_mask = ~predicted & actual
    fp_mask = predicted & ~actual
    tn_mask = ~predicted & ~actual
    return ConfusionTally(
        nhat_tp=float(w[tp_mask].sum()),
        nhat_tn=float(w[tn_mask].sum()),
        nhat_fp=float(w[fp_mask].sum()),
        nhat_fn=float(w[fn_mask].sum()),
        tp=int(tp_mask.sum()),
        tn=int(tn_mask.sum()),
        fp=int(fp_mask.sum()),
        fn=int(fn_mask.sum()),
    )


def sensitivity(tally: ConfusionTally, weighting: EstimatorWeighting) -> MetricResult:
    """True-positive rate among actual positives.

    The weighted form is the ratio of estimated totals
    N^_TP / (N^_TP + N^_FN); the unweighted form is TP / (TP + FN).
    """
    if weighting == "weighted":
        num, den = tally.nhat_tp, tally.nhat_tp + tally.nhat_fn
    elif weighting == "unweighted":
        num, den = float(tally.tp), float(tally.tp + tally.fn)
    else:
        raise DataValidationError(f"unknown weighting {weighting!r}")
    if den <= 0:
        raise UndefinedMetricError("sensitivity undefined: no positive outcomes")
    return MetricResult(value=num / den, kind="sensitivity", weighting=weighting)


def specificity(tally: ConfusionTally, weighting: EstimatorWeighting) -> MetricResult:
    """True-negative rate among actual negatives; mirror of sensitivity."""
    if weighting == "weighted":
        num, den = tally.nhat_tn, tally.nhat_tn + tally.nhat_fp
    elif weighting == "unweighted":
        num, den = float(tally.tn), float(tally.tn + tally.fp)
    else:
        raise DataValidationError(f"unknown weighting {weighting!r}")
    if den <= 0:
        raise UndefinedMetricError("specificity undefined: no negative outcomes")
    return MetricResult(value=num / den, kind="specificity", weighting=weighting)


def ratio_standard_error(
    evaluation: EvaluationSet,
    threshold: float,
    kind: Literal["sensitivity", "specificity"],
) -> float | None:
    """Taylor-linearization standard error of the ratio estimator.

    For R^ = X^/Y^ with X^ = sum(w*_i x_i) and Y^ = sum(w*_i y_i), uses the
    with-replacement approximation

        Var(R^) ~= (1/Y^2) * (m/(m-1)) * sum((w*_i (x_i - R^ y_i))^2)

    with m the evaluation-set size, x_i the numerator indicator (TP_i for
    sensitivity, TN_i for specificity) and y_i the denominator-class
    indicator.  No finite-population correction is applied and design
    strata are ignored, which yields mildly conservative errors.

    Returns None when the variance is degenerate (fewer than two records in
    the denominator class); raises UndefinedMetricError when the metric
    itself is undefined.
    """
    scores = evaluation.require_scores()
    y = evaluation.outcomes
    w = evaluation.weights
    predicted = scores >= threshold
    if kind == "sensitivity":
        in_class = y == 1
        hits = predicted & in_class
    elif kind == "specificity":
        in_class = y == 0
        hits = ~predicted & in_class
    else:
        raise DataValidationError(f"no ratio standard error for kind {kind!r}")
    x = hits.astype(np.float64)
    z = in_class.astype(np.float64)
    y_hat = float(w @ z)
    if y_hat <= 0:
        raise UndefinedMetricError(f"{kind} undefined: empty denominator class")
    if int(in_class.sum()) < 2:
        return None
    m = evaluation.size
    if m < 2:
        return None
    ratio = float(w @ x) / y_hat
    residuals = w * (x - ratio * z)
    variance = (m / (m - 1)) * float(residuals @ residuals) / (y_hat * y_hat)
    return float(np.sqrt(max(variance, 0.0)))


def population_truth(
    outcomes: np.ndarray, scores: np.ndarray, threshold: float
) -> tuple[MetricResult, MetricResult]:
    """Finite-population sensitivity and specificity by direct count.

    Applies the classifier's scores to every record of the population with
    unit weight: N_TP..N_FN are plain counts, SN = N_TP/(N_TP + N_FN) and
    SP = N_TN/(N_TN + N_FP).
    """
    y = np.asarray(outcomes)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1 or y.size == 0:
        raise DataValidationError("outcomes and scores must be aligned non-empty vectors")
    predicted = s >= threshold
    actual = y == 1
    n_tp = int(np.sum(predicted & actual))
    n_fn = int(np.sum(~predicted & actual))
    n_tn = int(np.sum(~predicted & ~actual))
    n_fp = int(np.sum(predicted & ~actual))
    if n_tp + n_fn == 0:
        raise UndefinedMetricError("population sensitivity undefined: no positives")
    if n_tn + n_fp == 0:
        raise UndefinedMetricError("population specificity undefined: no negatives")
    sn = MetricResult(
        value=n_tp / (n_tp + n_fn), kind="sensitivity", weighting="population-truth"
    )
    sp = MetricResult(
        value=n_tn / (n_tn + n_fp), kind="specificity", weighting="population-truth"
    )
    return sn, sp


@dataclass(frozen=True)
class WeightDiagnostics:
    """Summary of a weight distribution; large cv signals influential weights."""

    cv: float
    mean: float
    min: float
    max: float
    deciles: tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {
            "cv": self.cv,
            "mean": self.mean,
            "min": self.min,
            "max": self.max,
            "deciles": list(self.deciles),
        }


def weight_diagnostics(weights: Sequence[float] | np.ndarray) -> WeightDiagnostics:
    """Coefficient of variation (population-style SD over mean) and summaries."""
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise DataValidationError("no weights supplied")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise DataValidationError("weights must be positive and finite")
    mean = float(w.mean())
    sd = float(w.std())  # divisor n
    deciles = tuple(float(q) for q in np.quantile(w, np.arange(1, 10) / 10.0))
    return WeightDiagnostics(
        cv=sd / mean, mean=mean, min=float(w.min()), max=float(w.max()), deciles=deciles
    )
