"""ROC curves over a decision-threshold grid and trapezoidal AUROC.

The default grid is 101 evenly spaced thresholds; ``score_adapted_grid``
gives an exact-mode grid (midpoints between distinct observed scores plus
the endpoints) that eliminates discretization error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataValidationError, UndefinedMetricError
from .estimation import EstimatorWeighting, sensitivity, specificity, tally_confusion
from .types import EvaluationSet

DEFAULT_GRID_POINTS = 101


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    sensitivity: float
    specificity: float

    @property
    def fpr(self) -> float:
        return 1.0 - self.specificity


@dataclass(frozen=True)
class RocCurve:
    """(threshold, sensitivity, specificity) points, thresholds ascending."""

    points: tuple[RocPoint, ...]
    weighting: EstimatorWeighting

    def __post_init__(self):
        thresholds = [p.threshold for p in self.points]
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise DataValidationError("curve thresholds must be strictly increasing")


def uniform_grid(points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Evenly spaced thresholds over [0, 1] including both endpoints."""
    if points < 2:
        raise DataValidationError("grid needs at least the two endpoints")
    return np.linspace(0.0, 1.0, points)


def score_adapted_grid(scores: Sequence[float] | np.ndarray) -> np.ndarray:
    """Exact-mode grid: endpoints plus midpoints between distinct scores.

    Sweeping this grid visits every classification the score set can
    produce under the s >= t convention, so the resulting curve (with the
    standard (0,0)/(1,1) anchors) is the exact ROC staircase.
    """
    s = np.unique(np.asarray(scores, dtype=np.float64))
    if s.size == 0:
        raise DataValidationError("no scores supplied")
    mids = (s[:-1] + s[1:]) / 2.0
    return np.unique(np.concatenate(([0.0, 1.0], mids)))


def _check_grid(grid: np.ndarray) -> np.ndarray:
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or g.size < 2:
        raise DataValidationError("threshold grid must be a vector with >= 2 entries")
    if np.any(np.diff(g) <= 0):
        raise DataValidationError("threshold grid must be strictly increasing")
    if g[0] != 0.0 or g[-1] != 1.0:
        raise DataValidationError("threshold grid must include endpoints 0 and 1")
    return g


def roc_sweep(
    evaluation: EvaluationSet,
    grid: Sequence[float] | np.ndarray,
    weighting: EstimatorWeighting,
) -> RocCurve:
    """Compute one (sensitivity, specificity) pair per grid threshold.

    Both outcome classes must be present; otherwise the curve is undefined.
    Each point reuses the confusion tally and ratio estimators, so the
    s >= t tie convention is inherited from the tally.
    """
    g = _check_grid(grid)
    y = evaluation.outcomes
    if not (np.any(y == 1) and np.any(y == 0)):
        raise UndefinedMetricError("ROC curve undefined: need both outcome classes")
    points = []
    for t in g:
        tally = tally_confusion(evaluation, float(t))
        points.append(
            RocPoint(
                threshold=float(t),
                sensitivity=sensitivity(tally, weighting).value,
                specificity=specificity(tally, weighting).value,
            )
        )
    return RocCurve(points=tuple(points), weighting=weighting)


def auroc(curve: RocCurve) -> float:
    """Trapezoidal area under sensitivity vs (1 - specificity).

    Points are sorted by false-positive rate and anchored at (0, 0) and
    (1, 1) before integration.
    """
    if not curve.points:
        raise DataValidationError("empty ROC curve")
    pts = sorted(((p.fpr, p.sensitivity) for p in curve.points))
    xs = np.array([0.0] + [p[0] for p in pts] + [1.0])
    ys = np.array([0.0] + [p[1] for p in pts] + [1.0])
    area = float(np.sum((xs[1:] - xs[:-1]) * (ys[1:] + ys[:-1])) / 2.0)
    return min(max(area, 0.0), 1.0)
