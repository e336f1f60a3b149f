"""Sampling designs: stratified SRS draws and the train/test split.

Only stratified simple random sampling (and plain SRS as its one-stratum
special case) is implemented as a sampler; arbitrary designs are supported
on ingestion by reading user-supplied weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DegenerateSplitError, DesignError
from .types import FinitePopulation, SurveySample


@dataclass(frozen=True)
class StratifiedDesign:
    """Per-stratum sample sizes n_h for a stratified SRS design."""

    allocations: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "allocations", dict(self.allocations))
        if not self.allocations:
            raise DesignError("design must allocate at least one stratum")
        for label, n_h in self.allocations.items():
            if n_h < 1:
                raise DesignError(f"allocation for stratum {label!r} must be positive")

    @property
    def sample_size(self) -> int:
        return sum(self.allocations.values())

    def validate_against(self, population: FinitePopulation) -> None:
        """Raise DesignError unless 0 < n_h <= N_h for every stratum."""
        sizes = population.stratum_sizes
        for label, n_h in self.allocations.items():
            if label not in sizes:
                raise DesignError(f"unknown stratum label {label!r}")
            if n_h > sizes[label]:
                raise DesignError(
                    f"allocation {n_h} exceeds stratum {label!r} size {sizes[label]}"
                )


def stratified_sample(
    population: FinitePopulation,
    design: StratifiedDesign,
    rng: np.random.Generator,
) -> SurveySample:
    """Draw an SRS without replacement of size n_h within each stratum.

    Every sampled record carries pi_i = n_h/N_h and w_i = 1/pi_i, so the
    weight identity w_i = 1/pi_i holds exactly.  Strata are visited in
    allocation order, which fixes the rng consumption sequence.
    """
    design.validate_against(population)
    indices = population.stratum_indices
    ids: list[str] = []
    weights: list[np.ndarray] = []
    probs: list[np.ndarray] = []
    for label, n_h in design.allocations.items():
        stratum_rows = indices[label]
        n_big = stratum_rows.size
        chosen = stratum_rows[rng.choice(n_big, size=n_h, replace=False)]
        chosen.sort()
        pi = n_h / n_big
        ids.extend(population.records[i].record_id for i in chosen)
        probs.append(np.full(n_h, pi))
        weights.append(np.full(n_h, 1.0 / pi))
    return SurveySample(
        ids=tuple(ids),
        weights=np.concatenate(weights),
        inclusion_probs=np.concatenate(probs),
    )


def split_train_test(
    sample: SurveySample,
    eval_fraction: float,
    rng: np.random.Generator,
) -> tuple[SurveySample, SurveySample]:
    """Split a sample into a training part and an evaluation skeleton.

    The evaluation part is an SRS without replacement of size
    n_e = round(eval_fraction * n) (round-half-to-even); its members carry
    the compound weight w*_i = w_i * (n / n_e) and, when the input sample
    has inclusion probabilities, pi*_i = pi_i * (n_e / n).  Training
    members keep their original weights.
    """
    if not (0.0 < eval_fraction < 1.0):
        raise DegenerateSplitError(f"eval fraction must be in (0, 1), got {eval_fraction}")
    n = sample.size
    n_e = round(eval_fraction * n)
    if n_e < 1 or n - n_e < 1:
        raise DegenerateSplitError(
            f"split of {n} records at fraction {eval_fraction} leaves an empty side"
        )
    chosen = rng.choice(n, size=n_e, replace=False)
    eval_mask = np.zeros(n, dtype=bool)
    eval_mask[chosen] = True
    train_rows = np.nonzero(~eval_mask)[0]
    eval_rows = np.nonzero(eval_mask)[0]

    inflation = n / n_e
    training = SurveySample(
        ids=tuple(sample.ids[i] for i in train_rows),
        weights=sample.weights[train_rows],
        inclusion_probs=None
        if sample.inclusion_probs is None
        else sample.inclusion_probs[train_rows],
    )
    evaluation = SurveySample(
        ids=tuple(sample.ids[i] for i in eval_rows),
        weights=sample.weights[eval_rows] * inflation,
        inclusion_probs=None
        if sample.inclusion_probs is None
        else sample.inclusion_probs[eval_rows] * (n_e / n),
    )
    return training, evaluation


def inclusion_probability_of_evaluation(n: int, n_e: int, pi: float) -> float:
    """Compound probability pi* = pi * (n_e / n) of landing in the test split."""
    if not (0 < n_e <= n):
        raise DesignError(f"need 0 < n_e <= n, got n_e={n_e}, n={n}")
    if not (0.0 < pi <= 1.0):
        raise DesignError(f"inclusion probability must be in (0, 1], got {pi}")
    return pi * (n_e / n)
