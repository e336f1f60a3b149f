"""Minority-class upsampling for training data.

Applies to training data only; the test split stays untouched so that
evaluation reflects the population's class balance.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import DataValidationError
from ..types import Record


def upsample_minority(
    records: Sequence[Record], rng: np.random.Generator
) -> list[Record]:
    """Duplicate minority-class records (with replacement) to equal counts.

    All original records are retained in input order; duplicates are
    appended.  Already balanced input is returned unchanged (as a copy).
    """
    positives = [rec for rec in records if rec.outcome == 1]
    negatives = [rec for rec in records if rec.outcome == 0]
    if not positives or not negatives:
        raise DataValidationError("upsampling requires both classes present")
    out = list(records)
    if len(positives) == len(negatives):
        return out
    minority = positives if len(positives) < len(negatives) else negatives
    deficit = abs(len(positives) - len(negatives))
    picks = rng.integers(0, len(minority), size=deficit)
    out.extend(minority[int(i)] for i in picks)
    return out
