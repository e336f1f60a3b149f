"""Bootstrap-aggregated Gini trees (random forest).

Each tree trains on a bootstrap resample of size n with ``m_try`` features
considered per split.  Per-tree randomness derives from (seed, tree index),
so trees are reproducible individually and the forest is deterministic for
a fixed seed regardless of training-record order (records are canonically
sorted by id before fitting).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DataValidationError
from ..rng import stream_seed
from ..types import Record
from .encoding import FeatureEncoder
from .tree import FlatTree, grow_tree

PAPER_PARITY_TREE_COUNT = 1000  # the cited simulations use 1,000 trees


@dataclass(frozen=True)
class ForestConfig:
    trees: int = 100
    m_try: int | None = None  # None -> floor(sqrt(encoded feature count))
    min_node_size: int = 1
    max_depth: int | None = None
    bootstrap: bool = True


@dataclass(frozen=True)
class ForestModel:
    encoder: FeatureEncoder
    trees: tuple[FlatTree, ...]
    tree_seeds: tuple[int, ...]
    config: ForestConfig

    def predict_proba(self, records: Sequence[Record]) -> np.ndarray:
        return self._score(self.encoder.transform(records))

    def predict_proba_columns(
        self, columns: Sequence[np.ndarray], n_rows: int | None = None
    ) -> np.ndarray:
        return self._score(self.encoder.transform_columns(columns, n_rows=n_rows))

    def _score(self, x: np.ndarray) -> np.ndarray:
        total = np.zeros(x.shape[0])
        for tree in self.trees:
            total += tree.predict(x)
        return total / len(self.trees)


def fit_forest(
    records: Sequence[Record],
    config: ForestConfig = ForestConfig(),
    rng: np.random.Generator | int = 0,
) -> ForestModel:
    """Fit a forest; ``rng`` may be a generator or a bare integer seed."""
    if not records:
        raise DataValidationError("no training records")
    if config.trees < 1:
        raise DataValidationError("forest needs at least one tree")
    if isinstance(rng, (int, np.integer)):
        base_seed = int(rng)
    else:
        base_seed = int(rng.integers(np.iinfo(np.int64).max))
    ordered = sorted(records, key=lambda rec: rec.record_id)
    encoder = FeatureEncoder.fit(ordered)
    x = encoder.transform(ordered)
    y = np.array([rec.outcome for rec in ordered], dtype=np.float64)
    n, width = x.shape
    m_try = config.m_try if config.m_try is not None else max(1, math.isqrt(width))
    m_try = min(m_try, width)

    trees = []
    seeds = []
    for k in range(config.trees):
        tree_seed = stream_seed(base_seed, k)
        seeds.append(tree_seed)
        tree_rng = np.random.default_rng(tree_seed)
        rows = tree_rng.integers(0, n, size=n) if config.bootstrap else np.arange(n)
        trees.append(
            grow_tree(
                x[rows],
                y[rows],
                min_node_size=config.min_node_size,
                max_depth=config.max_depth,
                m_try=m_try if m_try < width else None,
                rng=tree_rng,
            )
        )
    return ForestModel(
        encoder=encoder, trees=tuple(trees), tree_seeds=tuple(seeds), config=config
    )
