"""Binary classification trees grown by greedy Gini splitting.

Trees are stored flat (parallel node arrays) so prediction can route whole
record batches level by level without Python recursion.  Leaf values are
positive-class proportions of the training records that reached the leaf.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DataValidationError
from ..types import Record
from .encoding import FeatureEncoder


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = None
    min_node_size: int = 1  # nodes smaller than this are not split


@dataclass(frozen=True)
class FlatTree:
    """Array-of-nodes tree; leaves point to themselves so routing is branch-free."""

    feature: np.ndarray  # int32, 0 for leaves (unused)
    threshold: np.ndarray  # float64, +inf for leaves
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # float64 positive proportion per node
    route_steps: int

    @property
    def node_count(self) -> int:
        return int(self.feature.size)

    def predict(self, x: np.ndarray) -> np.ndarray:
        n = x.shape[0]
        node = np.zeros(n, dtype=np.int32)
        rows = np.arange(n)
        for _ in range(self.route_steps):
            go_left = x[rows, self.feature[node]] <= self.threshold[node]
            node = np.where(go_left, self.left[node], self.right[node])
        return self.value[node]

    def to_json_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": ["inf" if not np.isfinite(t) else t for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "route_steps": self.route_steps,
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "FlatTree":
        threshold = np.array(
            [np.inf if t == "inf" else float(t) for t in payload["threshold"]]
        )
        return cls(
            feature=np.asarray(payload["feature"], dtype=np.int32),
            threshold=threshold,
            left=np.asarray(payload["left"], dtype=np.int32),
            right=np.asarray(payload["right"], dtype=np.int32),
            value=np.asarray(payload["value"], dtype=np.float64),
            route_steps=int(payload["route_steps"]),
        )


def gini_impurity(positive: float, total: float) -> float:
    """Gini impurity 1 - p^2 - q^2 of a node with the given class totals."""
    if total <= 0:
        return 0.0
    p = positive / total
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split_on_feature(col: np.ndarray, y: np.ndarray):
    """Best boundary for one feature; returns (score, threshold, order, cut).

    ``score`` is sum over children of (pos^2 + neg^2)/n_child, which is a
    monotone transform of the Gini decrease, so maximizing it maximizes the
    impurity decrease.  Returns None when the feature is constant.
    """
    order = np.argsort(col)
    xs = col[order]
    boundaries = np.nonzero(xs[:-1] < xs[1:])[0]
    if boundaries.size == 0:
        return None
    cum_pos = np.cumsum(y[order])
    m = col.size
    total_pos = cum_pos[-1]
    n_left = (boundaries + 1).astype(np.float64)
    pos_left = cum_pos[boundaries]
    neg_left = n_left - pos_left
    n_right = m - n_left
    pos_right = total_pos - pos_left
    neg_right = n_right - pos_right
    score = (pos_left * pos_left + neg_left * neg_left) / n_left + (
        pos_right * pos_right + neg_right * neg_right
    ) / n_right
    best = int(np.argmax(score))  # first max -> smallest split point
    cut = int(boundaries[best])
    threshold = (xs[cut] + xs[cut + 1]) / 2.0
    return float(score[best]), float(threshold), order, cut


def grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    *,
    min_node_size: int = 1,
    max_depth: int | None = None,
    m_try: int | None = None,
    rng: np.random.Generator | None = None,
) -> FlatTree:
    """Grow a Gini tree on an encoded matrix.

    When ``m_try`` is given (and smaller than the feature count) each node
    considers a random feature subset drawn from ``rng``; otherwise the
    search is exhaustive and deterministic.  Ties between equal-gain splits
    resolve to the lowest feature index, then the smallest split point.
    """
    n, width = x.shape
    if n == 0:
        raise DataValidationError("cannot grow a tree on empty data")
    y = np.asarray(y, dtype=np.float64)
    use_subset = m_try is not None and width > 0 and m_try < width
    if use_subset and rng is None:
        raise DataValidationError("feature subsetting requires an rng")

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    depth_of: list[int] = []

    def new_node(depth: int, proportion: float) -> int:
        idx = len(feature)
        feature.append(0)
        threshold.append(np.inf)
        left.append(idx)
        right.append(idx)
        value.append(proportion)
        depth_of.append(depth)
        return idx

    root_rows = np.arange(n)
    root = new_node(0, float(y.mean()))
    stack: list[tuple[int, np.ndarray, int]] = [(root, root_rows, 0)]
    max_internal_depth = -1
    while stack:
        node_id, rows, depth = stack.pop()
        m = rows.size
        pos = float(y[rows].sum())
        if (
            m < 2
            or m < min_node_size
            or pos == 0.0
            or pos == m
            or (max_depth is not None and depth >= max_depth)
        ):
            continue
        if use_subset:
            if m_try == 1:
                candidates = [int(rng.integers(width))]
            else:
                candidates = sorted(int(f) for f in rng.choice(width, size=m_try, replace=False))
        else:
            candidates = range(width)
        parent_score = (pos * pos + (m - pos) * (m - pos)) / m
        y_rows = y[rows]
        best = None
        best_feature = -1
        for f in candidates:
            found = _best_split_on_feature(x[rows, f], y_rows)
            if found is None:
                continue
            if best is None or found[0] > best[0]:
                best = found
                best_feature = f
        if best is None or best[0] <= parent_score:
            continue  # zero achievable gain
        score, thr, order, cut = best
        left_rows = rows[order[: cut + 1]]
        right_rows = rows[order[cut + 1 :]]
        feature[node_id] = best_feature
        threshold[node_id] = thr
        left_id = new_node(depth + 1, float(y[left_rows].mean()))
        right_id = new_node(depth + 1, float(y[right_rows].mean()))
        left[node_id] = left_id
        right[node_id] = right_id
        max_internal_depth = max(max_internal_depth, depth)
        stack.append((right_id, right_rows, depth + 1))
        stack.append((left_id, left_rows, depth + 1))

    return FlatTree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.asarray(value, dtype=np.float64),
        route_steps=max_internal_depth + 1,
    )


@dataclass(frozen=True)
class TreeModel:
    """A standalone CART classifier (exhaustive deterministic splits)."""

    encoder: FeatureEncoder
    tree: FlatTree
    config: TreeConfig

    def predict_proba(self, records: Sequence[Record]) -> np.ndarray:
        return self.tree.predict(self.encoder.transform(records))

    def predict_proba_columns(
        self, columns: Sequence[np.ndarray], n_rows: int | None = None
    ) -> np.ndarray:
        return self.tree.predict(self.encoder.transform_columns(columns, n_rows=n_rows))


def fit_tree(records: Sequence[Record], config: TreeConfig = TreeConfig()) -> TreeModel:
    """Fit a CART tree by greedy binary splitting on Gini impurity decrease."""
    if not records:
        raise DataValidationError("no training records")
    encoder = FeatureEncoder.fit(records)
    x = encoder.transform(records)
    y = np.array([rec.outcome for rec in records], dtype=np.float64)
    tree = grow_tree(
        x, y, min_node_size=config.min_node_size, max_depth=config.max_depth
    )
    return TreeModel(encoder=encoder, tree=tree, config=config)
