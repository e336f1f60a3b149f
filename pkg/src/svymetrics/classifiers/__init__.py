"""Baseline binary classifiers: logistic regression, Gini trees, forests."""

from typing import Sequence

from ..types import FeatureValue, Record
from .encoding import FeatureEncoder, extract_columns
from .forest import PAPER_PARITY_TREE_COUNT, ForestConfig, ForestModel, fit_forest
from .imbalance import upsample_minority
from .logistic import LogisticConfig, LogisticModel, fit_logistic
from .serialize import load_model, model_from_json_dict, model_to_json_dict, save_model
from .tree import TreeConfig, TreeModel, fit_tree, gini_impurity

__all__ = [
    "FeatureEncoder",
    "ForestConfig",
    "ForestModel",
    "LogisticConfig",
    "LogisticModel",
    "PAPER_PARITY_TREE_COUNT",
    "TreeConfig",
    "TreeModel",
    "extract_columns",
    "fit_forest",
    "fit_logistic",
    "fit_tree",
    "gini_impurity",
    "load_model",
    "model_from_json_dict",
    "model_to_json_dict",
    "predict_proba",
    "save_model",
    "upsample_minority",
]


def predict_proba(model, features: Sequence[FeatureValue]) -> float:
    """Score a single feature vector with any fitted model."""
    record = Record(record_id="_single", features=tuple(features), outcome=0, stratum="")
    return float(model.predict_proba([record])[0])
