"""Model round trips to self-describing JSON documents.

Each document carries a schema version, the fitted encoder, and the model
parameters, so the CLI's train/predict pipeline can run statelessly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import SchemaError
from .encoding import FeatureEncoder
from .forest import ForestConfig, ForestModel
from .logistic import LogisticModel
from .tree import FlatTree, TreeConfig, TreeModel

MODEL_SCHEMA_VERSION = "1"


def model_to_json_dict(model) -> dict:
    if isinstance(model, LogisticModel):
        return {
            "schema_version": MODEL_SCHEMA_VERSION,
            "model": "logistic",
            "encoder": model.encoder.to_json_dict(),
            "coefficients": model.coefficients.tolist(),
            "coefficient_standard_errors": model.coefficient_standard_errors.tolist(),
            "iterations": model.iterations,
            "final_deviance_change": model.final_deviance_change,
            "deviance_path": list(model.deviance_path),
        }
    if isinstance(model, TreeModel):
        return {
            "schema_version": MODEL_SCHEMA_VERSION,
            "model": "tree",
            "encoder": model.encoder.to_json_dict(),
            "tree": model.tree.to_json_dict(),
            "config": {
                "max_depth": model.config.max_depth,
                "min_node_size": model.config.min_node_size,
            },
        }
    if isinstance(model, ForestModel):
        return {
            "schema_version": MODEL_SCHEMA_VERSION,
            "model": "forest",
            "encoder": model.encoder.to_json_dict(),
            "trees": [t.to_json_dict() for t in model.trees],
            "tree_seeds": list(model.tree_seeds),
            "config": {
                "trees": model.config.trees,
                "m_try": model.config.m_try,
                "min_node_size": model.config.min_node_size,
                "max_depth": model.config.max_depth,
                "bootstrap": model.config.bootstrap,
            },
        }
    raise SchemaError(f"cannot serialize model of type {type(model).__name__}")


def model_from_json_dict(payload: dict):
    version = payload.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise SchemaError(f"unsupported model schema version {version!r}")
    kind = payload.get("model")
    encoder = FeatureEncoder.from_json_dict(payload["encoder"])
    if kind == "logistic":
        return LogisticModel(
            encoder=encoder,
            coefficients=np.asarray(payload["coefficients"], dtype=np.float64),
            iterations=int(payload["iterations"]),
            final_deviance_change=float(payload["final_deviance_change"]),
            deviance_path=tuple(payload["deviance_path"]),
            coefficient_standard_errors=np.asarray(
                payload["coefficient_standard_errors"], dtype=np.float64
            ),
        )
    if kind == "tree":
        cfg = payload["config"]
        return TreeModel(
            encoder=encoder,
            tree=FlatTree.from_json_dict(payload["tree"]),
            config=TreeConfig(
                max_depth=cfg["max_depth"], min_node_size=cfg["min_node_size"]
            ),
        )
    if kind == "forest":
        cfg = payload["config"]
        return ForestModel(
            encoder=encoder,
            trees=tuple(FlatTree.from_json_dict(t) for t in payload["trees"]),
            tree_seeds=tuple(int(s) for s in payload["tree_seeds"]),
            config=ForestConfig(
                trees=cfg["trees"],
                m_try=cfg["m_try"],
                min_node_size=cfg["min_node_size"],
                max_depth=cfg["max_depth"],
                bootstrap=cfg["bootstrap"],
            ),
        )
    raise SchemaError(f"unknown model kind {kind!r}")


def save_model(model, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_json_dict(model), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_model(path: str | Path):
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"model file {path} is not valid JSON: {exc}") from exc
    return model_from_json_dict(payload)
