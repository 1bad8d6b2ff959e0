"""Versioned JSON model format.

Floats are written with ``repr`` round-tripping, so a reloaded model
predicts bit-for-bit like the original.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .config import TrainConfig
from .forest import RandomForestModel
from .svm import LinearSvmModel
from .tree import DecisionTreeModel

FORMAT = "edgeids-model"
VERSION = 1


def _tree_dict(t):
    return {
        "n_features": t.n_features,
        "feature": t.feature.tolist(),
        "threshold": t.threshold.tolist(),
        "left": t.left.tolist(),
        "right": t.right.tolist(),
        "positive_fraction": t.positive_fraction.tolist(),
        "n_samples": t.n_samples.tolist(),
    }


def _tree_from(d, cfg):
    return DecisionTreeModel(
        np.array(d["feature"], dtype=np.int64),
        np.array(d["threshold"], dtype=np.float64),
        np.array(d["left"], dtype=np.int64),
        np.array(d["right"], dtype=np.int64),
        np.array(d["positive_fraction"], dtype=np.float64),
        np.array(d["n_samples"], dtype=np.int64),
        int(d["n_features"]),
        cfg,
    )


def model_to_dict(model):
    if isinstance(model, DecisionTreeModel):
        body = {"kind": "decision_tree", "config": model.config.to_dict(), "tree": _tree_dict(model)}
    elif isinstance(model, RandomForestModel):
        body = {
            "kind": "random_forest",
            "config": model.config.to_dict(),
            "mtry": model.mtry,
            "seed": model.seed,
            "trees": [_tree_dict(t) for t in model.trees],
        }
    elif isinstance(model, LinearSvmModel):
        body = {
            "kind": "linear_svm",
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "lam": model.lam,
            "epochs": model.epochs,
            "steps": model.steps,
            "standardized": model.standardized,
            "objective_history": list(model.objective_history),
        }
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return {"format": FORMAT, "version": VERSION, **body}


def model_from_dict(d):
    if d.get("format") != FORMAT:
        raise ValueError(f"not an {FORMAT} record")
    if d.get("version") != VERSION:
        raise ValueError(f"unsupported model format version {d.get('version')}")
    kind = d["kind"]
    if kind == "linear_svm":
        return LinearSvmModel(
            np.array(d["weights"], dtype=np.float64), d["bias"], d["lam"], d["epochs"],
            d["steps"], d["standardized"], tuple(d["objective_history"]),
        )
    cfg = TrainConfig.from_dict(d["config"])
    if kind == "decision_tree":
        return _tree_from(d["tree"], cfg)
    if kind == "random_forest":
        trees = tuple(_tree_from(t, cfg) for t in d["trees"])
        return RandomForestModel(trees, d["mtry"], d["seed"], cfg)
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path):
    Path(path).write_text(json.dumps(model_to_dict(model), sort_keys=True) + "\n")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))
