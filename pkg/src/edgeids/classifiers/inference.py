"""Uniform predict / decision-score interface over the three model types.

Decision boundaries (ties go to the attack class):

* tree: leaf positive fraction ``>= 0.5``
* forest: share of trees voting attack ``>= 0.5``
* SVM: margin ``w . x + b >= 0``
"""

from __future__ import annotations

import numpy as np

from .forest import RandomForestModel
from .svm import LinearSvmModel
from .tree import DecisionTreeModel


def _check_width(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"model expects {model.n_features} features, got shape {X.shape}"
        )
    return X


def decision_scores(model, X) -> np.ndarray:
    """Real-valued attack score per row; higher means more attack-like."""
    X = _check_width(model, X)
    if isinstance(model, DecisionTreeModel):
        return model.positive_fraction[model.apply(X)]
    if isinstance(model, RandomForestModel):
        votes = np.zeros(X.shape[0])
        for tree in model.trees:
            votes += tree.leaf_label[tree.apply(X)]
        return votes / model.n_trees
    if isinstance(model, LinearSvmModel):
        return X @ model.weights + model.bias
    raise TypeError(f"unsupported model type {type(model).__name__}")


def decision_boundary(model):
    if isinstance(model, (DecisionTreeModel, RandomForestModel)):
        return 0.5
    if isinstance(model, LinearSvmModel):
        return 0.0
    raise TypeError(f"unsupported model type {type(model).__name__}")


def predict(model, X) -> np.ndarray:
    """Binary predictions (1 = attack)."""
    return (decision_scores(model, X) >= decision_boundary(model)).astype(np.int64)
