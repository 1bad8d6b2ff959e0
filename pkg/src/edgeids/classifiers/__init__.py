"""From-scratch CART tree, random forest and linear SVM."""

from .config import TrainConfig
from .forest import RandomForestModel, train_random_forest, tree_rng
from .inference import decision_boundary, decision_scores, predict
from .serialize import load_model, model_from_dict, model_to_dict, save_model
from .svm import LinearSvmModel, svm_objective, train_linear_svm
from .tree import (
    DecisionTreeModel,
    Internal,
    Leaf,
    SplitChoice,
    best_split,
    gini_impurity,
    train_decision_tree,
)

__all__ = [
    "TrainConfig", "RandomForestModel", "train_random_forest", "tree_rng",
    "decision_boundary", "decision_scores", "predict",
    "load_model", "model_from_dict", "model_to_dict", "save_model",
    "LinearSvmModel", "svm_objective", "train_linear_svm",
    "DecisionTreeModel", "Internal", "Leaf", "SplitChoice", "best_split",
    "gini_impurity", "train_decision_tree",
]
