"""Random forest of CART trees (bootstrap rows, per-node feature sampling)."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import TrainConfig
from .tree import DecisionTreeModel, train_decision_tree


def tree_rng(seed, index):
    """Generator for tree ``index`` of a forest seeded with ``seed``.

    The stream depends only on ``(seed, index)`` through numpy's
    SeedSequence spawn keys, so trees can be trained in any order.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),)))


@dataclass(frozen=True, eq=False)
class RandomForestModel:
    trees: tuple
    mtry: int
    seed: int
    config: TrainConfig

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        if not self.trees:
            raise ValueError("a forest needs at least one tree")
        widths = {t.n_features for t in self.trees}
        if len(widths) != 1:
            raise ValueError(f"trees disagree on feature count: {sorted(widths)}")

    @property
    def n_trees(self):
        return len(self.trees)

    @property
    def n_features(self):
        return self.trees[0].n_features

    def same_structure(self, other):
        return self.n_trees == other.n_trees and all(
            a.same_structure(b) for a, b in zip(self.trees, other.trees)
        )


def _fit_one(X, y, cfg, mtry, index):
    rng = tree_rng(cfg.seed, index)
    if cfg.bootstrap:
        rows = rng.integers(0, X.shape[0], X.shape[0])
        X, y = X[rows], y[rows]
    return train_decision_tree(X, y, cfg, rng=rng, mtry=mtry)


def train_random_forest(X, y, cfg: TrainConfig = TrainConfig(), n_jobs: int = 1) -> RandomForestModel:
    """Fit ``cfg.n_trees`` trees, each on its own bootstrap sample.

    Per-node feature sampling draws ``cfg.resolve_mtry(d)`` features. Set
    ``cfg.bootstrap=False`` to train every tree on the full data.
    ``n_jobs > 1`` trains trees in worker processes; the result is the same.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot train a forest on empty input")
    mtry = cfg.resolve_mtry(X.shape[1])
    if n_jobs > 1:
        with ProcessPoolExecutor(n_jobs) as pool:
            futures = [pool.submit(_fit_one, X, y, cfg, mtry, i) for i in range(cfg.n_trees)]
            trees = [f.result() for f in futures]
    else:
        trees = [_fit_one(X, y, cfg, mtry, i) for i in range(cfg.n_trees)]
    return RandomForestModel(tuple(trees), mtry, cfg.seed, cfg)
