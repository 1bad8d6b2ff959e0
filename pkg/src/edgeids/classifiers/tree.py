"""CART decision trees with Gini impurity and midpoint thresholds."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .config import TrainConfig

# decreases closer than this are treated as ties
_TIE_TOL = 1e-12


def gini_impurity(counts) -> float:
    """Gini impurity ``1 - sum(p_c**2)`` of a vector of class counts."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("gini impurity of an empty node is undefined")
    p = counts / total
    return float(1.0 - np.sum(p * p))


@dataclass(frozen=True)
class SplitChoice:
    feature: int
    threshold: float
    impurity_decrease: float


@dataclass(frozen=True)
class Leaf:
    label: int
    positive_fraction: float
    n_samples: int


@dataclass(frozen=True)
class Internal:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Internal]


def _best_split_rows(X, y, rows, features, allow_zero=False) -> Optional[SplitChoice]:
    y_node = y[rows]
    n = rows.size
    n_pos = int(y_node.sum())
    if n < 2 or n_pos == 0 or n_pos == n:
        return None
    parent = 2.0 * n_pos * (n - n_pos) / (n * n)
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left

    best = None
    for f in sorted(int(f) for f in features):
        x = X[rows, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        pos_left = np.cumsum(y_node[order])[:-1].astype(np.float64)
        pos_right = n_pos - pos_left
        # n_side * gini_side, with binary gini = 2 p (1 - p)
        child = (
            2.0 * pos_left * (n_left - pos_left) / n_left
            + 2.0 * pos_right * (n_right - pos_right) / n_right
        )
        decrease = parent - child / n
        decrease[~valid] = -np.inf
        top = decrease.max()
        i = int(np.flatnonzero(decrease >= top - _TIE_TOL)[0])
        if best is not None and top <= best.impurity_decrease + _TIE_TOL:
            continue
        lo, hi = xs[i], xs[i + 1]
        thr = lo + (hi - lo) / 2.0
        if not lo <= thr < hi:
            thr = lo
        best = SplitChoice(f, float(thr), float(top))

    if best is None or (best.impurity_decrease <= _TIE_TOL and not allow_zero):
        return None
    return best


def best_split(X, y, candidate_features=None) -> Optional[SplitChoice]:
    """Best Gini split of ``(X, y)`` over the candidate features.

    Thresholds are midpoints between adjacent distinct sorted values; rows
    with ``x <= threshold`` go left. Ties in impurity decrease go to the
    lower feature index, then the lower threshold. Returns None when no
    split lowers impurity.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim == 1:
        X = X[:, None]
    if candidate_features is None:
        candidate_features = range(X.shape[1])
    return _best_split_rows(X, y, np.arange(X.shape[0]), candidate_features)


@dataclass(frozen=True, eq=False)
class DecisionTreeModel:
    """A fitted tree stored as flat preorder node arrays.

    ``feature[i] == -1`` marks node ``i`` as a leaf. ``root`` gives the
    nested :class:`Leaf`/:class:`Internal` view.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    positive_fraction: np.ndarray
    n_samples: np.ndarray
    n_features: int
    config: TrainConfig

    def __post_init__(self):
        for name in ("feature", "threshold", "left", "right", "positive_fraction", "n_samples"):
            getattr(self, name).setflags(write=False)

    @property
    def n_nodes(self):
        return self.feature.size

    @property
    def leaf_label(self):
        return (self.positive_fraction >= 0.5).astype(np.int64)

    @property
    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    @property
    def root(self) -> TreeNode:
        return self._node(0)

    def _node(self, i) -> TreeNode:
        if self.feature[i] < 0:
            return Leaf(int(self.leaf_label[i]), float(self.positive_fraction[i]), int(self.n_samples[i]))
        return Internal(
            int(self.feature[i]), float(self.threshold[i]),
            self._node(self.left[i]), self._node(self.right[i]),
        )

    def apply(self, X):
        """Index of the leaf each row of ``X`` lands in."""
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] >= 0]
        return node

    def same_structure(self, other):
        return all(
            np.array_equal(getattr(self, a), getattr(other, a))
            for a in ("feature", "threshold", "left", "right", "positive_fraction", "n_samples")
        )


def train_decision_tree(X, y, cfg: TrainConfig = TrainConfig(), rng=None, mtry=None) -> DecisionTreeModel:
    """Grow a CART tree depth-first.

    Growth stops at ``cfg.max_depth``, below ``cfg.min_samples_split`` rows,
    at pure nodes, and where no split reduces impurity. With ``mtry`` set
    (forests), each node draws that many candidate features from ``rng``;
    if none of them can split the node the remaining features are tried
    before giving up.

    An impure node where no split lowers Gini (XOR-like cells) still takes
    the first valid split by the tie rule, so unlimited depth always fits
    consistent training data exactly.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot train a tree on empty input")
    if y.shape != (X.shape[0],):
        raise ValueError("X and y disagree on the number of rows")
    n_features = X.shape[1]
    sample_features = mtry is not None and mtry < n_features
    if sample_features and rng is None:
        raise ValueError("feature subsampling needs an rng")

    feature, threshold, left, right, frac, count = [], [], [], [], [], []

    def new_node(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        frac.append(float(y[rows].mean()))
        count.append(rows.size)
        return len(feature) - 1

    stack = [(new_node(np.arange(X.shape[0])), np.arange(X.shape[0]), 0)]
    while stack:
        node, rows, depth = stack.pop()
        if (cfg.max_depth is not None and depth >= cfg.max_depth) or rows.size < cfg.min_samples_split:
            continue
        if sample_features:
            perm = rng.permutation(n_features)
            split = _best_split_rows(X, y, rows, perm[:mtry])
            if split is None:
                split = _best_split_rows(X, y, rows, perm[mtry:])
        else:
            split = _best_split_rows(X, y, rows, range(n_features))
        if split is None:
            split = _best_split_rows(X, y, rows, range(n_features), allow_zero=True)
        if split is None:
            continue
        goes_left = X[rows, split.feature] <= split.threshold
        lrows, rrows = rows[goes_left], rows[~goes_left]
        feature[node] = split.feature
        threshold[node] = split.threshold
        left[node] = new_node(lrows)
        right[node] = new_node(rrows)
        # right pushed first so the left subtree is numbered first
        stack.append((right[node], rrows, depth + 1))
        stack.append((left[node], lrows, depth + 1))

    return DecisionTreeModel(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(frac, dtype=np.float64),
        np.array(count, dtype=np.int64),
        n_features,
        cfg,
    )
