"""Linear SVM trained with Pegasos (primal stochastic sub-gradient descent)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TrainConfig


@dataclass(frozen=True, eq=False)
class LinearSvmModel:
    """Primal linear SVM ``sign(w . x + b)``.

    ``steps`` counts the sub-gradient steps taken so far; a warm-started
    run continues the ``1 / (lam * t)`` schedule from there.
    ``objective_history`` holds the regularized hinge objective on the
    training data after each epoch.
    """

    weights: np.ndarray
    bias: float
    lam: float
    epochs: int
    steps: int = 0
    standardized: bool = True
    objective_history: tuple = ()

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        if w.ndim != 1:
            raise ValueError("weights must be a vector")
        if not (np.all(np.isfinite(w)) and np.isfinite(self.bias)):
            raise ValueError("SVM weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def n_features(self):
        return self.weights.size

    @classmethod
    def zeros(cls, n_features, lam=1e-4):
        return cls(np.zeros(n_features), 0.0, lam, 0)


def svm_objective(w_aug, Xa, s, lam):
    hinge = np.maximum(0.0, 1.0 - s * (Xa @ w_aug))
    return float(0.5 * lam * (w_aug @ w_aug) + hinge.mean())


def train_linear_svm(X, y, cfg: TrainConfig = TrainConfig(), init: LinearSvmModel = None,
                     epochs=None, standardized=True) -> LinearSvmModel:
    """Pegasos on the hinge loss with L2 penalty ``lam / 2 * ||w||**2``.

    Labels map 0 -> -1 and 1 -> +1. The bias is learned as the weight of a
    constant feature, so it is penalized together with ``w``. One epoch is
    one pass over a seeded shuffle of the rows, one row per step, with step
    size ``1 / (lam * t)``. After each step the iterate is projected onto
    the ball of radius ``1 / sqrt(lam)``. The returned weights are the
    average of the iterates weighted by step index ``t``; the last iterate
    alone is too noisy at small ``lam``.

    ``init`` warm-starts from an existing model and continues its step
    counter; ``epochs`` overrides ``cfg.epochs``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot train an SVM on empty input")
    if np.unique(y).size < 2:
        raise ValueError("linear SVM training needs both classes present")
    n, d = X.shape
    lam = cfg.lam
    n_epochs = cfg.epochs if epochs is None else epochs

    Xa = np.hstack([X, np.ones((n, 1))])
    s = np.where(y == 1, 1.0, -1.0)
    if init is None:
        w = np.zeros(d + 1)
        t = 0
    else:
        if init.n_features != d:
            raise ValueError(f"warm start has {init.n_features} features, data has {d}")
        w = np.append(init.weights, init.bias)
        t = init.steps
    history = []
    radius = 1.0 / np.sqrt(lam)
    rng = np.random.default_rng(cfg.seed)
    avg = w.copy()
    weight_sum = 0.0

    for _ in range(n_epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            xi = Xa[i]
            violated = s[i] * (w @ xi) < 1.0
            w *= 1.0 - eta * lam
            if violated:
                w += (eta * s[i]) * xi
            norm = np.sqrt(w @ w)
            if norm > radius:
                w *= radius / norm
            weight_sum += t
            avg += (t / weight_sum) * (w - avg)
        history.append(svm_objective(avg, Xa, s, lam))

    return LinearSvmModel(avg[:-1], avg[-1], lam, n_epochs, t, standardized, tuple(history))
