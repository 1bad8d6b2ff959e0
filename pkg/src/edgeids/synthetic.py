"""Two-cluster Gaussian stand-in for flow data when no CSV is on disk."""

from __future__ import annotations

import math

import numpy as np

from .exceptions import DataError
from .flow_ingest import FeatureMatrix


def generate_synthetic(n=1000, d=3, separation=8.0, class_ratio=0.5, seed=0) -> FeatureMatrix:
    """Two unit-variance Gaussian clusters centred at ``+-separation/2 * u``.

    ``u`` is a seeded random unit direction in ``d`` dimensions.
    ``class_ratio`` is the attack share: ``round(class_ratio * n)`` rows get
    label 1. Rows come out in seeded random order.
    """
    if n < 4:
        raise DataError(f"need n >= 4, got {n}")
    if d < 1:
        raise DataError(f"need d >= 1, got {d}")
    if not separation > 0:
        raise DataError(f"separation must be positive, got {separation}")
    if not 0 < class_ratio < 1:
        raise DataError(f"class_ratio must lie in (0, 1), got {class_ratio}")
    n_attack = int(math.floor(class_ratio * n + 0.5))
    if n_attack < 2 or n - n_attack < 2:
        raise DataError(f"class_ratio {class_ratio} leaves fewer than 2 rows in a class")

    rng = np.random.default_rng(seed)
    u = rng.standard_normal(d)
    u /= np.linalg.norm(u)
    labels = np.r_[np.zeros(n - n_attack, dtype=np.int64), np.ones(n_attack, dtype=np.int64)]
    centres = np.where(labels[:, None] == 1, 0.5, -0.5) * separation * u
    X = centres + rng.standard_normal((n, d))
    order = rng.permutation(n)
    return FeatureMatrix(X[order], labels[order], tuple(f"f{j}" for j in range(d)))
