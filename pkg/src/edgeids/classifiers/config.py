from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Optional, Union


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for all three classifiers.

    ``max_depth=None`` grows trees until purity. ``mtry`` is the number of
    features sampled per node in a forest: an int, ``"sqrt"`` (ceil of the
    square root of the feature count) or ``None`` for all features.
    ``lam`` and ``epochs`` drive the linear SVM.
    """

    max_depth: Optional[int] = None
    min_samples_split: int = 2
    n_trees: int = 100
    mtry: Union[int, str, None] = "sqrt"
    lam: float = 1e-4
    epochs: int = 10
    seed: int = 0
    bootstrap: bool = True

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1 or None, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise ValueError(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if isinstance(self.mtry, str) and self.mtry != "sqrt":
            raise ValueError(f"mtry must be an int, 'sqrt' or None, got {self.mtry!r}")
        if isinstance(self.mtry, int) and self.mtry < 1:
            raise ValueError(f"mtry must be >= 1, got {self.mtry}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")

    def resolve_mtry(self, n_features):
        if self.mtry is None:
            return n_features
        if self.mtry == "sqrt":
            return max(1, math.ceil(math.sqrt(n_features)))
        return min(int(self.mtry), n_features)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown TrainConfig fields: {sorted(unknown)}")
        return cls(**d)
