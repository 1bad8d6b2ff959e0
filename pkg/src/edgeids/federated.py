"""In-process federated training with trust-aware aggregation.

Each round the server broadcasts the global model, every client trains on
its private partition, the server scores each returned update on a held-out
validation set, folds the score into a per-client trust value, and combines
the updates with weights proportional to sample count (FedAvg) or to sample
count times trust (trust-aware).

Linear SVM updates are averaged parameter-wise. Forests cannot be averaged,
so the global forest is a weighted draw of trees from the client forests.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classifiers import (
    LinearSvmModel,
    RandomForestModel,
    TrainConfig,
    decision_scores,
    predict,
    train_linear_svm,
    train_random_forest,
)
from .exceptions import AggregationHalt, DataError, FederationError
from .flow_ingest import FeatureMatrix, partition_clients, stratified_split
from .metrics import confusion, evaluate, metrics_from_confusion

logger = logging.getLogger(__name__)

FEDAVG = "fedavg"
TRUST_AWARE = "trust_aware"
_STRATEGY_ALIASES = {
    "fedavg": FEDAVG, "fedavgbaseline": FEDAVG, "fedavg_baseline": FEDAVG,
    "trust_aware": TRUST_AWARE, "trustaware": TRUST_AWARE, "trust-aware": TRUST_AWARE,
}
MODEL_KINDS = ("svm", "forest")


def normalize_strategy(name):
    try:
        return _STRATEGY_ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown aggregation strategy {name!r}") from None


def derive_seed(seed, *keys):
    """Deterministic 32-bit child seed for ``(seed, *keys)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1)[0])


# --------------------------------------------------------------------------
# payloads and updates


@dataclass(frozen=True, eq=False)
class SvmPayload:
    weights: np.ndarray
    bias: float
    steps: int
    lam: float

    def to_model(self):
        return LinearSvmModel(self.weights, self.bias, self.lam, 0, self.steps)


@dataclass(frozen=True, eq=False)
class ForestPayload:
    trees: tuple
    mtry: int
    config: TrainConfig

    def to_model(self):
        if not self.trees:
            raise DataError("forest payload carries no trees")
        return RandomForestModel(self.trees, self.mtry, self.config.seed, self.config)


def payload_of(model):
    if isinstance(model, LinearSvmModel):
        return SvmPayload(model.weights, model.bias, model.steps, model.lam)
    if isinstance(model, RandomForestModel):
        return ForestPayload(model.trees, model.mtry, model.config)
    raise TypeError(f"no payload form for {type(model).__name__}")


@dataclass(frozen=True)
class ClientUpdate:
    """What a client sends to the server: model parameters, never rows."""

    client_id: int
    round: int
    payload: object
    n_samples: int
    local_indicators: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("an update must summarize at least one sample")


def _f1(model, data: FeatureMatrix):
    return metrics_from_confusion(confusion(data.labels, predict(model, data.features))).f1


def client_local_train(
    client_data: FeatureMatrix,
    model_kind: str,
    global_model=None,
    cfg: TrainConfig = TrainConfig(),
    local_epochs: int = 1,
    client_id: int = 0,
    round_index: int = 0,
) -> ClientUpdate:
    """Train on one client's private rows and package the result.

    SVM clients continue SGD from the broadcast model for ``local_epochs``
    passes. Forest clients fit a fresh forest of ``cfg.n_trees`` trees;
    the broadcast forest is not reused. An SVM client holding a single
    class returns the broadcast model unchanged and sets the
    ``single_class`` indicator.
    """
    if client_data.n_rows < 1:
        raise DataError("client has no data")
    X, y = client_data.features, client_data.labels
    indicators = {"single_class": False}

    if model_kind == "svm":
        init = global_model if global_model is not None else LinearSvmModel.zeros(X.shape[1], cfg.lam)
        if np.unique(y).size < 2:
            model = init
            indicators["single_class"] = True
        else:
            model = train_linear_svm(X, y, cfg, init=init, epochs=local_epochs)
    elif model_kind == "forest":
        model = train_random_forest(X, y, cfg)
    else:
        raise ValueError(f"unknown model kind {model_kind!r}")

    indicators["train_f1"] = _f1(model, client_data)
    return ClientUpdate(client_id, round_index, payload_of(model), client_data.n_rows, indicators)


def score_update(update: ClientUpdate, server_validation: FeatureMatrix) -> float:
    """F1 of the update's model on the server's validation rows."""
    n_benign, n_attack = server_validation.class_counts()
    if n_benign == 0 or n_attack == 0:
        raise DataError("server validation set must contain both classes")
    return _f1(update.payload.to_model(), server_validation)


# --------------------------------------------------------------------------
# trust and weighting


@dataclass(frozen=True)
class TrustLedger:
    """Per-client trust, an exponential moving average of validation F1."""

    trust: dict
    beta: float = 0.5
    history: tuple = ()

    def __post_init__(self):
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")

    @classmethod
    def initial(cls, client_ids, beta=0.5):
        return cls({int(c): 1.0 for c in client_ids}, beta)

    def values(self, client_ids):
        return np.array([self.trust[c] for c in client_ids])


def update_trust(ledger: TrustLedger, scores: dict) -> TrustLedger:
    """``trust <- beta * trust + (1 - beta) * clamp(score, 0, 1)`` per client."""
    unknown = set(scores) - set(ledger.trust)
    if unknown:
        raise KeyError(f"scores for unknown clients: {sorted(unknown)}")
    missing = set(ledger.trust) - set(scores)
    if missing:
        raise KeyError(f"no score for clients: {sorted(missing)}")
    b = ledger.beta
    trust = {
        c: b * t + (1.0 - b) * min(max(float(scores[c]), 0.0), 1.0)
        for c, t in ledger.trust.items()
    }
    history = ledger.history + ({c: float(scores[c]) for c in sorted(scores)},)
    return TrustLedger(trust, b, history)


def aggregation_weights(n, trust, strategy) -> np.ndarray:
    """Normalized aggregation weights.

    FedAvg: proportional to sample counts. Trust-aware: proportional to
    sample count times trust. Raises :class:`AggregationHalt` when the
    total mass is zero.
    """
    n = np.asarray(n, dtype=np.float64)
    trust = np.asarray(trust, dtype=np.float64)
    if n.shape != trust.shape:
        raise ValueError("sample counts and trust values differ in length")
    strategy = normalize_strategy(strategy)
    mass = n if strategy == FEDAVG else n * trust
    total = mass.sum()
    if not total > 0:
        raise AggregationHalt("every client has zero aggregation mass")
    return mass / total


# --------------------------------------------------------------------------
# aggregation


def apportion(weights, total):
    """Largest-remainder apportionment of ``total`` seats.

    Remainder ties go to the lower index.
    """
    w = np.asarray(weights, dtype=np.float64)
    quotas = w * total
    seats = np.floor(quotas).astype(np.int64)
    left = int(total - seats.sum())
    if left > 0:
        remainders = quotas - seats
        order = sorted(range(w.size), key=lambda i: (-remainders[i], i))
        for i in order[:left]:
            seats[i] += 1
    return seats


def _capped_apportion(weights, total, capacity):
    weights = np.asarray(weights, dtype=np.float64).copy()
    capacity = np.asarray(capacity, dtype=np.int64)
    if total > capacity[weights > 0].sum():
        raise DataError(f"cannot draw {total} trees from a pool of {capacity[weights > 0].sum()}")
    seats = np.zeros(weights.size, dtype=np.int64)
    open_ = (weights > 0) & (capacity > 0)
    remaining = total
    while remaining > 0:
        w = np.where(open_, weights, 0.0)
        extra = apportion(w / w.sum(), remaining)
        seats += extra
        over = seats > capacity
        remaining = int((seats - capacity)[over].sum())
        seats[over] = capacity[over]
        open_ &= seats < capacity
    return seats


def aggregate(updates, weights, n_trees: Optional[int] = None, seed: int = 0):
    """Combine client updates into a global model.

    SVM: the weighted mean of weight vectors and biases. It is computed
    as an offset from the heaviest update, which keeps it exact for
    identical payloads and one-hot weights. Forest: ``n_trees`` trees
    (default: the first client's forest size) apportioned across clients
    by largest remainder and drawn without replacement within each client.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if len(updates) != weights.size or not updates:
        raise ValueError("need one weight per update")
    if abs(weights.sum() - 1.0) > 1e-9 or np.any(weights < 0):
        raise ValueError("aggregation weights must be non-negative and sum to 1")
    kinds = {type(u.payload) for u in updates}
    if len(kinds) != 1:
        raise TypeError(f"mixed payload kinds: {sorted(k.__name__ for k in kinds)}")
    kind = kinds.pop()

    if kind is SvmPayload:
        ref = int(np.argmax(weights))
        base = updates[ref].payload
        w = base.weights.copy()
        b = base.bias
        steps = 0.0
        for k, (u, wk) in enumerate(zip(updates, weights)):
            steps += wk * u.payload.steps
            if k == ref or wk == 0:
                continue
            w += wk * (u.payload.weights - base.weights)
            b += wk * (u.payload.bias - base.bias)
        return LinearSvmModel(w, b, base.lam, 0, int(round(steps)))

    if kind is ForestPayload:
        pools = [u.payload.trees for u in updates]
        if any(len(p) == 0 for p in pools):
            raise DataError("forest payload carries no trees")
        total = n_trees if n_trees is not None else len(pools[0])
        seats = _capped_apportion(weights, total, [len(p) for p in pools])
        rng = np.random.default_rng(seed)
        trees = []
        for pool, k in zip(pools, seats):
            if k:
                picked = np.sort(rng.choice(len(pool), size=int(k), replace=False))
                trees.extend(pool[i] for i in picked)
        first = updates[0].payload
        return RandomForestModel(tuple(trees), first.mtry, seed, first.config)

    raise TypeError(f"unsupported payload {kind.__name__}")


# --------------------------------------------------------------------------
# adversaries


def poison_labels(data: FeatureMatrix, fraction: float, seed: int = 0) -> FeatureMatrix:
    """Flip the labels of ``floor(fraction * n)`` uniformly chosen rows."""
    if not 0 <= fraction <= 1:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    n_flip = int(np.floor(fraction * data.n_rows))
    rows = np.random.default_rng(seed).choice(data.n_rows, size=n_flip, replace=False)
    labels = data.labels.copy()
    labels[rows] = 1 - labels[rows]
    return data.with_labels(labels)


def perturb_payload(payload, sigma, rng):
    """Add N(0, sigma^2) noise to SVM weights/bias or tree split thresholds."""
    if isinstance(payload, SvmPayload):
        return dataclasses.replace(
            payload,
            weights=payload.weights + rng.normal(0.0, sigma, payload.weights.size),
            bias=payload.bias + float(rng.normal(0.0, sigma)),
        )
    trees = []
    for t in payload.trees:
        noisy = t.threshold + np.where(t.feature >= 0, rng.normal(0.0, sigma, t.threshold.size), 0.0)
        trees.append(dataclasses.replace(t, threshold=noisy))
    return dataclasses.replace(payload, trees=tuple(trees))


@dataclass(frozen=True)
class Adversary:
    """``kind`` is ``none``, ``label_flip`` (uses ``fraction``) or ``weight_noise`` (uses ``sigma``)."""

    kind: str = "none"
    client_ids: tuple = ()
    fraction: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "label_flip", "weight_noise"):
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        object.__setattr__(self, "client_ids", tuple(int(c) for c in self.client_ids))
        if not 0 <= self.fraction <= 1:
            raise ValueError(f"label-flip fraction must lie in [0, 1], got {self.fraction}")
        if self.sigma < 0:
            raise ValueError(f"noise sigma must be non-negative, got {self.sigma}")

    def targets(self, client_id):
        return self.kind != "none" and client_id in self.client_ids

    def to_dict(self):
        return {"kind": self.kind, "client_ids": list(self.client_ids),
                "fraction": self.fraction, "sigma": self.sigma}


@dataclass(frozen=True)
class AggregationConfig:
    strategy: str = TRUST_AWARE
    rounds: int = 5
    clients: int = 5
    local_epochs: int = 1
    validation_fraction: float = 0.2
    adversary: Adversary = Adversary()
    seed: int = 0
    partition: str = "iid"
    alpha: float = 0.5
    beta: float = 0.5
    global_trees: Optional[int] = None
    train: TrainConfig = TrainConfig()

    def __post_init__(self):
        object.__setattr__(self, "strategy", normalize_strategy(self.strategy))
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if self.clients < 2:
            raise ValueError(f"clients must be >= 2, got {self.clients}")
        if self.local_epochs < 0:
            raise ValueError(f"local_epochs must be >= 0, got {self.local_epochs}")
        if not 0 < self.validation_fraction <= 0.5:
            raise ValueError(f"validation_fraction must lie in (0, 0.5], got {self.validation_fraction}")
        bad = [c for c in self.adversary.client_ids if not 0 <= c < self.clients]
        if bad:
            raise ValueError(f"adversary client ids {bad} outside [0, {self.clients})")
        if self.partition not in ("iid", "dirichlet"):
            raise ValueError(f"partition must be 'iid' or 'dirichlet', got {self.partition!r}")
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")

    def to_dict(self):
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        d["adversary"] = self.adversary.to_dict()
        d["train"] = self.train.to_dict()
        return d


@dataclass(frozen=True)
class RoundReport:
    round: int
    trust: dict
    validation_f1: dict
    weights: dict
    metrics: object
    confusion: object
    train_f1: dict = field(default_factory=dict)

    def to_dict(self):
        key = str
        return {
            "round": self.round,
            "trust": {key(c): v for c, v in sorted(self.trust.items())},
            "validation_f1": {key(c): v for c, v in sorted(self.validation_f1.items())},
            "weights": {key(c): v for c, v in sorted(self.weights.items())},
            "train_f1": {key(c): v for c, v in sorted(self.train_f1.items())},
            "metrics": self.metrics.to_dict(),
            "confusion": self.confusion.to_dict(),
        }


def run_federation(train: FeatureMatrix, test: FeatureMatrix, cfg: AggregationConfig,
                   model_kind: str = "svm"):
    """Simulate ``cfg.rounds`` rounds and return one RoundReport per round.

    A stratified ``validation_fraction`` of ``train`` is held back for the
    server; the rest is partitioned across ``cfg.clients`` clients. The
    run depends only on the inputs and ``cfg.seed``.
    """
    if model_kind not in MODEL_KINDS:
        raise ValueError(f"model_kind must be one of {MODEL_KINDS}, got {model_kind!r}")
    carve = stratified_split(train, 1.0 - cfg.validation_fraction, cfg.seed)
    pool, validation = carve.train, carve.test
    plan = partition_clients(pool, cfg.clients, cfg.partition, cfg.alpha, cfg.seed)
    client_ids = list(range(cfg.clients))
    client_data = []
    for c, rows in zip(client_ids, plan.client_indices()):
        data = pool.subset(rows)
        if cfg.adversary.kind == "label_flip" and cfg.adversary.targets(c):
            data = poison_labels(data, cfg.adversary.fraction, derive_seed(cfg.seed, c, 1))
        client_data.append(data)
    n = np.array([d.n_rows for d in client_data])

    ledger = TrustLedger.initial(client_ids, cfg.beta)
    global_model = None
    reports = []
    for r in range(1, cfg.rounds + 1):
        updates = []
        for c in client_ids:
            local_cfg = dataclasses.replace(cfg.train, seed=derive_seed(cfg.seed, r, c))
            try:
                u = client_local_train(client_data[c], model_kind, global_model, local_cfg,
                                       cfg.local_epochs, c, r)
            except (ValueError, DataError) as exc:
                raise FederationError(str(exc), r, c) from exc
            if cfg.adversary.kind == "weight_noise" and cfg.adversary.targets(c):
                noise_rng = np.random.default_rng(derive_seed(cfg.seed, r, c, 2))
                u = dataclasses.replace(u, payload=perturb_payload(u.payload, cfg.adversary.sigma, noise_rng))
            updates.append(u)

        scores = {}
        for u in updates:
            try:
                scores[u.client_id] = score_update(u, validation)
            except (ValueError, DataError) as exc:
                raise FederationError(str(exc), r, u.client_id) from exc
        ledger = update_trust(ledger, scores)
        try:
            weights = aggregation_weights(n, ledger.values(client_ids), cfg.strategy)
        except AggregationHalt as exc:
            raise FederationError(str(exc), r) from exc
        global_model = aggregate(updates, weights, cfg.global_trees, derive_seed(cfg.seed, r, 3))

        cm, metrics, _ = evaluate(test.labels, predict(global_model, test.features),
                                  decision_scores(global_model, test.features))
        reports.append(RoundReport(
            r,
            dict(ledger.trust),
            scores,
            {c: float(w) for c, w in zip(client_ids, weights)},
            metrics,
            cm,
            {u.client_id: u.local_indicators["train_f1"] for u in updates},
        ))
        logger.info("round %d (%s): global f1 %.6f", r, cfg.strategy, metrics.f1)
    return reports


def trust_csv(reports, strategy=None):
    """CSV rows ``round,client,trust,weight,validation_f1`` (strategy column optional)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["round", "client", "trust", "weight", "validation_f1"]
    w.writerow((["strategy"] if strategy else []) + head)
    for rep in reports:
        for c in sorted(rep.trust):
            row = [rep.round, c, repr(rep.trust[c]), repr(rep.weights[c]), repr(rep.validation_f1[c])]
            w.writerow(([strategy] if strategy else []) + row)
    return buf.getvalue()
