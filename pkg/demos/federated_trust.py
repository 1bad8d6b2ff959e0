"""Trust-aware aggregation against label-flipping clients.

Five clients share an IID split; clients 0 and 1 flip 80% of their labels.
Both aggregation strategies run on the same partition and seed. The trust
table shows the poisoned clients losing weight round by round, which
FedAvg cannot do since it only looks at sample counts.

    python demos/federated_trust.py
"""

from edgeids.federated import Adversary, AggregationConfig, run_federation
from edgeids.flow_ingest import apply_scaler, fit_scaler, stratified_split
from edgeids.synthetic import generate_synthetic

data = generate_synthetic(n=2000, d=3, separation=8.0, seed=2)
split = stratified_split(data, 0.8, seed=2)
scaler = fit_scaler(split.train)
train, test = apply_scaler(scaler, split.train), apply_scaler(scaler, split.test)

flip = Adversary("label_flip", client_ids=(0, 1), fraction=0.8)
runs = {}
for strategy in ("fedavg", "trust_aware"):
    cfg = AggregationConfig(strategy=strategy, rounds=6, clients=5, adversary=flip, seed=2)
    runs[strategy] = run_federation(train, test, cfg, model_kind="svm")

print("trust-aware run: per-client trust and aggregation weight")
print("round " + "  ".join(f"client{c} (t / w)" for c in range(5)))
for r in runs["trust_aware"]:
    cells = "  ".join(f"  {r.trust[c]:.3f} / {r.weights[c]:.3f}" for c in range(5))
    print(f"{r.round:5d} {cells}")

print("\nglobal test F1 by round")
for fa, ta in zip(runs["fedavg"], runs["trust_aware"]):
    print(f"  round {fa.round}: fedavg {fa.metrics.f1:.4f}   trust_aware {ta.metrics.f1:.4f}")
