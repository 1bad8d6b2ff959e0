"""Centralized baselines on the synthetic fallback dataset.

Trains the random forest, the single CART tree and the linear SVM on a
scaled 80/20 split, then prints the metric table and the error profile of
each model. Swap ``generate_synthetic`` for ``clean(load_flow_csv(path))``
to run the same pipeline on a CICFlowMeter export.

    python demos/baseline_models.py
"""

from edgeids.classifiers import (
    TrainConfig,
    decision_scores,
    predict,
    train_decision_tree,
    train_linear_svm,
    train_random_forest,
)
from edgeids.flow_ingest import apply_scaler, fit_scaler, stratified_split
from edgeids.metrics import error_profile, evaluate
from edgeids.synthetic import generate_synthetic

data = generate_synthetic(n=4000, d=3, separation=8.0, class_ratio=0.55, seed=1)
split = stratified_split(data, ratio=0.8, seed=1)

# The scaler only ever sees training rows.
scaler = fit_scaler(split.train)
train, test = apply_scaler(scaler, split.train), apply_scaler(scaler, split.test)
benign, attack = test.class_counts()
print(f"train {train.n_rows} rows, test {test.n_rows} rows (benign {benign}, attack {attack})\n")

cfg = TrainConfig(n_trees=100, seed=1)
trainers = {"rf": train_random_forest, "dt": train_decision_tree, "svm": train_linear_svm}

print(f"{'model':>5} {'accuracy':>9} {'precision':>9} {'recall':>9} {'f1':>9} {'auc':>9}   fp  fn")
for name, fit in trainers.items():
    model = fit(train.features, train.labels, cfg)
    cm, report, _ = evaluate(test.labels, predict(model, test.features), decision_scores(model, test.features))
    fp, fn = error_profile(cm)
    print(f"{name:>5} {report.accuracy:9.6f} {report.precision:9.6f} {report.recall:9.6f} "
          f"{report.f1:9.6f} {report.roc_auc:9.6f} {fp:4d} {fn:3d}")
