"""Threshold metrics, zero-division flags and ROC analysis.

First the metric formulas on hand-written confusion counts, including a
degenerate predictor that never flags an attack. Then a ROC curve for a
deliberately weak SVM on overlapping clusters, written to ``roc_svm.csv``.

    python demos/roc_and_metrics.py
"""

from edgeids.classifiers import TrainConfig, decision_scores, train_linear_svm
from edgeids.flow_ingest import stratified_split
from edgeids.metrics import ConfusionMatrix, metrics_from_confusion, roc_auc
from edgeids.synthetic import generate_synthetic

for cm in (ConfusionMatrix(tp=25602, tn=19536, fp=2, fn=3), ConfusionMatrix(tp=0, tn=90, fp=0, fn=10)):
    r = metrics_from_confusion(cm)
    flags = ", ".join(sorted(r.zero_division_flags)) or "none"
    print(f"{cm.to_dict()}: acc {r.accuracy:.6f} prec {r.precision:.6f} "
          f"rec {r.recall:.6f} f1 {r.f1:.6f} (zero-division: {flags})")

# Ties count one half, so constant scores sit exactly on the diagonal.
print("\nconstant scores:", roc_auc([0, 1, 0, 1], [0.3] * 4).auc)
print("worked example: ", roc_auc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]).auc)

# Separation 2 leaves plenty of overlap, which makes for a curve worth plotting.
data = generate_synthetic(n=2000, d=3, separation=2.0, seed=4)
split = stratified_split(data, 0.8, seed=4)
svm = train_linear_svm(split.train.features, split.train.labels, TrainConfig(seed=4))
curve = roc_auc(split.test.labels, decision_scores(svm, split.test.features))
print(f"\nweak SVM: AUC {curve.auc:.4f} over {len(curve.points)} curve points "
      f"(trapezoid area {curve.trapezoid_area():.4f})")
with open("roc_svm.csv", "w") as fh:
    fh.write(curve.to_csv())
print("wrote roc_svm.csv")
