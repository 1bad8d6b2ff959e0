import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgeids.metrics import (
    ConfusionMatrix,
    confusion,
    error_profile,
    evaluate,
    metrics_from_confusion,
    roc_auc,
)

# Confusion counts of the three centralized baselines and the published cells
# they should reproduce (accuracy, precision, recall, f1).
BASELINE_COUNTS = {
    "rf": (ConfusionMatrix(tp=25602, tn=19536, fp=2, fn=3), (0.999889, 0.999922, 0.999883, 0.999902)),
    "dt": (ConfusionMatrix(tp=25601, tn=19531, fp=7, fn=4), (0.999756, 0.999727, 0.999844, 0.999785)),
    "svm": (ConfusionMatrix(tp=25583, tn=19519, fp=19, fn=22), (0.999092, 0.999258, 0.999141, 0.999199)),
}


def pairwise_auc(y, s):
    """Brute-force Mann-Whitney: fraction of (pos, neg) pairs ordered correctly, ties 1/2."""
    pos, neg = s[y == 1], s[y == 0]
    diff = pos[:, None] - neg[None, :]
    return (np.sum(diff > 0) + 0.5 * np.sum(diff == 0)) / (pos.size * neg.size)


def fuzzed_instance(rng):
    n = int(rng.integers(2, 201))
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    # a small pool of score levels forces ties
    levels = rng.normal(size=int(rng.integers(1, max(2, n // 3) + 1)))
    s = rng.choice(levels, n) if rng.random() < 0.7 else rng.normal(size=n)
    return y, s


def test_confusion_one_of_each():
    cm = confusion([1, 1, 0, 0], [1, 0, 0, 1])
    assert (cm.tp, cm.fn, cm.tn, cm.fp) == (1, 1, 1, 1)


def test_confusion_perfect():
    y = [0, 1, 1, 0, 1]
    cm = confusion(y, y)
    assert cm.fp == cm.fn == 0 and cm.total == 5


def test_confusion_length_mismatch():
    with pytest.raises(ValueError, match="length"):
        confusion([0, 1], [0])


def test_confusion_rejects_empty_and_non_binary():
    with pytest.raises(ValueError):
        confusion([], [])
    with pytest.raises(ValueError):
        confusion([0, 2], [0, 1])


def test_confusion_matrix_rejects_negative_counts():
    with pytest.raises(ValueError):
        ConfusionMatrix(1, 1, -1, 0)


@pytest.mark.parametrize("model", sorted(BASELINE_COUNTS))
def test_baseline_counts_reproduce_table(model):
    cm, cells = BASELINE_COUNTS[model]
    r = metrics_from_confusion(cm)
    assert [round(v, 6) for v in (r.accuracy, r.precision, r.recall, r.f1)] == list(cells)
    assert cm.class_support() == (19538, 25605)
    assert not r.zero_division_flags


def test_zero_division_flags():
    r = metrics_from_confusion(ConfusionMatrix(tp=0, tn=5, fp=0, fn=3))
    assert r.precision == 0.0 and r.recall == 0.0 and r.f1 == 0.0
    assert r.zero_division_flags == {"precision", "f1"}
    r = metrics_from_confusion(ConfusionMatrix(tp=0, tn=5, fp=2, fn=0))
    assert r.zero_division_flags == {"recall", "f1"}
    r = metrics_from_confusion(ConfusionMatrix(tp=0, tn=5, fp=0, fn=0))
    assert r.zero_division_flags == {"precision", "recall", "f1"}


def test_empty_confusion_rejected():
    with pytest.raises(ValueError):
        metrics_from_confusion(ConfusionMatrix(0, 0, 0, 0))


@settings(max_examples=200, deadline=None)
@given(st.tuples(*[st.integers(1, 10_000)] * 4))
def test_f1_between_precision_and_recall(counts):
    r = metrics_from_confusion(ConfusionMatrix(*counts))
    assert min(r.precision, r.recall) <= r.f1 <= max(r.precision, r.recall)
    assert abs(r.f1 - 2 * r.precision * r.recall / (r.precision + r.recall)) <= 1e-12
    for v in (r.accuracy, r.precision, r.recall, r.f1):
        assert 0.0 <= v <= 1.0


def test_auc_worked_example():
    c = roc_auc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8])
    assert c.auc == pytest.approx(0.75, abs=1e-12)


def test_auc_perfect_and_all_tied():
    assert roc_auc([0, 0, 1, 1], [0.1, 0.2, 0.3, 0.9]).auc == 1.0
    assert roc_auc([0, 1, 0, 1], [0.5] * 4).auc == 0.5


def test_auc_single_class_is_an_error():
    with pytest.raises(ValueError, match="one class"):
        roc_auc([1, 1, 1], [0.1, 0.2, 0.3])


def test_auc_matches_pairwise_oracle_and_trapezoid():
    rng = np.random.default_rng(2024)
    for _ in range(150):
        y, s = fuzzed_instance(rng)
        c = roc_auc(y, s)
        assert abs(c.auc - pairwise_auc(y, s)) <= 1e-12
        assert abs(c.auc - c.trapezoid_area()) <= 1e-12


def test_auc_invariant_under_increasing_transform():
    rng = np.random.default_rng(7)
    for _ in range(100):
        y, s = fuzzed_instance(rng)
        base = roc_auc(y, s).auc
        assert roc_auc(y, np.exp(s)).auc == base
        assert roc_auc(y, 3.0 * s ** 3 + 1.0).auc == base


def test_roc_curve_shape():
    rng = np.random.default_rng(3)
    for _ in range(50):
        y, s = fuzzed_instance(rng)
        c = roc_auc(y, s)
        assert c.points[0] == (0.0, 0.0) and c.points[-1] == (1.0, 1.0)
        assert np.all(np.diff(c.fpr) >= 0) and np.all(np.diff(c.tpr) >= 0)
        assert np.all(np.diff(c.thresholds) < 0)


def test_roc_csv():
    text = roc_auc([0, 1], [0.2, 0.7]).to_csv()
    assert text.splitlines() == ["fpr,tpr", "0.0,0.0", "0.0,1.0", "1.0,1.0"]


def test_error_profile():
    assert error_profile(BASELINE_COUNTS["rf"][0]) == (2, 3)
    assert error_profile(BASELINE_COUNTS["dt"][0]) == (7, 4)
    assert error_profile(confusion([0, 1], [0, 1])) == (0, 0)


def test_evaluate_skips_auc_for_single_class_truth():
    cm, report, curve = evaluate([1, 1], [1, 0], [0.9, 0.1])
    assert curve is None and report.roc_auc is None and cm.fn == 1
    cm, report, curve = evaluate([0, 1], [0, 1], [0.1, 0.9])
    assert report.roc_auc == 1.0 and curve is not None
