"""Metric correctness against hand counts and the pairwise AUC oracle."""

import numpy as np
import pytest

from kspaceqa import metrics as mx

from helpers import mann_whitney_auc


def test_confusion_perfect_is_diagonal():
    labels = np.array([0, 1, 2, 3, 4, 0, 1])
    cm = mx.confusion(labels, labels)
    assert np.array_equal(np.diag(np.diag(cm)), cm)
    assert cm.sum() == 7


def test_confusion_empty_rejected():
    with pytest.raises(ValueError, match="empty"):
        mx.confusion([], [])


def test_confusion_length_mismatch_rejected():
    with pytest.raises(ValueError, match="mismatch"):
        mx.confusion([0, 1], [0])


def test_confusion_out_of_range_rejected():
    with pytest.raises(ValueError, match="range"):
        mx.confusion([0, 5], [0, 1])


def test_confusion_hand_tally():
    labels = [0, 0, 1, 1, 2, 2, 2, 3, 4, 4]
    preds = [0, 1, 1, 1, 2, 0, 2, 3, 4, 3]
    cm = mx.confusion(preds, labels)
    expect = np.zeros((5, 5), int)
    expect[0, 0] = 1; expect[0, 1] = 1
    expect[1, 1] = 2
    expect[2, 2] = 2; expect[2, 0] = 1
    expect[3, 3] = 1
    expect[4, 4] = 1; expect[4, 3] = 1
    assert np.array_equal(cm, expect)


def test_metrics_perfect():
    cm = np.diag([3, 4, 5, 6, 7])
    r = mx.classification_metrics(cm)
    for v in (r.accuracy, r.precision_micro, r.recall_micro,
              r.f_measure_micro, r.precision_macro, r.recall_macro,
              r.f_measure_macro):
        assert v == 1.0


def test_metrics_all_wrong_accuracy_zero():
    cm = np.zeros((5, 5), int)
    cm[0, 1] = 3
    cm[1, 0] = 2
    r = mx.classification_metrics(cm)
    assert r.accuracy == 0.0


def test_metrics_three_class_toy_matches_formulas():
    cm = np.array([[2, 1, 0], [0, 2, 0], [1, 0, 4]])
    r = mx.classification_metrics(cm)
    # direct evaluation of the defining formulas per class (one-vs-rest)
    tps = [2, 2, 4]
    fps = [1, 1, 0]
    fns = [1, 0, 1]
    prs = [tp / (tp + fp) if tp + fp else 0.0 for tp, fp in zip(tps, fps)]
    res = [tp / (tp + fn) if tp + fn else 0.0 for tp, fn in zip(tps, fns)]
    fs = [2 * p * q / (p + q) if p + q else 0.0 for p, q in zip(prs, res)]
    assert r.accuracy == pytest.approx(8 / 10)
    assert r.precision_macro == pytest.approx(np.mean(prs))
    assert r.recall_macro == pytest.approx(np.mean(res))
    assert r.f_measure_macro == pytest.approx(np.mean(fs))
    micro_pr = sum(tps) / (sum(tps) + sum(fps))
    micro_re = sum(tps) / (sum(tps) + sum(fns))
    assert r.precision_micro == pytest.approx(micro_pr)
    assert r.recall_micro == pytest.approx(micro_re)


def test_micro_identity_random_matrices():
    rng = np.random.default_rng(0)
    for _ in range(200):
        cm = rng.integers(0, 30, (5, 5))
        if cm.sum() == 0:
            continue
        r = mx.classification_metrics(cm)
        assert r.precision_micro == r.recall_micro == r.accuracy


def test_zero_division_flagged():
    cm = np.zeros((5, 5), int)
    cm[0, 0] = 4
    cm[1, 0] = 2      # class 1 never predicted: precision denominator fine,
    r = mx.classification_metrics(cm)   # but class 1 precision undefined? no:
    c1 = r.per_class[1]                 # nothing predicted as 1 -> zero div
    assert c1["precision"] == 0.0
    assert c1["precision_zero_div"]
    c4 = r.per_class[4]                 # class 4 absent entirely
    assert c4["recall_zero_div"]


def test_f_measure_harmonic_mean_properties():
    rng = np.random.default_rng(1)
    for _ in range(100):
        pr, re = rng.random(2)
        f = mx._f_measure(pr, re)
        assert 0.0 <= f <= 1.0
        assert f <= (pr + re) / 2 + 1e-12
    assert mx._f_measure(0.7, 0.7) == pytest.approx(0.7)


def test_roc_endpoints_and_monotonicity():
    rng = np.random.default_rng(2)
    scores = rng.normal(size=40)
    positive = rng.random(40) < 0.4
    if not positive.any() or positive.all():
        positive[:5] = True
        positive[5:] = False
    pts = mx.roc_curve(scores, positive)
    assert pts[0] == (0.0, 0.0)
    assert pts[-1] == (1.0, 1.0)
    fprs = [p[0] for p in pts]
    tprs = [p[1] for p in pts]
    assert all(a <= b + 1e-15 for a, b in zip(fprs, fprs[1:]))
    assert all(a <= b + 1e-15 for a, b in zip(tprs, tprs[1:]))


def test_auc_perfect_separation():
    scores = np.zeros((10, 5))
    labels = np.array([0] * 5 + [1] * 5)
    scores[:5, 0] = 1.0
    scores[5:, 1] = 1.0
    aucs, _ = mx.roc_auc(scores, labels)
    assert aucs[0] == 1.0
    assert aucs[1] == 1.0


def test_auc_constant_scores_half():
    scores = np.full((12, 5), 0.2)
    labels = np.array([0, 1] * 6)
    aucs, macro = mx.roc_auc(scores, labels)
    assert aucs[0] == 0.5
    assert aucs[1] == 0.5
    assert macro == 0.5


def test_auc_absent_class_excluded():
    rng = np.random.default_rng(3)
    scores = rng.random((20, 5))
    labels = rng.integers(0, 2, 20)   # classes 2..4 absent
    aucs, macro = mx.roc_auc(scores, labels)
    assert aucs[2] is None and aucs[3] is None and aucs[4] is None
    defined = [a for a in aucs if a is not None]
    assert macro == pytest.approx(np.mean(defined))


def test_auc_matches_mann_whitney_oracle():
    rng = np.random.default_rng(4)
    for trial in range(30):
        n = int(rng.integers(8, 40))
        scores = rng.random((n, 5))
        if trial % 3 == 0:   # force ties sometimes
            scores = np.round(scores, 1)
        labels = rng.integers(0, 5, n)
        aucs, _ = mx.roc_auc(scores, labels)
        for c in range(5):
            if aucs[c] is None:
                continue
            oracle = mann_whitney_auc(scores[:, c], labels == c)
            assert abs(aucs[c] - oracle) < 1e-12


def test_auc_invariant_under_monotone_transform():
    rng = np.random.default_rng(5)
    scores = rng.random((30, 5))
    labels = rng.integers(0, 5, 30)
    a1, _ = mx.roc_auc(scores, labels)
    a2, _ = mx.roc_auc(np.exp(3 * scores) + 7, labels)
    for x, y in zip(a1, a2):
        if x is None:
            assert y is None
        else:
            assert abs(x - y) < 1e-12


def test_format_table_shape():
    rows = [("demo", {"accuracy": (0.9941, 0.0024),
                      "precision": (0.9941, 0.0024),
                      "recall": (0.9941, 0.0024),
                      "f_measure": (0.9941, 0.0024),
                      "auc": (0.9991, 0.0006)})]
    text = mx.format_mean_std_table(rows)
    assert "99.41 +/- 0.24" in text
    assert "Accuracy" in text
