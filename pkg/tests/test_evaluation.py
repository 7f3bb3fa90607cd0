import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcpredict.ml import (ClassifierSpec, ConfusionMatrix, ModelError, accuracy, auc,
                          auc_multiclass, corrected_t_test, cross_validate, stratified_folds,
                          t_test_from_diffs)
from rcpredict.ml.base import make_rng

EXAMPLE_D = [0.02, -0.01, 0.03, 0.00, 0.01, 0.02, -0.02, 0.01, 0.00, 0.02]


def brute_auc(scores):
    pos = [s for s, lab in scores if lab]
    neg = [s for s, lab in scores if not lab]
    wins = sum(Fraction(1) if p > q else Fraction(1, 2) if p == q else Fraction(0)
               for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


def hand_t(d, ratio):
    """Corrected resampled t from the textbook formula, in exact arithmetic up to the root."""
    d = [Fraction(x).limit_denominator(10 ** 9) for x in d]
    k = len(d)
    mean = sum(d) / k
    var = sum((x - mean) ** 2 for x in d) / (k - 1)
    return float(mean) / math.sqrt(float((Fraction(1, k) + Fraction(ratio)) * var))


def binary_cm(tp, tn, fp, fn):
    # rows are actual (positive, negative), columns predicted
    return ConfusionMatrix(np.array([[tp, fn], [fp, tn]]))


def test_accuracy_examples():
    cm = binary_cm(8, 9, 1, 2)
    assert accuracy(cm) == Fraction(17, 20) == Fraction(85, 100)
    assert (cm.tp(0), cm.tn(0), cm.fp(0), cm.fn(0)) == (8, 9, 1, 2)
    assert accuracy(ConfusionMatrix(np.diag([3, 4, 5]))) == 1
    assert accuracy(ConfusionMatrix(np.array([[0, 3], [4, 0]]))) == 0
    with pytest.raises(ModelError):
        accuracy(ConfusionMatrix(np.zeros((2, 2), dtype=int)))


def test_accuracy_on_random_matrices():
    rng = np.random.default_rng(0)
    for _ in range(20):
        tp, tn, fp, fn = (int(v) for v in rng.integers(0, 50, 4))
        if tp + tn + fp + fn == 0:
            tp = 1
        assert accuracy(binary_cm(tp, tn, fp, fn)) == Fraction(tp + tn, tp + tn + fp + fn)


def test_auc_examples():
    assert auc([(0.9, True), (0.8, True), (0.2, False), (0.1, False)]) == 1
    assert auc([(0.5, True), (0.5, False), (0.5, True), (0.5, False)]) == Fraction(1, 2)
    assert auc([(0.9, True), (0.4, True), (0.6, False), (0.1, False)]) == Fraction(3, 4)
    with pytest.raises(ModelError):
        auc([])
    with pytest.raises(ModelError):
        auc([(0.1, True)])


score_sets = st.lists(st.tuples(st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0]), st.booleans()),
                      min_size=2, max_size=12).filter(lambda s: 0 < sum(b for _, b in s) < len(s))


@settings(max_examples=200, deadline=None)
@given(score_sets)
def test_auc_matches_brute_force(scores):
    assert auc(scores) == brute_auc(scores)


def test_auc_multiclass_weighting():
    proba = np.array([[0.8, 0.1, 0.1], [0.2, 0.7, 0.1], [0.6, 0.3, 0.1], [0.1, 0.2, 0.7]])
    actual = np.array([0, 1, 1, 0])
    got = auc_multiclass(proba, actual, 3)
    a0 = brute_auc(list(zip(proba[:, 0], actual == 0)))
    a1 = brute_auc(list(zip(proba[:, 1], actual == 1)))
    assert got == (2 * a0 + 2 * a1) / 4  # class 2 has no positives: weight 0
    assert auc_multiclass(proba, np.zeros(4, dtype=int), 3) is None


def test_fold_sizes_for_258_records():
    y = np.array([0] * 162 + [1] * 96)
    assign = stratified_folds(y, 10, make_rng(0, 1))
    sizes = np.bincount(assign, minlength=10)
    assert set(sizes.tolist()) <= {25, 26} and sizes.sum() == 258
    for c in (0, 1):
        per = np.bincount(assign[y == c], minlength=10)
        assert per.max() - per.min() <= 1
    assert np.array_equal(assign, stratified_folds(y, 10, make_rng(0, 1)))


def test_fold_errors():
    with pytest.raises(ModelError):
        stratified_folds(np.zeros(5), 1, make_rng(0))
    with pytest.raises(ModelError):
        stratified_folds(np.zeros(5), 6, make_rng(0))


def test_cross_validate_records_tested_once():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(58, 3))
    y = np.arange(58) % 2
    fs = cross_validate(X, y, ["a", "b"], ClassifierSpec("NaiveBayes"), k=10, seed=4)
    assert fs.k == 10 and fs.pooled.total == 58
    assert all(0 <= a <= 1 for a in fs.accuracies)
    assert fs.test_train_ratio == Fraction(1, 9)
    again = cross_validate(X, y, ["a", "b"], ClassifierSpec("NaiveBayes"), k=10, seed=4)
    assert np.array_equal(fs.assignment, again.assignment) and fs.accuracies == again.accuracies


def test_majority_predictor_on_90_10():
    # a constant feature leaves the tree a single leaf, i.e. the majority class
    X = np.zeros((100, 1))
    y = np.array([0] * 90 + [1] * 10)
    fs = cross_validate(X, y, ["maj", "min"], ClassifierSpec("DecisionTree"), k=10)
    assert abs(fs.mean_accuracy - 0.9) <= 1 / 10
    assert accuracy(fs.pooled) == Fraction(9, 10)


def test_t_test_identical_vectors():
    r = t_test_from_diffs([0.0] * 10, Fraction(1, 9))
    assert r.t == 0 and r.verdict == "not-significant" and r.df == 9


def test_t_test_constant_difference_is_significant():
    r = t_test_from_diffs([0.1] * 10, Fraction(1, 9))
    assert r.verdict == "improvement" and math.isinf(r.t)
    assert t_test_from_diffs([-0.1] * 10, Fraction(1, 9)).verdict == "degradation"


def test_t_test_worked_example():
    r = t_test_from_diffs(EXAMPLE_D, Fraction(1, 9))
    # mean 0.008, sample variance 2.4e-4: t = 0.008 / sqrt((1/10 + 1/9) * 2.4e-4)
    assert abs(r.t - hand_t(EXAMPLE_D, Fraction(1, 9))) < 1e-9
    assert abs(r.t - 0.008 / math.sqrt((0.1 + 1 / 9) * 2.4e-4)) < 1e-9
    assert r.verdict == "not-significant"  # |t| = 1.124 < t(0.975, 9) = 2.262


def test_t_test_needs_two_folds():
    with pytest.raises(ModelError):
        t_test_from_diffs([0.1], Fraction(1, 9))


def test_paired_test_requires_same_folds():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 2))
    y = np.arange(40) % 2
    a = cross_validate(X, y, ["a", "b"], ClassifierSpec("NaiveBayes"), k=5, seed=0)
    b = cross_validate(X, y, ["a", "b"], ClassifierSpec("KNN"), k=5, seed=0)
    c = cross_validate(X, y, ["a", "b"], ClassifierSpec("KNN"), k=5, seed=1)
    assert corrected_t_test(a, a).verdict == "not-significant"
    assert corrected_t_test(a, b).df == 4
    with pytest.raises(ModelError):
        corrected_t_test(a, c)
