"""Stratified cross-validation, confusion matrices, AUC and the corrected t-test."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from .base import ClassifierSpec, ModelError, make_rng, train_arrays

FOLD_STREAM = 0xF01D


def stratified_folds(y, k: int, rng: np.random.Generator) -> np.ndarray:
    """Fold index per record.

    Records are shuffled within each class, the classes are laid end to end,
    and folds are dealt round-robin along that sequence. Fold sizes differ by
    at most one and each class is spread as evenly as its size allows.
    """
    y = np.asarray(y)
    if k < 2:
        raise ModelError("k must be >= 2")
    if k > len(y):
        raise ModelError(f"k={k} exceeds the number of records ({len(y)})")
    order = []
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        order.extend(rng.permutation(members).tolist())
    assign = np.empty(len(y), dtype=int)
    assign[order] = np.arange(len(y)) % k
    return assign


@dataclass
class ConfusionMatrix:
    """Counts indexed (actual, predicted)."""

    counts: np.ndarray
    class_names: list[str] = field(default_factory=list)

    @classmethod
    def from_labels(cls, actual, predicted, n_classes: int, class_names=None) -> "ConfusionMatrix":
        m = np.zeros((n_classes, n_classes), dtype=int)
        np.add.at(m, (np.asarray(actual, dtype=int), np.asarray(predicted, dtype=int)), 1)
        return cls(m, list(class_names or []))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def tp(self, c: int) -> int:
        return int(self.counts[c, c])

    def fp(self, c: int) -> int:
        return int(self.counts[:, c].sum() - self.counts[c, c])

    def fn(self, c: int) -> int:
        return int(self.counts[c, :].sum() - self.counts[c, c])

    def tn(self, c: int) -> int:
        return self.total - self.tp(c) - self.fp(c) - self.fn(c)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts, self.class_names or other.class_names)


def accuracy(cm: ConfusionMatrix) -> Fraction:
    """Share of correctly classified instances (trace over total)."""
    if cm.counts.size == 0 or cm.total == 0:
        raise ModelError("accuracy of an empty confusion matrix")
    return Fraction(int(np.trace(cm.counts)), cm.total)


def auc(scores: Sequence[tuple[float, bool]]) -> Fraction:
    """Mann-Whitney statistic P(pos > neg) + P(pos == neg) / 2, exactly."""
    scores = list(scores)
    if not scores:
        raise ModelError("auc of an empty score list")
    n_pos = sum(1 for _, lab in scores if lab)
    n_neg = len(scores) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ModelError("auc needs both positive and negative instances")
    ordered = sorted(scores, key=lambda s: s[0])
    twice_wins = 0
    neg_below = 0
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j][0] == ordered[i][0]:
            j += 1
        group_pos = sum(1 for _, lab in ordered[i:j] if lab)
        group_neg = (j - i) - group_pos
        twice_wins += group_pos * (2 * neg_below + group_neg)
        neg_below += group_neg
        i = j
    return Fraction(twice_wins, 2 * n_pos * n_neg)


def auc_multiclass(proba: np.ndarray, actual, n_classes: int) -> Fraction | None:
    """Class-frequency weighted one-vs-rest AUC; classes lacking positives or negatives get weight 0."""
    actual = np.asarray(actual, dtype=int)
    total, weight = Fraction(0), 0
    for c in range(n_classes):
        pos = actual == c
        n_c = int(pos.sum())
        if n_c == 0 or n_c == len(actual):
            continue
        total += n_c * auc(list(zip(proba[:, c].tolist(), pos.tolist())))
        weight += n_c
    return total / weight if weight else None


@dataclass
class FoldScores:
    kind: str
    accuracies: list[Fraction]
    aucs: list[Fraction | None]
    confusions: list[ConfusionMatrix]
    assignment: np.ndarray
    test_train_ratio: Fraction
    train_seconds: float = 0.0

    @property
    def k(self) -> int:
        return len(self.accuracies)

    @property
    def mean_accuracy(self) -> float:
        return float(sum(self.accuracies) / self.k)

    @property
    def mean_auc(self) -> float | None:
        vals = [a for a in self.aucs if a is not None]
        return float(sum(vals) / len(vals)) if vals else None

    @property
    def pooled(self) -> ConfusionMatrix:
        out = self.confusions[0]
        for cm in self.confusions[1:]:
            out = out + cm
        return out


def cross_validate(X, y, class_names, spec: ClassifierSpec, k: int = 10, seed: int = 0) -> FoldScores:
    """Stratified k-fold CV; standardisation is refitted on each training fold."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    n_classes = len(class_names)
    assign = stratified_folds(y, k, make_rng(seed, FOLD_STREAM))
    accs, aucs, cms = [], [], []
    elapsed = 0.0
    for f in range(k):
        test = assign == f
        train = ~test
        if len(np.unique(y[train])) < 2:
            # single class left for training: predict it with certainty
            proba = np.zeros((int(test.sum()), n_classes))
            proba[:, y[train][0]] = 1.0
        else:
            t0 = time.perf_counter()
            model = train_arrays(X[train], y[train], class_names, spec)
            elapsed += time.perf_counter() - t0
            proba = model.predict_proba(X[test])
        pred = proba.argmax(axis=1)
        cm = ConfusionMatrix.from_labels(y[test], pred, n_classes, class_names)
        cms.append(cm)
        accs.append(accuracy(cm))
        aucs.append(auc_multiclass(proba, y[test], n_classes))
    n = len(y)
    ratio = Fraction(n, k) / Fraction(n - Fraction(n, k))
    return FoldScores(spec.kind, accs, aucs, cms, assign, ratio, elapsed)


@dataclass(frozen=True)
class TTestResult:
    mean_difference: float
    t: float
    df: int
    alpha: float
    verdict: str  # "improvement", "degradation" or "not-significant"

    @property
    def marker(self) -> str:
        return {"improvement": "v", "degradation": "*"}.get(self.verdict, "")


def t_test_from_diffs(d: Sequence[float], test_train_ratio, alpha=Fraction(1, 20)) -> TTestResult:
    """Corrected resampled t-test on paired per-fold differences.

    t = mean(d) / sqrt((1/k + n_test/n_train) * var(d)) with k-1 degrees of
    freedom. Zero variance with a nonzero mean counts as significant.
    """
    d = np.asarray(d, dtype=float)
    k = len(d)
    if k < 2:
        raise ModelError("t-test needs at least two folds")
    mean = float(d.mean())
    var = float(d.var(ddof=1))
    alpha = float(alpha)
    if var == 0.0:
        t = 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
    else:
        t = mean / math.sqrt((1.0 / k + float(test_train_ratio)) * var)
    crit = float(stats.t.ppf(1.0 - alpha / 2.0, k - 1))
    if abs(t) > crit:
        verdict = "improvement" if t > 0 else "degradation"
    else:
        verdict = "not-significant"
    return TTestResult(mean, t, k - 1, alpha, verdict)


def corrected_t_test(baseline: FoldScores, other: FoldScores, alpha=Fraction(1, 20)) -> TTestResult:
    """Compare ``other`` against ``baseline``; "improvement" means ``other`` is better."""
    if baseline.k != other.k or not np.array_equal(baseline.assignment, other.assignment):
        raise ModelError("t-test needs paired scores over the same folds")
    d = [float(b - a) for a, b in zip(baseline.accuracies, other.accuracies)]
    return t_test_from_diffs(d, baseline.test_train_ratio, alpha)
