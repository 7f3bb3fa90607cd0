"""Committee classifiers built on the single learners.

Bagging and RandomForest combine members by averaging their class
distributions (soft vote); the label is the argmax of that average.
"""
from __future__ import annotations

import numpy as np

from .knn import KNearest
from .naive_bayes import GaussianNB
from .tree import DecisionTree


def _bootstrap(n, rng, weights=None):
    p = None if weights is None else weights / weights.sum()
    return rng.choice(n, size=n, replace=True, p=p)


class _TreeCommittee:
    max_features = None

    def _fit_members(self, X, y, n_classes, rng, count, bootstrap, sample_weight):
        self.n_classes = n_classes
        self.members = []
        n = len(y)
        for _ in range(count):
            if bootstrap:
                idx = _bootstrap(n, rng)
                Xb, yb = X[idx], y[idx]
                wb = None if sample_weight is None else sample_weight[idx]
            else:
                Xb, yb, wb = X, y, sample_weight
            tree = DecisionTree(max_features=self.max_features)
            self.members.append(tree.fit(Xb, yb, n_classes, rng, wb))
        return self

    def predict_proba(self, X):
        return np.mean([m.predict_proba(X) for m in self.members], axis=0)

    def to_dict(self):
        return {"n_classes": self.n_classes, "members": [m.to_dict() for m in self.members]}

    def load_state(self, s):
        self.n_classes = s["n_classes"]
        self.members = []
        for d in s["members"]:
            t = DecisionTree(max_features=self.max_features)
            t.load_state(d)
            self.members.append(t)


class Bagging(_TreeCommittee):
    def __init__(self, iterations: int = 10, bootstrap: bool = True):
        self.iterations = iterations
        self.bootstrap = bootstrap

    def fit(self, X, y, n_classes, rng, sample_weight=None):
        return self._fit_members(X, y, n_classes, rng, self.iterations, self.bootstrap, sample_weight)


class RandomForest(_TreeCommittee):
    def __init__(self, trees: int = 10, max_features="sqrt", bootstrap: bool = True):
        self.trees = trees
        self.max_features = max_features
        self.bootstrap = bootstrap

    def fit(self, X, y, n_classes, rng, sample_weight=None):
        return self._fit_members(X, y, n_classes, rng, self.trees, self.bootstrap, sample_weight)


class AdaBoost:
    """Multiclass AdaBoost (SAMME) over decision trees.

    A round whose weighted error reaches 1 - 1/classes is refitted once on a
    weighted resample; if it still fails, boosting stops. A perfect round is
    kept with a large fixed vote and ends boosting.
    """

    PERFECT_ALPHA = 10.0

    def __init__(self, rounds: int = 10):
        self.rounds = rounds

    def fit(self, X, y, n_classes, rng, sample_weight=None):
        n = len(y)
        self.n_classes = n_classes
        w = np.full(n, 1.0 / n) if sample_weight is None else sample_weight / sample_weight.sum()
        self.members, self.alphas, self.weight_history = [], [], [w.copy()]
        limit = 1.0 - 1.0 / n_classes
        for _ in range(self.rounds):
            tree = DecisionTree().fit(X, y, n_classes, rng, w)
            miss = tree.predict_proba(X).argmax(axis=1) != y
            err = float(w[miss].sum())
            if err >= limit:
                idx = _bootstrap(n, rng, w)
                tree = DecisionTree().fit(X[idx], y[idx], n_classes, rng)
                miss = tree.predict_proba(X).argmax(axis=1) != y
                err = float(w[miss].sum())
                if err >= limit:
                    break
            if err <= 0.0:
                self.members.append(tree)
                self.alphas.append(self.PERFECT_ALPHA)
                break
            alpha = np.log((1.0 - err) / err) + np.log(n_classes - 1.0)
            self.members.append(tree)
            self.alphas.append(float(alpha))
            w = w * np.exp(alpha * miss)
            w = w / w.sum()
            self.weight_history.append(w.copy())
        if not self.members:  # every attempt failed: fall back to one plain tree
            self.members.append(DecisionTree().fit(X, y, n_classes, rng))
            self.alphas.append(1.0)
        return self

    def predict_proba(self, X):
        votes = np.zeros((len(X), self.n_classes))
        rows = np.arange(len(X))
        for tree, a in zip(self.members, self.alphas):
            votes[rows, tree.predict_proba(X).argmax(axis=1)] += a
        return votes / votes.sum(axis=1, keepdims=True)

    def to_dict(self):
        return {"n_classes": self.n_classes, "alphas": list(self.alphas),
                "members": [m.to_dict() for m in self.members]}

    def load_state(self, s):
        self.n_classes = s["n_classes"]
        self.alphas = list(s["alphas"])
        self.members = []
        for d in s["members"]:
            t = DecisionTree()
            t.load_state(d)
            self.members.append(t)


def _base_learners():
    return [GaussianNB(), KNearest(), DecisionTree()]


class Stacking:
    """NaiveBayes, KNN and DecisionTree feeding a NaiveBayes meta-learner.

    Meta-features are out-of-fold class distributions from an internal
    stratified split of the training data.
    """

    # base distributions are often near one-hot, so within-class variance can
    # vanish; the meta-learner floors it at a 0.1 standard deviation
    META_VAR_FLOOR = 1e-2

    def __init__(self, folds: int = 10):
        self.folds = folds

    def fit(self, X, y, n_classes, rng, sample_weight=None):
        from .evaluation import stratified_folds
        n = len(y)
        self.n_classes = n_classes
        k = min(self.folds, n)
        assign = stratified_folds(y, k, rng)
        meta = np.zeros((n, 3 * n_classes))
        for f in range(k):
            test = assign == f
            train = ~test
            for j, est in enumerate(_base_learners()):
                est.fit(X[train], y[train], n_classes, rng)
                meta[test, j * n_classes:(j + 1) * n_classes] = est.predict_proba(X[test])
        self.bases = [est.fit(X, y, n_classes, rng) for est in _base_learners()]
        self.meta = GaussianNB(self.META_VAR_FLOOR).fit(meta, y, n_classes)
        return self

    def _meta_features(self, X):
        return np.hstack([b.predict_proba(X) for b in self.bases])

    def predict_proba(self, X):
        return self.meta.predict_proba(self._meta_features(X))

    def to_dict(self):
        return {"n_classes": self.n_classes, "bases": [b.to_dict() for b in self.bases],
                "meta": self.meta.to_dict()}

    def load_state(self, s):
        self.n_classes = s["n_classes"]
        self.bases = _base_learners()
        for b, d in zip(self.bases, s["bases"]):
            b.load_state(d)
        self.meta = GaussianNB(self.META_VAR_FLOOR)
        self.meta.load_state(s["meta"])
