"""Gain-ratio decision tree with binary numeric splits (C4.5-style, pre-pruned)."""
from __future__ import annotations


import numpy as np

from .base import ceil_sqrt


def _entropy(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    """Entropy in bits along the last axis; ``totals`` broadcasts against counts[..., 0]."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = counts / totals[..., None]
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


class DecisionTree:
    def __init__(self, min_leaf: int = 2, max_depth: int = 25, max_features=None):
        self.min_leaf = min_leaf
        self.max_depth = max_depth
        self.max_features = max_features

    def _n_features(self, d: int) -> int:
        m = self.max_features
        if m is None:
            return d
        if m == "sqrt":
            return min(d, ceil_sqrt(d))
        return min(d, int(m))

    def fit(self, X, y, n_classes, rng=None, sample_weight=None):
        n, d = X.shape
        w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        w = w * (n / w.sum())  # weights on the record-count scale so min_leaf keeps its meaning
        W = np.zeros((n, n_classes))
        W[np.arange(n), y] = w
        self.n_classes = n_classes
        m = self._n_features(d)
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node(idx):
            counts = W[idx].sum(axis=0)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(counts / counts.sum() if counts.sum() > 0 else np.full(n_classes, 1.0 / n_classes))
            return len(feature) - 1, counts

        root, root_counts = new_node(np.arange(n))
        stack = [(root, np.arange(n), root_counts, 0)]
        while stack:
            node, idx, counts, depth = stack.pop()
            total = counts.sum()
            if depth >= self.max_depth or (counts > 0).sum() <= 1 or total < 2 * self.min_leaf:
                continue
            feats = np.arange(d) if m >= d else np.sort(rng.choice(d, size=m, replace=False))
            split = self._best_split(X, W, idx, feats, counts)
            if split is None:
                continue
            f, thr = split
            mask = X[idx, f] <= thr
            li, ri = idx[mask], idx[~mask]
            ln, lc = new_node(li)
            rn, rc = new_node(ri)
            feature[node], threshold[node], left[node], right[node] = int(f), float(thr), ln, rn
            stack.append((rn, ri, rc, depth + 1))
            stack.append((ln, li, lc, depth + 1))
        self.feature = np.array(feature, dtype=int)
        self.threshold = np.array(threshold, dtype=float)
        self.left = np.array(left, dtype=int)
        self.right = np.array(right, dtype=int)
        self.value = np.array(value, dtype=float)
        return self

    def _best_split(self, X, W, idx, feats, counts):
        Xn = X[np.ix_(idx, feats)]
        order = np.argsort(Xn, axis=0, kind="stable")
        xs = np.take_along_axis(Xn, order, axis=0)
        Wo = W[idx][order]                          # (n, f, C)
        cum = np.cumsum(Wo, axis=0)[:-1]            # left counts at each cut
        total = counts.sum()
        lw = cum.sum(axis=2)
        rw = total - lw
        distinct = xs[1:] > xs[:-1]
        valid = distinct & (lw >= self.min_leaf) & (rw >= self.min_leaf)
        if not valid.any():
            return None
        parent_h = float(_entropy(counts[None], np.array([total]))[0])
        gain = parent_h - (lw * _entropy(cum, lw) + rw * _entropy(counts - cum, rw)) / total
        gain = np.where(valid, gain, -np.inf)
        # per feature: threshold by raw gain, then penalise by the number of candidate cuts
        best_pos = np.argmax(gain, axis=0)
        cols = np.arange(len(feats))
        best_gain = gain[best_pos, cols]
        n_cuts = valid.sum(axis=0)
        has = np.isfinite(best_gain)
        adj = np.where(has, best_gain - np.log2(np.maximum(n_cuts, 1)) / total, -np.inf)
        ok = has & (adj > 1e-12)
        if not ok.any():
            return None
        pl = lw[best_pos, cols] / total
        split_info = -(pl * np.log2(np.clip(pl, 1e-300, 1)) + (1 - pl) * np.log2(np.clip(1 - pl, 1e-300, 1)))
        ratio = np.where(ok, adj / np.maximum(split_info, 1e-12), -np.inf)
        # only splits with at least average gain compete on gain ratio
        avg_gain = adj[ok].mean()
        ratio = np.where(ok & (adj >= avg_gain - 1e-12), ratio, -np.inf)
        j = int(np.argmax(ratio))
        p = best_pos[j]
        thr = (xs[p, j] + xs[p + 1, j]) / 2.0
        if not thr < xs[p + 1, j]:  # midpoint rounded up onto the right value
            thr = xs[p, j]
        return int(feats[j]), float(thr)

    def apply(self, X):
        nodes = np.zeros(len(X), dtype=int)
        rows = np.arange(len(X))
        for _ in range(len(self.feature) + 1):
            f = self.feature[nodes]
            internal = f >= 0
            if not internal.any():
                break
            go_left = X[rows, np.maximum(f, 0)] <= self.threshold[nodes]
            nxt = np.where(go_left, self.left[nodes], self.right[nodes])
            nodes = np.where(internal, nxt, nodes)
        return nodes

    def predict_proba(self, X):
        return self.value[self.apply(X)]

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def to_dict(self):
        return {"n_classes": self.n_classes, "feature": self.feature.tolist(),
                "threshold": self.threshold.tolist(), "left": self.left.tolist(),
                "right": self.right.tolist(), "value": self.value.tolist()}

    def load_state(self, s):
        self.n_classes = s["n_classes"]
        self.feature = np.array(s["feature"], dtype=int)
        self.threshold = np.array(s["threshold"], dtype=float)
        self.left = np.array(s["left"], dtype=int)
        self.right = np.array(s["right"], dtype=int)
        self.value = np.array(s["value"], dtype=float).reshape(len(self.feature), self.n_classes)
