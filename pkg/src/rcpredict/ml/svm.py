from __future__ import annotations

import numpy as np

from .base import softmax


class LinearSVM:
    """One-vs-rest linear SVM trained by mini-batch hinge-loss subgradient descent.

    Step size follows eta_t = 1 / (1 + reg * t); the bias is not regularised.
    Class probabilities are a softmax over the one-vs-rest margins.
    """

    def __init__(self, reg: float = 1e-3, epochs: int = 200, batch_size: int = 16):
        self.reg = reg
        self.epochs = epochs
        self.batch_size = batch_size

    def fit(self, X, y, n_classes, rng, sample_weight=None):
        n, d = X.shape
        Y = -np.ones((n, n_classes))
        Y[np.arange(n), y] = 1.0
        W = np.zeros((n_classes, d))
        b = np.zeros(n_classes)
        sw = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        t = 0
        for _ in range(self.epochs):
            perm = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = perm[start:start + self.batch_size]
                t += 1
                eta = 1.0 / (1.0 + self.reg * t)
                Xb, Yb, wb = X[batch], Y[batch], sw[batch]
                viol = (Yb * (Xb @ W.T + b)) < 1.0
                coef = (viol * Yb) * wb[:, None]
                grad_W = self.reg * W - coef.T @ Xb / len(batch)
                grad_b = -coef.sum(axis=0) / len(batch)
                W -= eta * grad_W
                b -= eta * grad_b
        self.W, self.b = W, b
        return self

    def decision_function(self, X):
        return X @ self.W.T + self.b

    def predict_proba(self, X):
        return softmax(self.decision_function(X))

    def to_dict(self):
        return {"W": self.W.tolist(), "b": self.b.tolist()}

    def load_state(self, s):
        self.W = np.array(s["W"], dtype=float)
        self.b = np.array(s["b"], dtype=float)
