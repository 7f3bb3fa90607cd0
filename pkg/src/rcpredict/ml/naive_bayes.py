from __future__ import annotations

import numpy as np

from .base import softmax


class GaussianNB:
    """Gaussian naive Bayes with Laplace-smoothed priors."""

    def __init__(self, var_floor: float = 1e-9):
        self.var_floor = var_floor

    def fit(self, X, y, n_classes, rng=None, sample_weight=None):
        w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        d = X.shape[1]
        self.means = np.zeros((n_classes, d))
        self.vars = np.ones((n_classes, d))
        counts = np.zeros(n_classes)
        for c in range(n_classes):
            mask = y == c
            wc = w[mask]
            counts[c] = wc.sum()
            if counts[c] > 0:
                mu = np.average(X[mask], axis=0, weights=wc)
                self.means[c] = mu
                self.vars[c] = np.average((X[mask] - mu) ** 2, axis=0, weights=wc)
        self.vars = np.maximum(self.vars, self.var_floor)
        self.log_prior = np.log((counts + 1.0) / (counts.sum() + n_classes))
        return self

    def log_joint(self, X):
        diff = X[:, None, :] - self.means[None, :, :]
        ll = -0.5 * (np.log(2 * np.pi * self.vars)[None] + diff ** 2 / self.vars[None]).sum(axis=2)
        return ll + self.log_prior

    def predict_proba(self, X):
        return softmax(self.log_joint(X))

    def to_dict(self):
        return {"means": self.means.tolist(), "vars": self.vars.tolist(),
                "log_prior": self.log_prior.tolist()}

    def load_state(self, s):
        self.means = np.array(s["means"])
        self.vars = np.array(s["vars"])
        self.log_prior = np.array(s["log_prior"])
