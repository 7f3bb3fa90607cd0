"""One-hidden-layer perceptron: sigmoid hidden units, softmax output, cross-entropy."""
from __future__ import annotations

import math

import numpy as np

from .base import softmax


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def forward(params, X):
    W1, b1, W2, b2 = params
    H = _sigmoid(X @ W1 + b1)
    return H, softmax(H @ W2 + b2)


def loss_and_grad(params, X, Y, weights=None):
    """Mean (optionally weighted) cross-entropy and its gradient w.r.t. each parameter.

    ``Y`` is one-hot with shape (n, classes).
    """
    W1, b1, W2, b2 = params
    n = len(X)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    H, P = forward(params, X)
    loss = -(w * np.log(np.clip((P * Y).sum(axis=1), 1e-300, None))).sum() / n
    dZ2 = (P - Y) * w[:, None] / n
    gW2 = H.T @ dZ2
    gb2 = dZ2.sum(axis=0)
    dH = dZ2 @ W2.T
    dZ1 = dH * H * (1.0 - H)
    gW1 = X.T @ dZ1
    gb1 = dZ1.sum(axis=0)
    return loss, [gW1, gb1, gW2, gb2]


def init_params(n_in, n_hidden, n_out, rng):
    lim1 = math.sqrt(6.0 / (n_in + n_hidden))
    lim2 = math.sqrt(6.0 / (n_hidden + n_out))
    return [rng.uniform(-lim1, lim1, (n_in, n_hidden)), np.zeros(n_hidden),
            rng.uniform(-lim2, lim2, (n_hidden, n_out)), np.zeros(n_out)]


class MLP:
    def __init__(self, hidden=None, learning_rate=0.3, momentum=0.2, epochs=500, batch_size=32):
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.epochs = epochs
        self.batch_size = batch_size

    def fit(self, X, y, n_classes, rng, sample_weight=None):
        n, d = X.shape
        h = self.hidden or math.ceil((d + n_classes) / 2)
        params = init_params(d, h, n_classes, rng)
        velocity = [np.zeros_like(p) for p in params]
        Y = np.zeros((n, n_classes))
        Y[np.arange(n), y] = 1.0
        sw = None if sample_weight is None else np.asarray(sample_weight, dtype=float)
        for _ in range(self.epochs):
            perm = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = perm[start:start + self.batch_size]
                _, grads = loss_and_grad(params, X[batch], Y[batch],
                                         None if sw is None else sw[batch])
                for p, v, g in zip(params, velocity, grads):
                    v *= self.momentum
                    v -= self.learning_rate * g
                    p += v
        self.params = params
        return self

    def predict_proba(self, X):
        return forward(self.params, X)[1]

    def to_dict(self):
        return {"params": [p.tolist() for p in self.params]}

    def load_state(self, s):
        W1, b1, W2, b2 = (np.array(p, dtype=float) for p in s["params"])
        self.params = [W1.reshape(-1, len(b1)), b1, W2.reshape(len(b1), -1), b2]
