"""Classifier specs, the trained-model wrapper and model persistence."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol, Sequence

import numpy as np

MODEL_FORMAT = "rcpredict-model"
MODEL_VERSION = 1

KINDS = ("NaiveBayes", "KNN", "DecisionTree", "LinearSVM", "MLP",
         "Bagging", "AdaBoost", "RandomForest", "Stacking")

DEFAULTS: dict[str, dict[str, Any]] = {
    "NaiveBayes": {"var_floor": 1e-9},
    "KNN": {"k": 3},
    "DecisionTree": {"min_leaf": 2, "max_depth": 25, "max_features": None},
    "LinearSVM": {"reg": 1e-3, "epochs": 200, "batch_size": 16},
    "MLP": {"hidden": None, "learning_rate": 0.3, "momentum": 0.2, "epochs": 500, "batch_size": 32},
    "Bagging": {"iterations": 10, "bootstrap": True},
    "AdaBoost": {"rounds": 10},
    "RandomForest": {"trees": 10, "max_features": "sqrt", "bootstrap": True},
    "Stacking": {"folds": 10},
}


class ModelError(ValueError):
    pass


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """The single source of randomness: a PCG64 stream keyed by (seed, *stream)."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *stream])


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown classifier kind {self.kind!r}")
        unknown = set(self.hyperparameters) - set(DEFAULTS[self.kind])
        if unknown:
            raise ModelError(f"{self.kind}: unknown hyperparameter(s) {sorted(unknown)}")
        hp = self.params
        for key in ("k", "trees", "epochs", "iterations", "rounds", "folds", "min_leaf",
                    "max_depth", "batch_size"):
            if key in hp and (not isinstance(hp[key], int) or hp[key] < 1):
                raise ModelError(f"{self.kind}: {key} must be an integer >= 1")
        for key in ("learning_rate", "reg", "var_floor"):
            if key in hp and not hp[key] > 0:
                raise ModelError(f"{self.kind}: {key} must be > 0")
        if "momentum" in hp and not 0 <= hp["momentum"] < 1:
            raise ModelError(f"{self.kind}: momentum must be in [0, 1)")
        if hp.get("hidden") is not None and hp["hidden"] < 1:
            raise ModelError(f"{self.kind}: hidden must be >= 1")

    @property
    def params(self) -> dict:
        return {**DEFAULTS[self.kind], **self.hyperparameters}

    def to_dict(self) -> dict:
        return {"kind": self.kind, "hyperparameters": dict(self.hyperparameters), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierSpec":
        return cls(d["kind"], dict(d.get("hyperparameters", {})), int(d.get("seed", 0)))


def default_specs(seed: int = 0) -> list[ClassifierSpec]:
    return [ClassifierSpec(k, {}, seed) for k in KINDS]


class Estimator(Protocol):
    """Works on standardized features and compact labels ``0..n_classes-1``."""

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int,
            rng: np.random.Generator, sample_weight: np.ndarray | None = None) -> "Estimator": ...

    def predict_proba(self, X: np.ndarray) -> np.ndarray: ...

    def to_dict(self) -> dict: ...


def build_estimator(kind: str, params: dict):
    from . import ensembles, knn, mlp, naive_bayes, svm, tree
    table = {
        "NaiveBayes": naive_bayes.GaussianNB,
        "KNN": knn.KNearest,
        "DecisionTree": tree.DecisionTree,
        "LinearSVM": svm.LinearSVM,
        "MLP": mlp.MLP,
        "Bagging": ensembles.Bagging,
        "AdaBoost": ensembles.AdaBoost,
        "RandomForest": ensembles.RandomForest,
        "Stacking": ensembles.Stacking,
    }
    return table[kind](**params)


def estimator_from_dict(d: dict):
    est = build_estimator(d["kind"], d["params"])
    est.load_state(d["state"])
    return est


def fit_estimator(kind: str, params: dict, X, y, n_classes, rng, sample_weight=None):
    return build_estimator(kind, params).fit(X, y, n_classes, rng, sample_weight)


def _std(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean, std


@dataclass
class TrainedModel:
    spec: ClassifierSpec
    class_names: list[str]
    present: list[int]  # dataset class indices seen in training, in order
    mean: np.ndarray
    std: np.ndarray
    estimator: Any
    feature_names: list[str] | None = None

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.mean.shape[0]:
            raise ModelError(f"expected {self.mean.shape[0]} features, got {X.shape[1]}")
        compact = self.estimator.predict_proba(self.standardize(X))
        full = np.zeros((X.shape[0], len(self.class_names)))
        full[:, self.present] = compact
        return full / full.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "spec": self.spec.to_dict(),
            "class_names": list(self.class_names),
            "present": list(self.present),
            "feature_names": self.feature_names,
            "standardization": {"mean": self.mean.tolist(), "std": self.std.tolist()},
            "estimator": {"kind": self.spec.kind, "params": self.spec.params,
                          "state": self.estimator.to_dict()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("format") != MODEL_FORMAT:
            raise ModelError("not a model file")
        if d.get("version") != MODEL_VERSION:
            raise ModelError(f"unsupported model version {d.get('version')}")
        st = d["standardization"]
        return cls(ClassifierSpec.from_dict(d["spec"]), d["class_names"], d["present"],
                   np.array(st["mean"], dtype=float), np.array(st["std"], dtype=float),
                   estimator_from_dict(d["estimator"]), d.get("feature_names"))

    @classmethod
    def loads(cls, text: str) -> "TrainedModel":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        return cls.loads(Path(path).read_text())


def train_arrays(X: np.ndarray, y: np.ndarray, class_names: Sequence[str], spec: ClassifierSpec,
                 feature_names: Sequence[str] | None = None) -> TrainedModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) != len(y):
        raise ModelError("X must be 2-D with one row per label")
    if not np.all(np.isfinite(X)):
        raise ModelError("non-finite feature value")
    present = sorted(set(y.tolist()))
    if len(present) < 2:
        raise ModelError("training data must contain at least two classes")
    remap = {c: i for i, c in enumerate(present)}
    yc = np.array([remap[v] for v in y], dtype=int)
    mean, std = _std(X)
    rng = make_rng(spec.seed)
    est = fit_estimator(spec.kind, spec.params, (X - mean) / std, yc, len(present), rng)
    return TrainedModel(spec, list(class_names), present, mean, std, est,
                        list(feature_names) if feature_names is not None else None)


def train(ds, spec: ClassifierSpec) -> TrainedModel:
    return train_arrays(ds.X, ds.y, ds.class_names, spec, ds.feature_names)


def predict(model: TrainedModel, x) -> tuple[str, list[float]]:
    """Label and class distribution for one feature vector (list or feature mapping)."""
    if isinstance(x, dict):
        names = model.feature_names
        if names is None or set(x) != set(names):
            raise ModelError("feature vector does not match the model schema")
        x = [float(x[n]) for n in names]
    proba = model.predict_proba(np.asarray(x, dtype=float).reshape(1, -1))[0]
    return model.class_names[int(np.argmax(proba))], proba.tolist()


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def ceil_sqrt(n: int) -> int:
    return max(1, math.ceil(math.sqrt(n)))
