"""Classifiers, committees and their evaluation."""
from .base import (KINDS, ClassifierSpec, ModelError, TrainedModel, default_specs, predict,
                   train, train_arrays)
from .evaluation import (ConfusionMatrix, FoldScores, TTestResult, accuracy, auc, auc_multiclass,
                         corrected_t_test, cross_validate, stratified_folds, t_test_from_diffs)

__all__ = [
    "KINDS", "ClassifierSpec", "ModelError", "TrainedModel", "default_specs", "predict", "train",
    "train_arrays", "ConfusionMatrix", "FoldScores", "TTestResult", "accuracy", "auc",
    "auc_multiclass", "corrected_t_test", "cross_validate", "stratified_folds", "t_test_from_diffs",
]
