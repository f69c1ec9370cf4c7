"""Classification scoring helpers (per-class F1, weighted F1, confusion)."""
from __future__ import annotations

import numpy as np


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Counts [true, predicted]."""
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape:
        raise ValueError("label arrays differ in length")
    cm = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def per_class_f1(y_true, y_pred, n_classes: int) -> np.ndarray:
    """F1 per class; classes with no true or predicted members score 0."""
    cm = confusion_matrix(y_true, y_pred, n_classes)
    tp = np.diag(cm).astype(float)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    denom = 2 * tp + fp + fn
    out = np.zeros(n_classes)
    nz = denom > 0
    out[nz] = 2 * tp[nz] / denom[nz]
    return out


def weighted_f1(y_true, y_pred, n_classes: int) -> float:
    """Support-weighted mean of per-class F1."""
    y_true = np.asarray(y_true, dtype=int)
    if y_true.size == 0:
        raise ValueError("no samples to score")
    support = np.bincount(y_true, minlength=n_classes).astype(float)
    f1 = per_class_f1(y_true, y_pred, n_classes)
    return float((f1 * support).sum() / support.sum())


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise ValueError("no samples to score")
    return float((y_true == y_pred).mean())
