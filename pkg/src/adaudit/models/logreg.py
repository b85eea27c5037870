"""L2-regularized logistic regression on dense embedding features.

Trained by full-batch gradient descent; a small grid search over
(learning rate, l2) picks hyperparameters on an internal held-out split.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .base import (
    GridSpec,
    ShapeMismatchError,
    TrainConfig,
    TrainingDivergedError,
    as_label_array,
    require_both_classes,
    sigmoid,
)


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    l2: float
    lr: float


def predict_proba_logreg(model: LogRegModel, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.weights.shape:
        raise ShapeMismatchError(
            f"feature shape {x.shape} does not match weights {model.weights.shape}"
        )
    return float(sigmoid(model.weights @ x + model.bias))


def logreg_loss(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean binary cross-entropy plus (l2/2)*||w||^2; bias unregularized."""
    z = X @ weights + bias
    bce = np.mean(np.logaddexp(0.0, z) - y * z)
    return float(bce + 0.5 * l2 * weights @ weights)


def logreg_grad(
    weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, l2: float
) -> tuple[np.ndarray, float]:
    p = sigmoid(X @ weights + bias)
    resid = p - y
    grad_w = X.T @ resid / len(y) + l2 * weights
    grad_b = float(resid.mean())
    return grad_w, grad_b


def _fit(X: np.ndarray, y: np.ndarray, lr: float, l2: float, epochs: int) -> LogRegModel:
    weights = np.zeros(X.shape[1], dtype=np.float64)
    bias = 0.0
    for _ in range(epochs):
        grad_w, grad_b = logreg_grad(weights, bias, X, y, l2)
        weights = weights - lr * grad_w
        bias = bias - lr * grad_b
        with np.errstate(over="ignore", invalid="ignore"):
            loss = logreg_loss(weights, bias, X, y, l2)
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"logistic regression diverged at lr={lr}, l2={l2}")
    return LogRegModel(weights=weights, bias=bias, l2=l2, lr=lr)


def train_logreg(features, labels: Iterable, cfg: TrainConfig) -> LogRegModel:
    """Train with cfg's (lr, l2), or grid-search them on a seeded 80/20
    split and refit the winner on all data. Deterministic given cfg.seed."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("features must be a 2-D array of dense vectors")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite feature value")
    y = as_label_array(labels).astype(np.float64)
    if len(y) != X.shape[0]:
        raise ValueError("features and labels length mismatch")
    require_both_classes(y.astype(np.int64))

    if cfg.grid is None:
        return _fit(X, y, cfg.lr, cfg.l2, cfg.epochs)
    return _grid_search(X, y, cfg)


def _grid_search(X: np.ndarray, y: np.ndarray, cfg: TrainConfig) -> LogRegModel:
    grid: GridSpec = cfg.grid
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(y))
    cut = max(1, int(round(len(y) * 0.8)))
    if cut >= len(y):
        cut = len(y) - 1
    train_idx, val_idx = order[:cut], order[cut:]

    best = None  # (accuracy, -grid position) so ties keep grid order
    best_combo = None
    for pos_lr, lr in enumerate(grid.lrs):
        for pos_l2, l2 in enumerate(grid.l2s):
            model = _fit(X[train_idx], y[train_idx], lr, l2, cfg.epochs)
            preds = sigmoid(X[val_idx] @ model.weights + model.bias) >= 0.5
            acc = float(np.mean(preds == (y[val_idx] >= 0.5)))
            key = (acc, -(pos_lr * len(grid.l2s) + pos_l2))
            if best is None or key > best:
                best = key
                best_combo = (lr, l2)
    lr, l2 = best_combo
    return _fit(X, y, lr, l2, cfg.epochs)
