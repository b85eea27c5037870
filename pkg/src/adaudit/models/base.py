"""Shared label conventions, training configuration, and model errors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

LABEL_POLITICAL = "political"
LABEL_NON_POLITICAL = "non_political"


class TrainingError(ValueError):
    pass


class DegenerateDataError(TrainingError):
    """Training set is unusable (e.g. only one class present)."""


class TrainingDivergedError(TrainingError):
    """Loss became non-finite during optimization."""


class ShapeMismatchError(ValueError):
    pass


def as_label_array(labels: Iterable) -> np.ndarray:
    """Map labels to a 0/1 array (1 = political). Accepts the two label
    strings, bools, or 0/1 ints."""
    out = []
    for lbl in labels:
        if lbl in (1, True, LABEL_POLITICAL):
            out.append(1)
        elif lbl in (0, False, LABEL_NON_POLITICAL):
            out.append(0)
        else:
            raise ValueError(f"unknown label {lbl!r}")
    return np.array(out, dtype=np.int64)


def require_both_classes(y: np.ndarray) -> None:
    if len(y) == 0 or y.min() == y.max():
        raise DegenerateDataError("degenerate training set: only one class present")


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter grid for logistic-regression model selection."""

    lrs: tuple[float, ...] = (1e-1, 1e-2, 1e-3)
    l2s: tuple[float, ...] = (0.0, 1e-4, 1e-2)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    seed: int = 0
    lr: float = 1e-3
    l2: float = 0.0
    grid: GridSpec | None = None

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def sigmoid(z):
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    if out.ndim == 0:
        return float(out)
    return out


def bce_from_logit(z: float, y: float) -> float:
    """Binary cross-entropy computed from the logit, avoiding log(0)."""
    # softplus(z) - y*z, with softplus evaluated stably
    return float(np.logaddexp(0.0, z) - y * z)


def batches(n: int, batch_size: int, order: Sequence[int]):
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]
