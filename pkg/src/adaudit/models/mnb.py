"""Multinomial Naive Bayes over hashed bag-of-words counts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..textproc import SparseVector
from .base import ShapeMismatchError, as_label_array, require_both_classes


@dataclass
class MnbModel:
    """Class log-priors plus per-class token log-likelihood tables.

    Index 1 is the political class. For each class, exp(log_likelihood)
    sums to one; Laplace smoothing alpha keeps every term finite.
    """

    dims: int
    alpha: float
    log_prior: np.ndarray  # shape (2,)
    log_likelihood: np.ndarray  # shape (2, dims)

    def validate(self) -> None:
        assert self.log_prior.shape == (2,)
        assert self.log_likelihood.shape == (2, self.dims)
        assert abs(np.exp(self.log_prior).sum() - 1.0) < 1e-12
        for row in self.log_likelihood:
            assert abs(np.exp(row).sum() - 1.0) < 1e-9


def train_mnb(
    features: Sequence[SparseVector], labels: Iterable, alpha: float = 1.0
) -> MnbModel:
    """Fit priors and smoothed token likelihoods from counted features."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    y = as_label_array(labels)
    if len(features) != len(y):
        raise ValueError("features and labels length mismatch")
    require_both_classes(y)
    dims = features[0].dims
    counts = np.zeros((2, dims), dtype=np.float64)
    for vec, label in zip(features, y):
        if vec.dims != dims:
            raise ShapeMismatchError("inconsistent feature dims")
        for idx, count in vec.entries.items():
            counts[label, idx] += count
    totals = counts.sum(axis=1, keepdims=True)
    log_likelihood = np.log(counts + alpha) - np.log(totals + alpha * dims)
    class_freq = np.bincount(y, minlength=2) / len(y)
    model = MnbModel(
        dims=dims,
        alpha=alpha,
        log_prior=np.log(class_freq),
        log_likelihood=log_likelihood,
    )
    model.validate()
    return model


def predict_proba_mnb(model: MnbModel, x: SparseVector) -> float:
    """Posterior probability that ``x`` is political, via stabilized softmax
    over the two class log-posteriors."""
    if x.dims != model.dims:
        raise ShapeMismatchError(
            f"feature dims {x.dims} do not match model dims {model.dims}"
        )
    log_post = model.log_prior.copy()
    for idx, count in x.entries.items():
        log_post += count * model.log_likelihood[:, idx]
    m = log_post.max()
    expd = np.exp(log_post - m)
    return float(expd[1] / expd.sum())
