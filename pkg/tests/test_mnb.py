"""Naive Bayes checked against brute-force Bayes enumeration on a 4-slot
vocabulary: probabilities computed with plain products, no logs."""

import numpy as np
import pytest

from adaudit.models import (
    DegenerateDataError,
    ShapeMismatchError,
    predict_proba_mnb,
    train_mnb,
)
from adaudit.textproc import SparseVector


def sv(dims, **entries):
    return SparseVector(dims=dims, entries={int(k): v for k, v in entries.items()})


def brute_force_posterior(docs, labels, alpha, dims, x):
    """P(political | x) from first principles: smoothed per-class token
    probabilities and products over the query counts."""
    out = []
    for cls in (0, 1):
        members = [d for d, l in zip(docs, labels) if l == cls]
        prior = len(members) / len(docs)
        counts = [0] * dims
        for doc in members:
            for idx, c in doc.entries.items():
                counts[idx] += c
        total = sum(counts)
        likelihood = prior
        for idx, c in x.entries.items():
            p_token = (counts[idx] + alpha) / (total + alpha * dims)
            likelihood *= p_token**c
        out.append(likelihood)
    return out[1] / (out[0] + out[1])


class TestTrainMnb:
    def test_matches_hand_bayes_table(self):
        docs = [sv(4, **{"0": 1}), sv(4, **{"1": 1})]
        labels = [0, 1]
        model = train_mnb(docs, labels, alpha=1.0)
        for query in (sv(4, **{"0": 1}), sv(4, **{"1": 2}), sv(4, **{"0": 1, "1": 1}), sv(4)):
            expected = brute_force_posterior(docs, labels, 1.0, 4, query)
            assert predict_proba_mnb(model, query) == pytest.approx(expected, abs=1e-9)

    def test_balanced_priors(self):
        docs = [sv(4, **{"0": 1}), sv(4, **{"1": 1})]
        model = train_mnb(docs, [0, 1], alpha=1.0)
        assert np.allclose(model.log_prior, np.log([0.5, 0.5]), atol=1e-12)

    def test_doubled_counts_keep_argmax(self):
        rng = np.random.default_rng(8)
        dims = 6
        docs = []
        labels = []
        for i in range(10):
            label = i % 2
            base = {0, 1, 2} if label else {3, 4, 5}
            entries = {j: int(rng.integers(1, 4)) for j in base if rng.random() < 0.8}
            entries = entries or {min(base): 1}
            docs.append(SparseVector(dims=dims, entries=entries))
            labels.append(label)
        model = train_mnb(docs, labels, alpha=1.0)
        doubled = [
            SparseVector(dims=dims, entries={k: 2 * v for k, v in d.entries.items()})
            for d in docs
        ]
        model2 = train_mnb(doubled, labels, alpha=1.0)
        for doc, doc2 in zip(docs, doubled):
            pred1 = predict_proba_mnb(model, doc) >= 0.5
            pred2 = predict_proba_mnb(model2, doc2) >= 0.5
            assert pred1 == pred2

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateDataError, match="degenerate training set"):
            train_mnb([sv(4, **{"0": 1}), sv(4, **{"1": 1})], [1, 1])

    def test_alpha_must_be_positive(self):
        with pytest.raises(ValueError):
            train_mnb([sv(4, **{"0": 1}), sv(4, **{"1": 1})], [0, 1], alpha=0.0)

    def test_likelihood_normalization(self):
        rng = np.random.default_rng(1)
        docs = [
            SparseVector(dims=16, entries={int(j): int(rng.integers(1, 5)) for j in rng.choice(16, size=4, replace=False)})
            for _ in range(20)
        ]
        labels = [int(rng.integers(0, 2)) for _ in range(19)] + [1]
        labels[0] = 0
        model = train_mnb(docs, labels, alpha=0.5)
        for row in model.log_likelihood:
            assert abs(np.exp(row).sum() - 1.0) < 1e-9


class TestPredictMnb:
    def test_empty_vector_returns_prior(self):
        docs = [sv(4, **{"0": 1})] * 3 + [sv(4, **{"1": 1})]
        model = train_mnb(docs, [0, 0, 0, 1], alpha=1.0)
        assert predict_proba_mnb(model, sv(4)) == pytest.approx(0.25, abs=1e-12)

    def test_output_in_open_interval(self):
        docs = [sv(4, **{"0": 5}), sv(4, **{"1": 5})]
        model = train_mnb(docs, [0, 1], alpha=1.0)
        for query in (sv(4, **{"0": 5}), sv(4, **{"1": 5}), sv(4, **{"0": 2, "1": 3})):
            p = predict_proba_mnb(model, query)
            assert 0.0 < p < 1.0

    def test_extreme_counts_stay_in_closed_range(self):
        # the softmax may round to exactly 0 or 1 once the log-posterior gap
        # exceeds float precision, but never leaves [0, 1] or goes non-finite
        docs = [sv(4, **{"0": 5}), sv(4, **{"1": 5})]
        model = train_mnb(docs, [0, 1], alpha=1.0)
        for query in (sv(4, **{"0": 500}), sv(4, **{"1": 500})):
            p = predict_proba_mnb(model, query)
            assert 0.0 <= p <= 1.0 and np.isfinite(p)

    def test_dims_mismatch_rejected(self):
        model = train_mnb([sv(4, **{"0": 1}), sv(4, **{"1": 1})], [0, 1])
        with pytest.raises(ShapeMismatchError):
            predict_proba_mnb(model, sv(8, **{"1": 1}))

    def test_order_free_training(self):
        rng = np.random.default_rng(5)
        docs = [
            SparseVector(dims=8, entries={int(rng.integers(0, 8)): 1})
            for _ in range(12)
        ]
        labels = [i % 2 for i in range(12)]
        model_a = train_mnb(docs, labels)
        perm = rng.permutation(12)
        model_b = train_mnb([docs[i] for i in perm], [labels[i] for i in perm])
        assert np.array_equal(model_a.log_prior, model_b.log_prior)
        assert np.array_equal(model_a.log_likelihood, model_b.log_likelihood)
