import io
import json

import numpy as np
import pytest

from adaudit.models import (
    LogRegModel,
    ModelKindError,
    ModelShapeError,
    TruncatedContainerError,
    cnn_forward,
    init_cnn,
    load_model,
    save_model,
    train_mnb,
)
from adaudit.textproc import SparseVector


def roundtrip(model):
    buf = io.StringIO()
    save_model(model, buf)
    return load_model(io.StringIO(buf.getvalue())), buf.getvalue()


def small_mnb():
    docs = [
        SparseVector(dims=32, entries={1: 2, 5: 1}),
        SparseVector(dims=32, entries={9: 3}),
        SparseVector(dims=32, entries={1: 1, 9: 1}),
    ]
    return train_mnb(docs, [0, 1, 1], alpha=0.7)


class TestRoundTrips:
    def test_mnb_log_tables_exact(self):
        model = small_mnb()
        again, _ = roundtrip(model)
        assert again.dims == model.dims
        assert again.alpha == model.alpha
        assert np.array_equal(again.log_prior, model.log_prior)
        assert np.array_equal(again.log_likelihood, model.log_likelihood)

    def test_logreg_exact(self):
        model = LogRegModel(
            weights=np.random.default_rng(0).normal(size=7), bias=-0.125, l2=1e-4, lr=0.05
        )
        again, _ = roundtrip(model)
        assert np.array_equal(again.weights, model.weights)
        assert again.bias == model.bias
        assert (again.l2, again.lr) == (model.l2, model.lr)

    def test_cnn_forward_identical_on_random_inputs(self):
        model = init_cnn(embed_dim=5, filters_per_width=3, hidden=4, seed=2)
        again, _ = roundtrip(model)
        rng = np.random.default_rng(1)
        for _ in range(10):
            x = rng.normal(size=(rng.integers(5, 12), 5))
            assert cnn_forward(model, x)[0] == cnn_forward(again, x)[0]


class TestErrors:
    def test_truncated_container(self):
        _, text = roundtrip(small_mnb())
        with pytest.raises(TruncatedContainerError, match="truncated container"):
            load_model(io.StringIO(text[: len(text) // 2]))

    def test_kind_mismatch(self):
        _, text = roundtrip(small_mnb())
        with pytest.raises(ModelKindError):
            load_model(io.StringIO(text), expect_kind="cnn")

    def test_unknown_kind(self):
        _, text = roundtrip(small_mnb())
        obj = json.loads(text)
        obj["kind"] = "svm"
        with pytest.raises(ModelKindError):
            load_model(io.StringIO(json.dumps(obj)))

    def test_shape_mismatch(self):
        model = init_cnn(embed_dim=5, filters_per_width=3, hidden=4, seed=2)
        buf = io.StringIO()
        save_model(model, buf)
        obj = json.loads(buf.getvalue())
        obj["payload"]["params"]["dense_w"] = [[1.0, 2.0]]
        with pytest.raises(ModelShapeError):
            load_model(io.StringIO(json.dumps(obj)))

    def test_missing_payload(self):
        with pytest.raises(TruncatedContainerError):
            load_model(io.StringIO('{"format": "adaudit-model", "version": 1, "kind": "mnb"}'))

    def test_not_a_container(self):
        with pytest.raises(ValueError):
            load_model(io.StringIO('{"something": "else"}'))
