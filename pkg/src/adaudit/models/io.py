"""Self-describing JSON container for trained models.

Layout: {"format": "adaudit-model", "version": 1, "kind": ..., "payload":
{...}}. Floats are emitted with Python's shortest round-trip repr, so
load(save(m)) reproduces parameters bit-exactly.
"""

from __future__ import annotations

import json
from typing import IO

import numpy as np

from .cnn import CnnModel
from .logreg import LogRegModel
from .mnb import MnbModel

FORMAT_TAG = "adaudit-model"
FORMAT_VERSION = 1


class ModelIOError(ValueError):
    pass


class TruncatedContainerError(ModelIOError):
    pass


class ModelKindError(ModelIOError):
    pass


class ModelShapeError(ModelIOError):
    pass


def _mnb_payload(model: MnbModel) -> dict:
    # Most features were never seen in training and share one smoothed
    # log-likelihood per class; store only the exceptions.
    classes = []
    for row in model.log_likelihood:
        default = float(row.min())
        idx = np.nonzero(row != default)[0]
        classes.append(
            {
                "default": default,
                "indices": idx.tolist(),
                "values": row[idx].tolist(),
            }
        )
    return {
        "dims": model.dims,
        "alpha": model.alpha,
        "log_prior": model.log_prior.tolist(),
        "classes": classes,
    }


def _mnb_from_payload(payload: dict) -> MnbModel:
    dims = payload["dims"]
    log_prior = np.array(payload["log_prior"], dtype=np.float64)
    if log_prior.shape != (2,):
        raise ModelShapeError("log_prior must have 2 entries")
    if len(payload["classes"]) != 2:
        raise ModelShapeError("expected 2 likelihood tables")
    rows = []
    for cls in payload["classes"]:
        row = np.full(dims, cls["default"], dtype=np.float64)
        idx = np.array(cls["indices"], dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= dims):
            raise ModelShapeError("likelihood index outside feature space")
        row[idx] = np.array(cls["values"], dtype=np.float64)
        rows.append(row)
    return MnbModel(
        dims=dims,
        alpha=payload["alpha"],
        log_prior=log_prior,
        log_likelihood=np.stack(rows),
    )


def _logreg_payload(model: LogRegModel) -> dict:
    return {
        "weights": model.weights.tolist(),
        "bias": model.bias,
        "l2": model.l2,
        "lr": model.lr,
    }


def _logreg_from_payload(payload: dict) -> LogRegModel:
    weights = np.array(payload["weights"], dtype=np.float64)
    if weights.ndim != 1:
        raise ModelShapeError("weights must be a vector")
    return LogRegModel(
        weights=weights,
        bias=float(payload["bias"]),
        l2=float(payload["l2"]),
        lr=float(payload["lr"]),
    )


def _cnn_payload(model: CnnModel) -> dict:
    return {
        "embed_dim": model.embed_dim,
        "filter_widths": list(model.filter_widths),
        "filters_per_width": model.filters_per_width,
        "hidden": model.hidden,
        "dropout_p": model.dropout_p,
        "params": {k: v.tolist() for k, v in model.params.items()},
    }


def _cnn_from_payload(payload: dict) -> CnnModel:
    params = {k: np.array(v, dtype=np.float64) for k, v in payload["params"].items()}
    model = CnnModel(
        embed_dim=payload["embed_dim"],
        filter_widths=tuple(payload["filter_widths"]),
        filters_per_width=payload["filters_per_width"],
        hidden=payload["hidden"],
        dropout_p=payload["dropout_p"],
        params=params,
    )
    try:
        model.validate()
    except (KeyError, ValueError) as exc:
        raise ModelShapeError(str(exc)) from exc
    return model


_KINDS = {
    MnbModel: ("mnb", _mnb_payload),
    LogRegModel: ("logreg", _logreg_payload),
    CnnModel: ("cnn", _cnn_payload),
}

_LOADERS = {
    "mnb": _mnb_from_payload,
    "logreg": _logreg_from_payload,
    "cnn": _cnn_from_payload,
}


def model_kind(model) -> str:
    for cls, (kind, _) in _KINDS.items():
        if isinstance(model, cls):
            return kind
    raise ModelKindError(f"unsupported model type {type(model).__name__}")


def save_model(model, stream: IO[str]) -> None:
    for cls, (kind, payload_fn) in _KINDS.items():
        if isinstance(model, cls):
            container = {
                "format": FORMAT_TAG,
                "version": FORMAT_VERSION,
                "kind": kind,
                "payload": payload_fn(model),
            }
            json.dump(container, stream)
            return
    raise ModelKindError(f"unsupported model type {type(model).__name__}")


def load_model(stream: IO[str], expect_kind: str | None = None):
    try:
        container = json.load(stream)
    except json.JSONDecodeError as exc:
        raise TruncatedContainerError("truncated container") from exc
    if not isinstance(container, dict) or container.get("format") != FORMAT_TAG:
        raise ModelIOError("not a model container")
    if container.get("version") != FORMAT_VERSION:
        raise ModelIOError(f"unsupported container version {container.get('version')}")
    kind = container.get("kind")
    if kind not in _LOADERS:
        raise ModelKindError(f"unknown model kind {kind!r}")
    if expect_kind is not None and kind != expect_kind:
        raise ModelKindError(f"expected {expect_kind!r} model, found {kind!r}")
    payload = container.get("payload")
    if payload is None:
        raise TruncatedContainerError("truncated container")
    try:
        return _LOADERS[kind](payload)
    except KeyError as exc:
        raise TruncatedContainerError("truncated container") from exc


def save_model_path(model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        save_model(model, fh)


def load_model_path(path: str, expect_kind: str | None = None):
    with open(path, "r", encoding="utf-8") as fh:
        return load_model(fh, expect_kind=expect_kind)
