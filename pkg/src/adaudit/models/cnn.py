"""Sentence-classification CNN trained from scratch with RMSProp.

Forward pass: token-embedding matrix (n x d) -> input dropout (train only)
-> per-width valid convolutions with ReLU -> global max-pool over time ->
concatenated pooled vector -> dense ReLU -> dropout (train only) -> single
sigmoid output neuron. Embeddings are frozen; backprop stops at the
convolution inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .base import (
    ShapeMismatchError,
    TrainConfig,
    TrainingDivergedError,
    as_label_array,
    bce_from_logit,
    sigmoid,
)

DEFAULT_FILTER_WIDTHS = (3, 4, 5)
DEFAULT_FILTERS_PER_WIDTH = 120
DEFAULT_HIDDEN = 128
DEFAULT_DROPOUT = 0.25


class EmptySequenceError(ValueError):
    pass


@dataclass
class CnnModel:
    embed_dim: int
    filter_widths: tuple[int, ...]
    filters_per_width: int
    hidden: int
    dropout_p: float
    # conv_w_{w}: (filters, w, embed_dim); conv_b_{w}: (filters,)
    # dense_w: (hidden, pooled_len); dense_b: (hidden,)
    # out_w: (hidden,); out_b: ()
    params: dict[str, np.ndarray]

    @property
    def pooled_len(self) -> int:
        return self.filters_per_width * len(self.filter_widths)

    def validate(self) -> None:
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must be in [0, 1)")
        f, d = self.filters_per_width, self.embed_dim
        for w in self.filter_widths:
            if self.params[f"conv_w_{w}"].shape != (f, w, d):
                raise ShapeMismatchError(f"conv_w_{w} shape")
            if self.params[f"conv_b_{w}"].shape != (f,):
                raise ShapeMismatchError(f"conv_b_{w} shape")
        if self.params["dense_w"].shape != (self.hidden, self.pooled_len):
            raise ShapeMismatchError("dense_w shape")
        if self.params["dense_b"].shape != (self.hidden,):
            raise ShapeMismatchError("dense_b shape")
        if self.params["out_w"].shape != (self.hidden,):
            raise ShapeMismatchError("out_w shape")
        if self.params["out_b"].shape != ():
            raise ShapeMismatchError("out_b shape")

    def copy(self) -> "CnnModel":
        return CnnModel(
            embed_dim=self.embed_dim,
            filter_widths=self.filter_widths,
            filters_per_width=self.filters_per_width,
            hidden=self.hidden,
            dropout_p=self.dropout_p,
            params={k: v.copy() for k, v in self.params.items()},
        )


def _glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_cnn(
    embed_dim: int = 300,
    filter_widths: tuple[int, ...] = DEFAULT_FILTER_WIDTHS,
    filters_per_width: int = DEFAULT_FILTERS_PER_WIDTH,
    hidden: int = DEFAULT_HIDDEN,
    dropout_p: float = DEFAULT_DROPOUT,
    seed: int = 0,
) -> CnnModel:
    """Build a model with Glorot-uniform weights and zero biases."""
    rng = np.random.default_rng(seed)
    f = filters_per_width
    params: dict[str, np.ndarray] = {}
    for w in filter_widths:
        params[f"conv_w_{w}"] = _glorot(rng, (f, w, embed_dim), w * embed_dim, f)
        params[f"conv_b_{w}"] = np.zeros(f)
    pooled_len = f * len(filter_widths)
    params["dense_w"] = _glorot(rng, (hidden, pooled_len), pooled_len, hidden)
    params["dense_b"] = np.zeros(hidden)
    params["out_w"] = _glorot(rng, (hidden,), hidden, 1)
    params["out_b"] = np.zeros(())
    model = CnnModel(
        embed_dim=embed_dim,
        filter_widths=tuple(filter_widths),
        filters_per_width=f,
        hidden=hidden,
        dropout_p=dropout_p,
        params=params,
    )
    model.validate()
    return model


def _pad_input(model: CnnModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.embed_dim:
        if x.size == 0:
            x = x.reshape(0, model.embed_dim)
        else:
            raise ShapeMismatchError(
                f"input must be (n, {model.embed_dim}), got {x.shape}"
            )
    wmax = max(model.filter_widths)
    if x.shape[0] < wmax:
        # Valid convolution needs at least wmax rows; short (or empty)
        # sequences are zero-padded at the end.
        pad = np.zeros((wmax - x.shape[0], model.embed_dim))
        x = np.vstack([x, pad]) if x.shape[0] else pad
    if x.shape[0] == 0:
        raise EmptySequenceError("empty sequence")
    return x


def _windows(x: np.ndarray, w: int) -> np.ndarray:
    """All length-w row windows, flattened to (n-w+1, w*d)."""
    n, d = x.shape
    view = np.lib.stride_tricks.sliding_window_view(x, (w, d))
    return view.reshape(n - w + 1, w * d)


def dropout_mask(rng: np.random.Generator, shape, p: float) -> np.ndarray:
    """Inverted-dropout mask: zeros with probability p, survivors scaled by
    1/(1-p) so the masked layer's expectation equals the eval activation."""
    return (rng.random(shape) >= p) / (1.0 - p)


def route_maxpool_grad(dmax: np.ndarray, argmax: np.ndarray, n_rows: int) -> np.ndarray:
    """Send each filter's pooled gradient to its argmax time step only
    (first index on ties); all other positions receive zero."""
    dconv = np.zeros((n_rows, len(dmax)))
    dconv[argmax, np.arange(len(dmax))] = dmax
    return dconv


def cnn_forward(
    model: CnnModel,
    x: np.ndarray,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> tuple[float, dict]:
    """Run the network on one token matrix.

    Returns the political probability and the cached activations needed by
    backprop. Eval mode is deterministic and dropout-free; train mode draws
    the input mask first, then the hidden mask, from ``rng``.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "train" and rng is None:
        raise ValueError("train mode requires an rng for dropout")
    x = _pad_input(model, x)

    p = model.dropout_p
    if mode == "train" and p > 0.0:
        xd = x * dropout_mask(rng, x.shape, p)
    else:
        xd = x

    cache: dict = {"xd": xd, "mode": mode}
    pooled_parts = []
    for w in model.filter_widths:
        windows = _windows(xd, w)
        wf = model.params[f"conv_w_{w}"].reshape(model.filters_per_width, -1)
        pre = windows @ wf.T + model.params[f"conv_b_{w}"]
        act = np.maximum(pre, 0.0)
        argmax = act.argmax(axis=0)  # first index on ties
        pooled_parts.append(act[argmax, np.arange(act.shape[1])])
        cache[f"windows_{w}"] = windows
        cache[f"pre_{w}"] = pre
        cache[f"argmax_{w}"] = argmax
    pooled = np.concatenate(pooled_parts)

    pre_h = model.params["dense_w"] @ pooled + model.params["dense_b"]
    h = np.maximum(pre_h, 0.0)
    if mode == "train" and p > 0.0:
        h_mask = dropout_mask(rng, h.shape, p)
        hd = h * h_mask
    else:
        h_mask = None
        hd = h
    z = float(model.params["out_w"] @ hd + model.params["out_b"])

    cache.update(pooled=pooled, pre_h=pre_h, h=h, h_mask=h_mask, hd=hd, z=z)
    return float(sigmoid(z)), cache


def cnn_loss(model: CnnModel, x: np.ndarray, y: float, mode: str = "eval",
             rng: np.random.Generator | None = None) -> tuple[float, dict]:
    _, cache = cnn_forward(model, x, mode=mode, rng=rng)
    return bce_from_logit(cache["z"], y), cache


def cnn_backward(model: CnnModel, cache: dict, y: float) -> dict[str, np.ndarray]:
    """Gradients of the cross-entropy loss w.r.t. every parameter.

    Max-pool routes gradient only to the argmax time step; ReLU gates on the
    cached pre-activations; dropout masks already carry inverted scaling.
    """
    grads: dict[str, np.ndarray] = {}
    dz = sigmoid(cache["z"]) - y  # d(loss)/d(logit)

    grads["out_w"] = dz * cache["hd"]
    grads["out_b"] = np.asarray(dz)
    dhd = dz * model.params["out_w"]
    dh = dhd * cache["h_mask"] if cache["h_mask"] is not None else dhd
    dpre_h = dh * (cache["pre_h"] > 0.0)
    grads["dense_w"] = np.outer(dpre_h, cache["pooled"])
    grads["dense_b"] = dpre_h
    dpooled = model.params["dense_w"].T @ dpre_h

    f = model.filters_per_width
    for i, w in enumerate(model.filter_widths):
        dmax = dpooled[i * f : (i + 1) * f]
        pre = cache[f"pre_{w}"]
        dpre = route_maxpool_grad(dmax, cache[f"argmax_{w}"], pre.shape[0])
        dpre *= pre > 0.0
        grads[f"conv_w_{w}"] = (dpre.T @ cache[f"windows_{w}"]).reshape(
            f, w, model.embed_dim
        )
        grads[f"conv_b_{w}"] = dpre.sum(axis=0)
    return grads


@dataclass
class RmsPropState:
    """Per-parameter squared-gradient accumulators for RMSProp."""

    lr: float = 1e-3
    decay: float = 0.9
    epsilon: float = 1e-8
    acc: dict[str, np.ndarray] = field(default_factory=dict)

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name, g in grads.items():
            a = self.acc.get(name)
            if a is None:
                a = np.zeros_like(params[name])
            a = self.decay * a + (1.0 - self.decay) * g * g
            self.acc[name] = a
            params[name] = params[name] - self.lr * g / (np.sqrt(a) + self.epsilon)


def cnn_train(
    dataset: Sequence[tuple[np.ndarray, object]],
    cfg: TrainConfig,
    model: CnnModel,
    opt: RmsPropState | None = None,
) -> CnnModel:
    """Minibatch RMSProp training; deterministic given cfg.seed.

    One generator seeded with cfg.seed drives both the epoch shuffles and
    the dropout masks, so identical seeds give bit-identical parameters.
    A single-class (even single-example) dataset is allowed; it only makes
    sense for overfitting checks, but nothing in the math forbids it.
    """
    if not dataset:
        raise ValueError("empty training set")
    y = as_label_array([label for _, label in dataset]).astype(np.float64)
    if opt is None:
        opt = RmsPropState(lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    model = model.copy()
    params = model.params

    n = len(dataset)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for batch_idx, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            batch_grads: dict[str, np.ndarray] = {
                k: np.zeros_like(v) for k, v in params.items()
            }
            batch_loss = 0.0
            with np.errstate(over="ignore", invalid="ignore"):
                for i in idx:
                    loss, cache = cnn_loss(model, dataset[i][0], y[i], mode="train", rng=rng)
                    batch_loss += loss
                    for k, g in cnn_backward(model, cache, y[i]).items():
                        batch_grads[k] += g
            batch_loss /= len(idx)
            if not np.isfinite(batch_loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {batch_idx}"
                )
            for k in batch_grads:
                batch_grads[k] /= len(idx)
            opt.step(params, batch_grads)
    return model


def cnn_predict(model: CnnModel, x: np.ndarray) -> float:
    prob, _ = cnn_forward(model, x, mode="eval")
    return prob
