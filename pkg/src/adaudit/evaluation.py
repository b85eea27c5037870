"""Evaluation harness: k-fold CV, classification metrics with 90% CIs,
ROC/TPR-at-FPR analysis, and inter-annotator agreement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .models import (
    DegenerateDataError,
    TrainConfig,
    as_label_array,
    cnn_predict,
    cnn_train,
    init_cnn,
    predict_proba_logreg,
    predict_proba_mnb,
    train_logreg,
    train_mnb,
)
from .textproc import (
    DEFAULT_DIMS,
    EmbeddingTable,
    embed_sequence,
    hash_vectorize,
    mean_embedding,
    tokenize,
)

Z_90 = 1.645  # two-sided 90% normal quantile

MODEL_KINDS = ("mnb", "logreg", "cnn")


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignments: tuple[int, ...]

    def fold_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignments) if f == fold]


def kfold_split(n: int, k: int, seed: int) -> FoldPlan:
    """Seeded uniform shuffle, round-robin fold assignment."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise ValueError(f"cannot split {n} examples into {k} folds")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    assignments = [0] * n
    for pos, example in enumerate(perm):
        assignments[example] = pos % k
    return FoldPlan(k=k, seed=seed, assignments=tuple(assignments))


def stratified_kfold(labels: Iterable, k: int, seed: int) -> FoldPlan:
    """Shuffle within each class and interleave, so heavily imbalanced sets
    still land both classes in every fold."""
    y = as_label_array(labels)
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(seed)
    assignments = [0] * len(y)
    for cls in (0, 1):
        members = np.flatnonzero(y == cls)
        rng.shuffle(members)
        for pos, example in enumerate(members):
            assignments[example] = pos % k
    return FoldPlan(k=k, seed=seed, assignments=tuple(assignments))


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    political: ClassMetrics
    non_political: ClassMetrics
    macro_f1: float
    auc: float

    def as_flat_dict(self) -> dict[str, float]:
        return {
            "accuracy": self.accuracy,
            "precision_political": self.political.precision,
            "recall_political": self.political.recall,
            "f1_political": self.political.f1,
            "precision_non_political": self.non_political.precision,
            "recall_non_political": self.non_political.recall,
            "f1_non_political": self.non_political.f1,
            "macro_f1": self.macro_f1,
            "auc": self.auc,
        }


def _prf(tp: int, fp: int, fn: int) -> ClassMetrics:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2 * precision * recall / (precision + recall) if precision + recall else 0.0
    )
    return ClassMetrics(precision=precision, recall=recall, f1=f1)


def rank_auc(scores: np.ndarray, y: np.ndarray) -> float:
    """Mann-Whitney AUC; tied positive/negative pairs count one half."""
    n = len(scores)
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        j = i
        while j < n and scores[order[j]] == scores[order[i]]:
            j += 1
        ranks[order[i:j]] = (i + j + 1) / 2.0  # average of 1-based ranks
        i = j
    n_pos = int(y.sum())
    n_neg = n - n_pos
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def compute_metrics(scores: Sequence[float], labels: Iterable, threshold: float = 0.5) -> Metrics:
    """Confusion-derived metrics at ``threshold`` plus rank-statistic AUC.

    Political is predicted when score >= threshold. Undefined precision or
    recall (0/0) is reported as 0.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = as_label_array(labels)
    if len(s) != len(y):
        raise ValueError("scores and labels length mismatch")
    if len(y) == 0 or y.min() == y.max():
        raise DegenerateDataError("AUC undefined: labels contain a single class")
    if s.min() < 0.0 or s.max() > 1.0:
        raise ValueError("scores must lie in [0, 1]")

    pred = s >= threshold
    actual = y == 1
    tp = int(np.sum(pred & actual))
    fp = int(np.sum(pred & ~actual))
    fn = int(np.sum(~pred & actual))
    tn = int(np.sum(~pred & ~actual))

    political = _prf(tp, fp, fn)
    non_political = _prf(tn, fn, fp)
    return Metrics(
        accuracy=(tp + tn) / len(y),
        political=political,
        non_political=non_political,
        macro_f1=(political.f1 + non_political.f1) / 2.0,
        auc=rank_auc(s, y),
    )


@dataclass(frozen=True)
class RocCurve:
    """ROC points as (fpr, tpr, threshold), fpr nondecreasing; starts at
    (0, 0) with an unreachable threshold and ends at (1, 1)."""

    points: tuple[tuple[float, float, float], ...]

    def to_csv(self) -> str:
        lines = ["fpr,tpr,threshold"]
        for fpr, tpr, thr in self.points:
            lines.append(f"{fpr!r},{tpr!r},{thr!r}")
        return "\n".join(lines) + "\n"


def roc_curve(scores: Sequence[float], labels: Iterable) -> RocCurve:
    """Threshold sweep over the distinct score values (descending)."""
    s = np.asarray(scores, dtype=np.float64)
    y = as_label_array(labels)
    if len(y) == 0 or y.min() == y.max():
        raise DegenerateDataError("ROC undefined: labels contain a single class")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos

    order = np.argsort(-s, kind="mergesort")
    points: list[tuple[float, float, float]] = [(0.0, 0.0, math.inf)]
    tp = fp = 0
    i = 0
    while i < len(s):
        j = i
        thr = s[order[i]]
        while j < len(s) and s[order[j]] == thr:
            tp += int(y[order[j]] == 1)
            fp += int(y[order[j]] == 0)
            j += 1
        points.append((fp / n_neg, tp / n_pos, float(thr)))
        i = j
    return RocCurve(points=tuple(points))


def trapezoid_auc(curve: RocCurve) -> float:
    area = 0.0
    for (x0, y0, _), (x1, y1, _) in zip(curve.points, curve.points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def tpr_at_fpr(curve: RocCurve, target_fpr: float) -> tuple[float, float]:
    """TPR and threshold at the greatest curve FPR <= target.

    Conservative: no interpolation, so the returned threshold never exceeds
    the FPR cap when applied to the calibration data.
    """
    if not 0.0 <= target_fpr <= 1.0:
        raise ValueError("target_fpr must be in [0, 1]")
    best = curve.points[0]
    for point in curve.points:
        if point[0] <= target_fpr:
            best = point  # fpr and tpr are nondecreasing along the curve
    return best[1], best[2]


@dataclass(frozen=True)
class CvReport:
    model_kind: str
    k: int
    seed: int
    folds: tuple[Metrics, ...]
    summary: dict[str, tuple[float, float]]  # metric -> (mean, 90% half-width)

    def to_json_obj(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "k": self.k,
            "seed": self.seed,
            "folds": [m.as_flat_dict() for m in self.folds],
            "summary": {
                name: {"mean": mean, "ci90": half}
                for name, (mean, half) in self.summary.items()
            },
        }


def summarize_folds(folds: Sequence[Metrics]) -> dict[str, tuple[float, float]]:
    names = folds[0].as_flat_dict().keys()
    table = {name: np.array([m.as_flat_dict()[name] for m in folds]) for name in names}
    out = {}
    for name, values in table.items():
        mean = float(values.mean())
        half = 0.0
        if len(values) > 1:
            half = float(Z_90 * values.std(ddof=1) / math.sqrt(len(values)))
        out[name] = (mean, half)
    return out


def _featurize(texts: Sequence[str], model_kind: str, table: EmbeddingTable | None, dims: int):
    token_seqs = [tokenize(t) for t in texts]
    if model_kind == "mnb":
        return [hash_vectorize(ts, dims) for ts in token_seqs]
    if table is None:
        raise ValueError(f"{model_kind} needs an embedding table")
    if model_kind == "logreg":
        return np.stack([mean_embedding(ts, table) for ts in token_seqs])
    return [embed_sequence(ts, table) for ts in token_seqs]


def _iter_fold_scores(
    texts: Sequence[str],
    y: np.ndarray,
    model_kind: str,
    cfg: TrainConfig,
    k: int,
    table: EmbeddingTable | None,
    dims: int,
    alpha: float,
    cnn_arch: dict | None,
):
    """Train on k-1 stratified folds, score the held-out one; yields
    (fold, test_idx, scores). Per-fold training seed is cfg.seed + fold."""
    if model_kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {model_kind!r}")
    plan = stratified_kfold(y, k, cfg.seed)
    assignments = np.array(plan.assignments)
    for fold in range(k):
        fold_labels = y[assignments == fold]
        if len(fold_labels) == 0 or fold_labels.min() == fold_labels.max():
            raise DegenerateDataError(f"fold {fold} is missing a class")

    features = _featurize(texts, model_kind, table, dims)
    for fold in range(k):
        test_idx = [i for i in range(len(y)) if plan.assignments[i] == fold]
        train_idx = [i for i in range(len(y)) if plan.assignments[i] != fold]
        fold_cfg = TrainConfig(
            epochs=cfg.epochs,
            batch_size=cfg.batch_size,
            seed=cfg.seed + fold,
            lr=cfg.lr,
            l2=cfg.l2,
            grid=cfg.grid,
        )
        if model_kind == "mnb":
            model = train_mnb([features[i] for i in train_idx], y[train_idx], alpha=alpha)
            scores = [predict_proba_mnb(model, features[i]) for i in test_idx]
        elif model_kind == "logreg":
            model = train_logreg(features[train_idx], y[train_idx], fold_cfg)
            scores = [predict_proba_logreg(model, features[i]) for i in test_idx]
        else:
            arch = dict(cnn_arch or {})
            model = init_cnn(embed_dim=table.dim, seed=fold_cfg.seed, **arch)
            trained = cnn_train(
                [(features[i], int(y[i])) for i in train_idx], fold_cfg, model
            )
            scores = [cnn_predict(trained, features[i]) for i in test_idx]
        yield fold, test_idx, scores


def cross_validate(
    texts: Sequence[str],
    labels: Iterable,
    model_kind: str,
    cfg: TrainConfig,
    k: int = 10,
    table: EmbeddingTable | None = None,
    dims: int = DEFAULT_DIMS,
    alpha: float = 1.0,
    cnn_arch: dict | None = None,
    threshold: float = 0.5,
) -> CvReport:
    """Stratified k-fold CV report: per-fold metrics aggregated as means
    with 90% normal-approximation CIs. Reproducible given cfg.seed."""
    y = as_label_array(labels)
    if len(texts) != len(y):
        raise ValueError("texts and labels length mismatch")
    folds: list[Metrics] = []
    for _, test_idx, scores in _iter_fold_scores(
        texts, y, model_kind, cfg, k, table, dims, alpha, cnn_arch
    ):
        folds.append(compute_metrics(scores, y[test_idx], threshold=threshold))
    return CvReport(
        model_kind=model_kind,
        k=k,
        seed=cfg.seed,
        folds=tuple(folds),
        summary=summarize_folds(folds),
    )


def out_of_fold_scores(
    texts: Sequence[str],
    labels: Iterable,
    model_kind: str,
    cfg: TrainConfig,
    k: int = 10,
    table: EmbeddingTable | None = None,
    dims: int = DEFAULT_DIMS,
    alpha: float = 1.0,
    cnn_arch: dict | None = None,
) -> np.ndarray:
    """Pooled held-out-fold scores for every example.

    These are honest generalization scores, which is what threshold
    calibration must see; scoring training data understates the
    false-positive rate.
    """
    y = as_label_array(labels)
    out = np.zeros(len(y), dtype=np.float64)
    for _, test_idx, scores in _iter_fold_scores(
        texts, y, model_kind, cfg, k, table, dims, alpha, cnn_arch
    ):
        out[test_idx] = scores
    return out


LANDIS_KOCH_BANDS = (
    (0.20, "Slight"),
    (0.40, "Fair"),
    (0.60, "Moderate"),
    (0.80, "Substantial"),
    (1.00, "Almost Perfect"),
)


def landis_koch(kappa: float) -> str:
    """Landis & Koch verbal band for an agreement coefficient."""
    if not -1.0 <= kappa <= 1.0:
        raise ValueError("kappa must be in [-1, 1]")
    if kappa < 0.0:
        return "Poor"
    for upper, band in LANDIS_KOCH_BANDS:
        if kappa <= upper:
            return band
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class AgreementReport:
    kappa: float
    agreement_pct: float
    counts: dict[str, int]  # both_political, a_only, b_only, both_non_political
    landis_koch_band: str

    def to_json_obj(self) -> dict:
        return {
            "kappa": self.kappa,
            "agreement_pct": self.agreement_pct,
            "counts": dict(self.counts),
            "landis_koch_band": self.landis_koch_band,
        }


def cohen_kappa(labels_a: Iterable, labels_b: Iterable) -> AgreementReport:
    """Chance-corrected agreement between two annotators' binary labels."""
    a = as_label_array(labels_a)
    b = as_label_array(labels_b)
    if len(a) != len(b):
        raise ValueError("label vectors differ in length")
    if len(a) == 0:
        raise ValueError("no labels to compare")
    n = len(a)
    both_pol = int(np.sum((a == 1) & (b == 1)))
    a_only = int(np.sum((a == 1) & (b == 0)))
    b_only = int(np.sum((a == 0) & (b == 1)))
    both_non = int(np.sum((a == 0) & (b == 0)))
    p_o = (both_pol + both_non) / n
    p_e = (a == 1).mean() * (b == 1).mean() + (a == 0).mean() * (b == 0).mean()
    if p_e == 1.0:
        kappa = 1.0 if p_o == 1.0 else 0.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    return AgreementReport(
        kappa=float(kappa),
        agreement_pct=100.0 * p_o,
        counts={
            "both_political": both_pol,
            "a_only_political": a_only,
            "b_only_political": b_only,
            "both_non_political": both_non,
        },
        landis_koch_band=landis_koch(float(kappa)),
    )
