"""Command-line driver for the full audit workflow.

Exit codes: 0 success, 1 usage error, 2 data error. Every randomized step
takes --seed and is reproducible; outputs that the service also exposes are
byte-identical between the two paths.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import date
from pathlib import Path

from .audit import (
    CrawlSnapshot,
    build_audit_report,
    calibrate_threshold,
    coverage_stats,
    probe_estimate,
    write_flag_events,
)
from .corpus import (
    PeriodFilter,
    dedup_by_caption,
    filter_language,
    filter_period,
    ingest_path,
    serialize_path,
)
from .evaluation import cohen_kappa, cross_validate
from .models import (
    GridSpec,
    TextScorer,
    TrainConfig,
    init_cnn,
    cnn_train,
    load_model_path,
    save_model_path,
    train_logreg,
    train_mnb,
)
from .synth import SynthConfig, generate, load_labeled
from .textproc import (
    DEFAULT_DIMS,
    embed_sequence,
    hash_vectorize,
    load_embeddings,
    mean_embedding,
    tokenize,
)

ENV_DATA_DIR = "ADAUDIT_DATA_DIR"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1 on usage errors
        raise UsageError(message)


def _emit(args, obj: dict, human: str) -> None:
    if args.json:
        sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(human.rstrip("\n") + "\n")


def _write_json(path: str, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def _data_path(value: str) -> str:
    """Resolve a path against the data-directory env var when relative."""
    base = os.environ.get(ENV_DATA_DIR)
    if base and not os.path.isabs(value) and not os.path.exists(value):
        candidate = os.path.join(base, value)
        if os.path.exists(candidate):
            return candidate
    return value


def _load_scorer(model_path: str, embeddings_path: str | None) -> TextScorer:
    model = load_model_path(_data_path(model_path))
    table = None
    if embeddings_path:
        with open(_data_path(embeddings_path), "r", encoding="utf-8") as fh:
            table = load_embeddings(fh)
    return TextScorer(model=model, table=table, model_id=Path(model_path).name)


def _load_table(args):
    if not getattr(args, "embeddings", None):
        raise UsageError(f"--embeddings is required for model kind {args.model!r}")
    with open(_data_path(args.embeddings), "r", encoding="utf-8") as fh:
        return load_embeddings(fh)


def _parse_date(value: str) -> date:
    return date.fromisoformat(value)


def _threshold_from_args(args) -> float:
    if args.threshold is not None:
        return args.threshold
    if args.calibration:
        with open(_data_path(args.calibration), "r", encoding="utf-8") as fh:
            return json.load(fh)["threshold"]
    raise UsageError("either --threshold or --calibration is required")


# --- subcommand implementations -------------------------------------------

def cmd_ingest(args) -> int:
    store = ingest_path(_data_path(args.input))
    serialize_path(store, args.output)
    prov = store.provenance
    _emit(
        args,
        {"records": len(store), "rows": prov.rows, "skipped": prov.skipped},
        f"ingested {len(store)} ads from {prov.rows} rows ({prov.skipped} skipped)",
    )
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    cfg = SynthConfig(
        seed=args.seed,
        n_labeled=args.labeled,
        n_corpus=args.corpus,
        political_rate=args.political_rate,
        embed_dim=args.embed_dim,
    )
    meta = generate(cfg, args.out)
    _emit(
        args,
        meta,
        f"wrote synthetic fixture to {args.out}: {meta['n_labeled']} labeled ads, "
        f"{meta['n_corpus']} corpus ads ({meta['n_political']} political, "
        f"{meta['survivors']} dedup survivors)",
    )
    return EXIT_OK


def cmd_dedup(args) -> int:
    store = ingest_path(_data_path(args.input))
    deduped = dedup_by_caption(store)
    serialize_path(deduped, args.output)
    _emit(
        args,
        {"before": len(store), "after": len(deduped)},
        f"dedup: {len(store)} -> {len(deduped)} ads",
    )
    return EXIT_OK


def cmd_filter(args) -> int:
    store = ingest_path(_data_path(args.input))
    before = len(store)
    if args.lang:
        store = filter_language(store, args.lang)
    if args.from_date or args.to_date:
        if not (args.from_date and args.to_date):
            raise UsageError("--from and --to must be given together")
        store = filter_period(
            store, PeriodFilter(_parse_date(args.from_date), _parse_date(args.to_date))
        )
    serialize_path(store, args.output)
    _emit(
        args,
        {"before": before, "after": len(store)},
        f"filter: {before} -> {len(store)} ads",
    )
    return EXIT_OK


def _train_features(kind, texts, args, table):
    token_seqs = [tokenize(t) for t in texts]
    if kind == "mnb":
        return [hash_vectorize(ts, args.dims) for ts in token_seqs]
    if kind == "logreg":
        import numpy as np

        return np.stack([mean_embedding(ts, table) for ts in token_seqs])
    return [embed_sequence(ts, table) for ts in token_seqs]


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed if args.seed is not None else 0,
        lr=args.lr,
        l2=args.l2,
        grid=GridSpec() if getattr(args, "grid", False) else None,
    )


def cmd_train(args) -> int:
    texts, labels = load_labeled(_data_path(args.ads), _data_path(args.truth))
    kind = args.model
    if kind in ("logreg", "cnn") and args.seed is None:
        raise UsageError(f"--seed is required when training {kind}")
    table = _load_table(args) if kind in ("logreg", "cnn") else None
    features = _train_features(kind, texts, args, table)
    cfg = _train_config(args)
    if kind == "mnb":
        model = train_mnb(features, labels, alpha=args.alpha)
    elif kind == "logreg":
        model = train_logreg(features, labels, cfg)
    else:
        widths = tuple(int(w) for w in args.widths.split(","))
        model = init_cnn(
            embed_dim=table.dim,
            filter_widths=widths,
            filters_per_width=args.filters,
            hidden=args.hidden,
            dropout_p=args.dropout,
            seed=cfg.seed,
        )
        model = cnn_train(list(zip(features, labels)), cfg, model)
    save_model_path(model, args.out)
    _emit(
        args,
        {"model": kind, "examples": len(texts), "out": args.out},
        f"trained {kind} on {len(texts)} ads -> {args.out}",
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    texts, labels = load_labeled(_data_path(args.ads), _data_path(args.truth))
    kind = args.model
    table = _load_table(args) if kind in ("logreg", "cnn") else None
    cfg = _train_config(args)
    cnn_arch = None
    if kind == "cnn":
        cnn_arch = {
            "filter_widths": tuple(int(w) for w in args.widths.split(",")),
            "filters_per_width": args.filters,
            "hidden": args.hidden,
            "dropout_p": args.dropout,
        }
    report = cross_validate(
        texts,
        labels,
        kind,
        cfg,
        k=args.folds,
        table=table,
        dims=args.dims,
        alpha=args.alpha,
        cnn_arch=cnn_arch,
    )
    obj = report.to_json_obj()
    if args.out:
        _write_json(args.out, obj)
    acc, acc_ci = report.summary["accuracy"]
    auc, auc_ci = report.summary["auc"]
    mf1, mf1_ci = report.summary["macro_f1"]
    _emit(
        args,
        obj,
        f"{kind} {args.folds}-fold CV: accuracy {acc:.4f} (±{acc_ci:.4f}), "
        f"AUC {auc:.4f} (±{auc_ci:.4f}), macro-F1 {mf1:.4f} (±{mf1_ci:.4f})",
    )
    return EXIT_OK


def _score_texts(scorer: TextScorer, texts) -> list[float]:
    return [scorer.predict_text(t) for t in texts]


def cmd_calibrate(args) -> int:
    texts, labels = load_labeled(_data_path(args.ads), _data_path(args.truth))
    if args.model_kind:
        # Out-of-fold calibration: train on k-1 folds, score the held-out
        # fold, pool. In-sample scores would understate the FPR.
        if args.seed is None:
            raise UsageError("--seed is required with --model-kind")
        from .evaluation import out_of_fold_scores

        kind = args.model_kind
        table = None
        if kind in ("logreg", "cnn"):
            if not args.embeddings:
                raise UsageError(f"--embeddings is required for model kind {kind!r}")
            with open(_data_path(args.embeddings), "r", encoding="utf-8") as fh:
                table = load_embeddings(fh)
        cfg = _train_config(args)
        cnn_arch = None
        if kind == "cnn":
            cnn_arch = {
                "filter_widths": tuple(int(w) for w in args.widths.split(",")),
                "filters_per_width": args.filters,
                "hidden": args.hidden,
                "dropout_p": args.dropout,
            }
        scores = out_of_fold_scores(
            texts, labels, kind, cfg, k=args.folds, table=table,
            dims=args.dims, alpha=args.alpha, cnn_arch=cnn_arch,
        )
    elif args.model:
        # Trained-container mode: the ads must be held out from training.
        scorer = _load_scorer(args.model, args.embeddings)
        scores = _score_texts(scorer, texts)
    else:
        raise UsageError("either --model or --model-kind is required")
    cal = calibrate_threshold(scores, labels, args.target_fpr)
    obj = cal.to_json_obj()
    if args.out:
        _write_json(args.out, obj)
    _emit(
        args,
        obj,
        f"threshold {cal.threshold!r} (achieved fpr {cal.achieved_fpr:.4f}, "
        f"tpr {cal.achieved_tpr:.4f}) for target fpr {cal.target_fpr}",
    )
    return EXIT_OK


def cmd_score(args) -> int:
    scorer = _load_scorer(args.model, args.embeddings)
    store = ingest_path(_data_path(args.ads))
    threshold = _threshold_from_args(args)
    from .audit import score_corpus

    flags = score_corpus(scorer, store, threshold)
    lines = [json.dumps(f.to_json_obj(), ensure_ascii=False) for f in flags]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + ("\n" if lines else ""))
    if args.json:
        sys.stdout.write(
            json.dumps({"flagged": len(flags), "corpus": len(store)}, indent=2) + "\n"
        )
    else:
        sys.stdout.write(f"flagged {len(flags)} of {len(store)} ads\n")
    return EXIT_OK


def cmd_audit(args) -> int:
    scorer = _load_scorer(args.model, args.embeddings)
    store = ingest_path(_data_path(args.corpus))
    corpus_in = len(store)
    if args.lang:
        store = filter_language(store, args.lang)
    if args.from_date and args.to_date:
        store = filter_period(
            store, PeriodFilter(_parse_date(args.from_date), _parse_date(args.to_date))
        )
    if not args.no_dedup:
        store = dedup_by_caption(store)
    declared = ingest_path(_data_path(args.declared)) if args.declared else None

    calibration = None
    if args.calibration:
        with open(_data_path(args.calibration), "r", encoding="utf-8") as fh:
            cal_obj = json.load(fh)
        threshold = cal_obj["threshold"]
        from .audit import CalibratedThreshold

        calibration = CalibratedThreshold(
            threshold=cal_obj["threshold"],
            achieved_fpr=cal_obj["achieved_fpr"],
            achieved_tpr=cal_obj["achieved_tpr"],
            target_fpr=cal_obj["target_fpr"],
            calibration_size=cal_obj["calibration_size"],
        )
    else:
        threshold = _threshold_from_args(args)

    report = build_audit_report(scorer, store, declared, threshold, calibration)
    obj = report.to_json_obj()
    obj["corpus_size_before_filters"] = corpus_in
    if args.out:
        _write_json(args.out, obj)
    if args.journal:
        with open(args.journal, "w", encoding="utf-8") as fh:
            write_flag_events(report.flags, fh)
    _emit(
        args,
        obj,
        f"audited {report.corpus_size} ads (of {corpus_in} ingested): "
        f"{report.flagged_count} flagged, {len(report.matched_declared)} matched "
        f"declared ads, {report.compliance['compliant']} with legal disclaimers "
        f"from {report.compliance['compliant_advertisers']} advertisers",
    )
    return EXIT_OK


def _read_label_lines(path: str) -> list[str]:
    with open(_data_path(path), "r", encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def cmd_kappa(args) -> int:
    labels_a = _read_label_lines(args.labels_a)
    labels_b = _read_label_lines(args.labels_b)
    report = cohen_kappa(labels_a, labels_b)
    _emit(
        args,
        report.to_json_obj(),
        f"kappa {report.kappa:.4f} ({report.landis_koch_band}), "
        f"agreement {report.agreement_pct:.1f}%",
    )
    return EXIT_OK


def _read_id_file(path: str) -> frozenset[str]:
    with open(_data_path(path), "r", encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


def cmd_coverage(args) -> int:
    from datetime import datetime, timezone

    snapshots = [
        CrawlSnapshot(taken_at=datetime.fromtimestamp(i, tz=timezone.utc), ids=_read_id_file(p))
        for i, p in enumerate(args.snapshots)
    ]
    obj = coverage_stats(snapshots)
    if args.base and args.probes:
        obj["probe_estimate"] = probe_estimate(
            _read_id_file(args.base), [_read_id_file(p) for p in args.probes]
        )
    growth_pct = ", ".join(f"{g * 100:.2f}%" for g in obj["growth"])
    _emit(
        args,
        obj,
        f"coverage growth per crawl: [{growth_pct}], mean {obj['mean_growth'] * 100:.2f}%",
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_session

    scorer = _load_scorer(args.model, args.embeddings) if args.model else None
    threshold = None
    if args.calibration:
        with open(_data_path(args.calibration), "r", encoding="utf-8") as fh:
            threshold = json.load(fh)["threshold"]
    elif args.threshold is not None:
        threshold = args.threshold
    state = load_session(
        collector_path=_data_path(args.collector) if args.collector else None,
        declared_path=_data_path(args.declared) if args.declared else None,
        scorer=scorer,
        threshold=threshold,
        flags_journal_path=args.flags_journal,
        labels_journal_path=args.labels_journal,
        metrics_path=_data_path(args.metrics) if args.metrics else None,
        roc_path=_data_path(args.roc) if args.roc else None,
    )
    app = create_app(state)
    if args.frontend:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=args.frontend, html=True), name="ui")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# --- argument wiring --------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="adaudit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_json(p):
        p.add_argument("--json", action="store_true", help="emit machine-readable JSON")

    p = sub.add_parser("ingest", help="validate and normalize an ad JSONL dump")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    add_json(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("gen-synthetic", help="write a seeded synthetic fixture")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--labeled", type=int, default=2000)
    p.add_argument("--corpus", type=int, default=40000)
    p.add_argument("--political-rate", type=float, default=0.02)
    p.add_argument("--embed-dim", type=int, default=50)
    add_json(p)
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("dedup", help="drop caption duplicates, keeping the earliest ad")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    add_json(p)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("filter", help="language and election-period filters")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--lang")
    p.add_argument("--from", dest="from_date")
    p.add_argument("--to", dest="to_date")
    add_json(p)
    p.set_defaults(func=cmd_filter)

    def add_train_opts(p, need_model_kind=True):
        if need_model_kind:
            p.add_argument("--model", choices=("mnb", "logreg", "cnn"), required=True)
        p.add_argument("--ads", required=True)
        p.add_argument("--truth", required=True)
        p.add_argument("--embeddings")
        p.add_argument("--dims", type=int, default=DEFAULT_DIMS)
        p.add_argument("--alpha", type=float, default=1.0)
        p.add_argument("--epochs", type=int, default=10)
        p.add_argument("--batch-size", type=int, default=32)
        p.add_argument("--lr", type=float, default=1e-3)
        p.add_argument("--l2", type=float, default=0.0)
        p.add_argument("--grid", action="store_true", help="grid-search lr and l2 (logreg)")
        p.add_argument("--widths", default="3,4,5")
        p.add_argument("--filters", type=int, default=120)
        p.add_argument("--hidden", type=int, default=128)
        p.add_argument("--dropout", type=float, default=0.25)

    p = sub.add_parser("train", help="train a classifier and save the model container")
    add_train_opts(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    add_json(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="k-fold cross-validation report")
    add_train_opts(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--out")
    add_json(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", help="pick a threshold for a target FPR")
    p.add_argument("--model", help="trained model container (score held-out ads)")
    p.add_argument("--model-kind", choices=("mnb", "logreg", "cnn"),
                   help="calibrate on pooled out-of-fold scores instead")
    p.add_argument("--ads", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--target-fpr", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--dims", type=int, default=DEFAULT_DIMS)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--grid", action="store_true")
    p.add_argument("--widths", default="3,4,5")
    p.add_argument("--filters", type=int, default=120)
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--dropout", type=float, default=0.25)
    p.add_argument("--out")
    add_json(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("score", help="flag ads at or above a threshold")
    p.add_argument("--model", required=True)
    p.add_argument("--ads", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--threshold", type=float)
    p.add_argument("--calibration")
    p.add_argument("--out")
    add_json(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("audit", help="full audit: filter, dedup, score, match, compliance")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--declared")
    p.add_argument("--embeddings")
    p.add_argument("--threshold", type=float)
    p.add_argument("--calibration")
    p.add_argument("--lang")
    p.add_argument("--from", dest="from_date")
    p.add_argument("--to", dest="to_date")
    p.add_argument("--no-dedup", action="store_true")
    p.add_argument("--out")
    p.add_argument("--journal")
    add_json(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("kappa", help="inter-annotator agreement from label files")
    p.add_argument("--labels-a", required=True)
    p.add_argument("--labels-b", required=True)
    add_json(p)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("coverage", help="crawl-coverage growth and probe estimate")
    p.add_argument("--snapshots", nargs="+", required=True)
    p.add_argument("--base")
    p.add_argument("--probes", nargs="*")
    add_json(p)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--collector")
    p.add_argument("--declared")
    p.add_argument("--model")
    p.add_argument("--embeddings")
    p.add_argument("--calibration")
    p.add_argument("--threshold", type=float)
    p.add_argument("--flags-journal")
    p.add_argument("--labels-journal")
    p.add_argument("--metrics")
    p.add_argument("--roc")
    p.add_argument("--frontend", help="directory of built review-UI assets to serve at /ui")
    p.set_defaults(func=cmd_serve, json=False)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (OSError, ValueError, KeyError) as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
