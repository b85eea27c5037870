"""HTTP facade over the corpus, models, evaluation, and audit layers.

Read endpoints are side-effect free over immutable snapshots; label and
verdict writes are journaled to disk before the request is acknowledged,
through a single writer lock.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from . import __version__
from .audit import VERDICTS, Flag, read_flags_journal
from .corpus import AdRecord, AdStore, ingest_path, parse_timestamp
from .evaluation import cohen_kappa
from .models import TextScorer
from .normalize import normalize_text

LABELS = ("political", "non_political", "unsure")


@dataclass(frozen=True)
class LabelEvent:
    ad_id: str
    annotator: str
    label: str
    at: str

    def to_json_obj(self) -> dict:
        return {"ad_id": self.ad_id, "annotator": self.annotator, "label": self.label, "at": self.at}


@dataclass
class SessionState:
    """Everything one running service instance serves from."""

    collector: AdStore | None = None
    declared: AdStore | None = None
    scorer: TextScorer | None = None
    threshold: float | None = None
    flags: dict[str, Flag] = field(default_factory=dict)
    flags_journal_path: str | None = None
    labels: dict[tuple[str, str], LabelEvent] = field(default_factory=dict)
    labels_journal_path: str | None = None
    metrics_obj: dict | None = None
    roc_csv: str | None = None
    write_lock: threading.Lock = field(default_factory=threading.Lock)

    def find_ad(self, ad_id: str) -> AdRecord | None:
        for store in (self.collector, self.declared):
            if store is not None:
                rec = store.get(ad_id)
                if rec is not None:
                    return rec
        return None

    def append_journal(self, path: str | None, event: dict) -> None:
        if path is None:
            return
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())


def load_session(
    collector_path: str | None = None,
    declared_path: str | None = None,
    scorer: TextScorer | None = None,
    threshold: float | None = None,
    flags_journal_path: str | None = None,
    labels_journal_path: str | None = None,
    metrics_path: str | None = None,
    roc_path: str | None = None,
) -> SessionState:
    state = SessionState(
        scorer=scorer,
        threshold=threshold,
        flags_journal_path=flags_journal_path,
        labels_journal_path=labels_journal_path,
    )
    if collector_path:
        state.collector = ingest_path(collector_path)
    if declared_path:
        state.declared = ingest_path(declared_path)
    if flags_journal_path and Path(flags_journal_path).exists():
        with open(flags_journal_path, "r", encoding="utf-8") as fh:
            state.flags = read_flags_journal(fh)
    if labels_journal_path and Path(labels_journal_path).exists():
        with open(labels_journal_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                if obj.get("event") == "label_set":
                    ev = LabelEvent(obj["ad_id"], obj["annotator"], obj["label"], obj["at"])
                    state.labels[(ev.ad_id, ev.annotator)] = ev
    if metrics_path:
        with open(metrics_path, "r", encoding="utf-8") as fh:
            state.metrics_obj = json.load(fh)
    if roc_path:
        with open(roc_path, "r", encoding="utf-8") as fh:
            state.roc_csv = fh.read()
    return state


class ScoreRequest(BaseModel):
    text: str


class VerdictRequest(BaseModel):
    verdict: str
    reviewer: str


class LabelRequest(BaseModel):
    ad_id: str
    annotator: str
    label: str


def _now() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


def create_app(state: SessionState) -> FastAPI:
    app = FastAPI(title="adaudit", version=__version__)
    app.state.session = state
    # Deployment-local tool with a separately served review UI; no auth.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/health")
    def health() -> dict:
        return {
            "version": __version__,
            "collector_ads": len(state.collector) if state.collector else 0,
            "declared_ads": len(state.declared) if state.declared else 0,
            "model": state.scorer.model_id if state.scorer else None,
            "threshold": state.threshold,
        }

    @app.get("/ads")
    def list_ads(
        query: str | None = None,
        source: str | None = None,
        from_date: str | None = Query(default=None, alias="from"),
        to_date: str | None = Query(default=None, alias="to"),
        limit: int = 50,
        offset: int = 0,
    ) -> dict:
        stores = [s for s in (state.collector, state.declared) if s is not None]
        if not stores:
            raise HTTPException(status_code=409, detail="no corpus loaded")
        needle = normalize_text(query) if query else None
        lo = parse_timestamp(from_date).date() if from_date else None
        hi = parse_timestamp(to_date).date() if to_date else None
        hits = []
        for store in stores:
            for rec in store:
                if source and rec.source != source:
                    continue
                if needle and needle not in normalize_text(rec.text):
                    continue
                seen = rec.first_seen.date()
                if lo and seen < lo:
                    continue
                if hi and seen > hi:
                    continue
                hits.append(rec)
        page = hits[offset : offset + limit]
        return {
            "total": len(hits),
            "limit": limit,
            "offset": offset,
            "items": [rec.to_json_obj() for rec in page],
        }

    @app.get("/ads/{ad_id}")
    def get_ad(ad_id: str) -> dict:
        rec = state.find_ad(ad_id)
        if rec is None:
            raise HTTPException(status_code=404, detail=f"unknown ad {ad_id!r}")
        return rec.to_json_obj()

    @app.post("/score")
    def score(req: ScoreRequest) -> dict:
        if state.scorer is None:
            raise HTTPException(status_code=409, detail="no model loaded")
        prob = state.scorer.predict_text(req.text)
        flagged = prob >= state.threshold if state.threshold is not None else None
        return {"probability": prob, "flagged": flagged}

    @app.get("/flags")
    def list_flags(verdict: str | None = None, limit: int = 50, offset: int = 0) -> dict:
        flags = sorted(state.flags.values(), key=lambda f: (-f.score, f.ad_id))
        if verdict is not None:
            if verdict not in VERDICTS:
                raise HTTPException(status_code=400, detail=f"unknown verdict {verdict!r}")
            flags = [f for f in flags if f.verdict == verdict]
        page = flags[offset : offset + limit]
        return {
            "total": len(flags),
            "limit": limit,
            "offset": offset,
            "items": [f.to_json_obj() for f in page],
        }

    @app.post("/flags/{ad_id}/verdict")
    def set_verdict(ad_id: str, req: VerdictRequest) -> dict:
        if req.verdict not in ("political", "non_political", "unsure"):
            raise HTTPException(status_code=400, detail=f"invalid verdict {req.verdict!r}")
        if not req.reviewer:
            raise HTTPException(status_code=400, detail="reviewer required")
        with state.write_lock:
            flag = state.flags.get(ad_id)
            if flag is None:
                raise HTTPException(status_code=404, detail=f"no flag for ad {ad_id!r}")
            updated = flag.with_verdict(req.verdict, req.reviewer, _now())
            state.append_journal(
                state.flags_journal_path,
                {
                    "event": "verdict_set",
                    "ad_id": ad_id,
                    "verdict": updated.verdict,
                    "reviewer": updated.reviewer,
                    "reviewed_at": updated.reviewed_at,
                },
            )
            state.flags[ad_id] = updated
        return updated.to_json_obj()

    @app.post("/labels")
    def set_label(req: LabelRequest) -> dict:
        if req.label not in LABELS:
            raise HTTPException(status_code=400, detail=f"invalid label {req.label!r}")
        if not req.annotator:
            raise HTTPException(status_code=400, detail="annotator required")
        if state.collector is not None and state.find_ad(req.ad_id) is None:
            raise HTTPException(status_code=404, detail=f"unknown ad {req.ad_id!r}")
        event = LabelEvent(ad_id=req.ad_id, annotator=req.annotator, label=req.label, at=_now())
        with state.write_lock:
            state.append_journal(
                state.labels_journal_path, {"event": "label_set", **event.to_json_obj()}
            )
            state.labels[(event.ad_id, event.annotator)] = event
        return event.to_json_obj()

    @app.get("/labels")
    def list_labels(annotator: str | None = None, ad_id: str | None = None) -> dict:
        events = [
            ev
            for ev in state.labels.values()
            if (annotator is None or ev.annotator == annotator)
            and (ad_id is None or ev.ad_id == ad_id)
        ]
        events.sort(key=lambda ev: (ev.ad_id, ev.annotator))
        return {"total": len(events), "items": [ev.to_json_obj() for ev in events]}

    @app.get("/agreement")
    def agreement(annotators: str) -> dict:
        names = [a.strip() for a in annotators.split(",") if a.strip()]
        if len(names) != 2:
            raise HTTPException(status_code=400, detail="annotators must name two ids, comma separated")
        a_name, b_name = names
        a_latest = {ev.ad_id: ev.label for ev in state.labels.values() if ev.annotator == a_name}
        b_latest = {ev.ad_id: ev.label for ev in state.labels.values() if ev.annotator == b_name}
        shared = [
            ad_id
            for ad_id in sorted(set(a_latest) & set(b_latest))
            if a_latest[ad_id] != "unsure" and b_latest[ad_id] != "unsure"
        ]
        if not shared:
            raise HTTPException(status_code=400, detail="no shared binary labels")
        report = cohen_kappa(
            [a_latest[i] for i in shared], [b_latest[i] for i in shared]
        )
        body = report.to_json_obj()
        body["items"] = len(shared)
        body["annotators"] = names
        return body

    @app.get("/metrics")
    def metrics() -> dict:
        if state.metrics_obj is None:
            raise HTTPException(status_code=404, detail="no evaluation report loaded")
        return state.metrics_obj

    @app.get("/roc")
    def roc() -> PlainTextResponse:
        if state.roc_csv is None:
            raise HTTPException(status_code=404, detail="no ROC data loaded")
        return PlainTextResponse(state.roc_csv, media_type="text/csv")

    return app
