"""Production audit pipeline: calibrate a decision threshold to a target
false-positive rate, flag a prepared corpus, match flagged ads against the
declared-ad archive, and check disclaimer compliance."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace
from datetime import datetime
from typing import IO, Iterable, Sequence

import numpy as np

from .corpus import AdRecord, AdStore
from .models import TextScorer, as_label_array
from .normalize import normalize_text, strip_accents

__all__ = [
    "AuditReport",
    "CalibratedThreshold",
    "ComplianceInfo",
    "CrawlSnapshot",
    "Flag",
    "THRESHOLD_SENTINEL",
    "VERDICTS",
    "calibrate_threshold",
    "coverage_stats",
    "detect_disclaimer",
    "match_declared",
    "normalize_text",
    "probe_estimate",
    "read_flags_journal",
    "score_corpus",
    "write_flag_events",
]

# Smallest float above 1.0: no probability reaches it, so it encodes
# "flag nothing" while staying JSON-serializable.
THRESHOLD_SENTINEL = math.nextafter(1.0, 2.0)

VERDICT_UNREVIEWED = "unreviewed"
VERDICTS = ("unreviewed", "political", "non_political", "unsure")


@dataclass(frozen=True)
class CalibratedThreshold:
    threshold: float
    achieved_fpr: float
    achieved_tpr: float
    target_fpr: float
    calibration_size: int

    def to_json_obj(self) -> dict:
        return {
            "threshold": self.threshold,
            "achieved_fpr": self.achieved_fpr,
            "achieved_tpr": self.achieved_tpr,
            "target_fpr": self.target_fpr,
            "calibration_size": self.calibration_size,
        }


def calibrate_threshold(
    scores: Sequence[float], labels: Iterable, target_fpr: float
) -> CalibratedThreshold:
    """Smallest candidate threshold whose false-positive rate on the labeled
    negatives stays within ``target_fpr``.

    Candidates are the observed negative scores plus a just-above-1 sentinel;
    the FPR of the >=-threshold rule only changes at negative scores, and the
    sentinel guarantees feasibility (possibly with zero TPR).
    """
    if not 0.0 < target_fpr < 1.0:
        raise ValueError("target_fpr must be in (0, 1)")
    s = np.asarray(scores, dtype=np.float64)
    y = as_label_array(labels)
    if len(s) != len(y):
        raise ValueError("scores and labels length mismatch")
    if len(y) == 0 or y.min() == y.max():
        raise ValueError("calibration needs both classes")

    neg = s[y == 0]
    pos = s[y == 1]
    for threshold in candidate_thresholds(s, y):
        fpr = float(np.mean(neg >= threshold))
        if fpr <= target_fpr:
            return CalibratedThreshold(
                threshold=threshold,
                achieved_fpr=fpr,
                achieved_tpr=float(np.mean(pos >= threshold)),
                target_fpr=target_fpr,
                calibration_size=len(y),
            )
    raise AssertionError("sentinel threshold is always feasible")


def candidate_thresholds(scores: np.ndarray, y: np.ndarray) -> list[float]:
    """Ascending candidate thresholds for calibration.

    The FPR of the >=-threshold rule only steps at negative scores, so the
    candidates are the distinct negative scores, then the smallest observed
    score strictly above every negative (the first zero-FPR operating point
    that still flags something), then the sentinel.
    """
    neg = scores[y == 0]
    candidates = sorted({float(v) for v in neg})
    above = scores[scores > neg.max()]
    if above.size:
        candidates.append(float(above.min()))
    candidates.append(THRESHOLD_SENTINEL)
    return candidates


@dataclass(frozen=True)
class Flag:
    """One classifier hit on the audited corpus, with its triage verdict."""

    ad_id: str
    score: float
    model_id: str
    verdict: str = VERDICT_UNREVIEWED
    reviewer: str | None = None
    reviewed_at: str | None = None

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict != VERDICT_UNREVIEWED and (
            self.reviewer is None or self.reviewed_at is None
        ):
            raise ValueError("reviewed flags need reviewer and reviewed_at")

    def with_verdict(self, verdict: str, reviewer: str, reviewed_at: str) -> "Flag":
        return replace(self, verdict=verdict, reviewer=reviewer, reviewed_at=reviewed_at)

    def to_json_obj(self) -> dict:
        return {
            "ad_id": self.ad_id,
            "score": self.score,
            "model_id": self.model_id,
            "verdict": self.verdict,
            "reviewer": self.reviewer,
            "reviewed_at": self.reviewed_at,
        }


def score_corpus(scorer: TextScorer, store: AdStore, threshold: float) -> list[Flag]:
    """Flag every ad whose political probability reaches ``threshold``,
    sorted by descending score (ties: ascending id).

    The caller is responsible for having dedup/language/period-filtered the
    store already.
    """
    flags = [
        Flag(ad_id=rec.id, score=scorer.predict_text(rec.text), model_id=scorer.model_id)
        for rec in store
    ]
    flags = [f for f in flags if f.score >= threshold]
    flags.sort(key=lambda f: (-f.score, f.ad_id))
    return flags


def match_declared(
    flags: Sequence[Flag], flagged_store: AdStore, declared: AdStore
) -> list[tuple[str, str]]:
    """Pair flagged ads with declared ads whose normalized text is identical.

    Each flagged ad matches at most one declared ad: the candidate with the
    earliest first_seen (ties: smallest id).
    """
    by_text: dict[str, AdRecord] = {}
    for rec in declared:
        key = normalize_text(rec.text)
        cur = by_text.get(key)
        if cur is None or (rec.first_seen, rec.id) < (cur.first_seen, cur.id):
            by_text[key] = rec
    pairs: list[tuple[str, str]] = []
    for flag in flags:
        rec = flagged_store.get(flag.ad_id)
        if rec is None:
            continue
        hit = by_text.get(normalize_text(rec.text))
        if hit is not None:
            pairs.append((flag.ad_id, hit.id))
    return pairs


# Keyword matching is accent-insensitive; "electoral" is accepted as a
# variant spelling of "eleitoral".
_KEYWORD_RE = re.compile(r"propaganda\s+(?:eleitoral|electoral|politica)")
_CPF_RE = re.compile(r"(?<!\d)(\d{3})\.?(\d{3})\.?(\d{3})-?(\d{2})(?!\d)")
# Root 2.3.3 digits, branch of 3 or 4 digits, 2 check digits. The relaxed
# 3-digit branch admits printed ids like 31.208.669/001-05.
_CNPJ_RE = re.compile(r"(?<!\d)(\d{2})\.?(\d{3})\.?(\d{3})/(\d{3,4})-?(\d{2})(?!\d)")


@dataclass(frozen=True)
class ComplianceInfo:
    """Brazilian election-law disclosure check for one ad."""

    has_electoral_keyword: bool
    cpf: str | None
    cnpj: str | None
    cnpj_branch: str | None
    compliant: bool

    def to_json_obj(self) -> dict:
        return {
            "has_electoral_keyword": self.has_electoral_keyword,
            "cpf": self.cpf,
            "cnpj": self.cnpj,
            "cnpj_branch": self.cnpj_branch,
            "compliant": self.compliant,
        }


def detect_disclaimer(ad: AdRecord, strict_cnpj: bool = False) -> ComplianceInfo:
    """Look for the electoral-advertising keyword and a CPF or CNPJ tax id
    in the ad text plus disclaimer."""
    haystack = ad.text if ad.disclaimer is None else f"{ad.text}\n{ad.disclaimer}"
    folded = strip_accents(haystack).lower()
    has_keyword = _KEYWORD_RE.search(folded) is not None

    cpf = None
    m = _CPF_RE.search(folded)
    if m:
        cpf = "".join(m.groups())

    cnpj = None
    branch = None
    for m in _CNPJ_RE.finditer(folded):
        if strict_cnpj and len(m.group(4)) != 4:
            continue
        cnpj = m.group(1) + m.group(2) + m.group(3)
        branch = m.group(4)
        break

    return ComplianceInfo(
        has_electoral_keyword=has_keyword,
        cpf=cpf,
        cnpj=cnpj,
        cnpj_branch=branch,
        compliant=has_keyword and (cpf is not None or cnpj is not None),
    )


@dataclass(frozen=True)
class CrawlSnapshot:
    taken_at: datetime
    ids: frozenset[str]


def coverage_stats(snapshots: Sequence[CrawlSnapshot]) -> dict:
    """Growth of the cumulative declared-ad union across repeated crawls."""
    if len(snapshots) < 2:
        raise ValueError("need at least 2 snapshots")
    if not snapshots[0].ids:
        raise ValueError("first snapshot is empty")
    union: set[str] = set()
    sizes: list[int] = []
    for snap in snapshots:
        union |= snap.ids
        sizes.append(len(union))
    growth = [sizes[i] / sizes[i - 1] - 1.0 for i in range(1, len(sizes))]
    return {
        "cumulative_sizes": sizes,
        "growth": growth,
        "mean_growth": sum(growth) / len(growth),
    }


def probe_estimate(base: Iterable[str], probes: Sequence[Iterable[str]]) -> dict:
    """Estimate the fraction of ads missed by the base crawl from random
    keyword probes: total new-id fraction and the per-probe average."""
    base_set = set(base)
    if not base_set:
        raise ValueError("base set is empty")
    if not probes:
        raise ValueError("need at least one probe set")
    new_ids: set[str] = set()
    for probe in probes:
        new_ids |= set(probe) - base_set
    total = len(new_ids) / len(base_set)
    return {
        "new_ids": len(new_ids),
        "total_fraction": total,
        "per_probe_average": total / len(probes),
        "probes": len(probes),
    }


@dataclass(frozen=True)
class AuditReport:
    corpus_size: int
    flagged_count: int
    flags: tuple[Flag, ...]
    matched_declared: tuple[tuple[str, str], ...]
    compliance: dict[str, int]
    advertisers: tuple[dict, ...]
    threshold: CalibratedThreshold | None

    def to_json_obj(self) -> dict:
        return {
            "corpus_size": self.corpus_size,
            "flagged_count": self.flagged_count,
            "threshold": None if self.threshold is None else self.threshold.to_json_obj(),
            "flags": [f.to_json_obj() for f in self.flags],
            "matched_declared": [list(pair) for pair in self.matched_declared],
            "compliance": dict(self.compliance),
            "advertisers": [dict(a) for a in self.advertisers],
        }


def build_audit_report(
    scorer: TextScorer,
    store: AdStore,
    declared: AdStore | None,
    threshold: float,
    calibration: CalibratedThreshold | None = None,
) -> AuditReport:
    """Score a prepared corpus and assemble flags, declared-ad matches,
    compliance counts, and per-advertiser rollups."""
    flags = score_corpus(scorer, store, threshold)
    matches = (
        tuple(match_declared(flags, store, declared)) if declared is not None else ()
    )

    compliant = 0
    keyword_only = 0
    compliant_advertisers: set[str] = set()
    rollup: dict[str, dict] = {}
    for flag in flags:
        rec = store.get(flag.ad_id)
        info = detect_disclaimer(rec)
        if info.compliant:
            compliant += 1
            compliant_advertisers.add(rec.advertiser_id)
        elif info.has_electoral_keyword:
            keyword_only += 1
        entry = rollup.setdefault(
            rec.advertiser_id,
            {"advertiser_id": rec.advertiser_id, "advertiser_name": rec.advertiser_name, "flagged": 0},
        )
        entry["flagged"] += 1

    advertisers = tuple(
        sorted(rollup.values(), key=lambda e: (-e["flagged"], e["advertiser_id"]))
    )
    return AuditReport(
        corpus_size=len(store),
        flagged_count=len(flags),
        flags=tuple(flags),
        matched_declared=matches,
        compliance={
            "compliant": compliant,
            "keyword_without_tax_id": keyword_only,
            "compliant_advertisers": len(compliant_advertisers),
        },
        advertisers=advertisers,
        threshold=calibration,
    )


def write_flag_events(flags: Iterable[Flag], stream: IO[str]) -> None:
    """Append flag-created events to the journal (one JSON object per line)."""
    for flag in flags:
        event = {"event": "flag_created", **flag.to_json_obj()}
        stream.write(json.dumps(event, ensure_ascii=False) + "\n")


def read_flags_journal(stream: IO[str]) -> dict[str, Flag]:
    """Replay a journal into the latest flag state, keyed by ad id."""
    flags: dict[str, Flag] = {}
    for line in stream:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        if obj.get("event") == "flag_created":
            flags[obj["ad_id"]] = Flag(
                ad_id=obj["ad_id"],
                score=obj["score"],
                model_id=obj.get("model_id", ""),
                verdict=obj.get("verdict", VERDICT_UNREVIEWED),
                reviewer=obj.get("reviewer"),
                reviewed_at=obj.get("reviewed_at"),
            )
        elif obj.get("event") == "verdict_set":
            cur = flags.get(obj["ad_id"])
            if cur is not None:
                flags[obj["ad_id"]] = cur.with_verdict(
                    obj["verdict"], obj["reviewer"], obj["reviewed_at"]
                )
    return flags
