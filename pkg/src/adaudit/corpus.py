"""Ad data model, JSONL persistence, and corpus-preparation filters.

A corpus is an :class:`AdStore`: an insertion-ordered, id-keyed collection of
immutable :class:`AdRecord` rows. Filters are pure functions returning new
stores, so they compose and commute.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timezone
from typing import IO, Iterable, Iterator

from .lang import classify_language
from .normalize import normalize_text

SOURCE_COLLECTOR = "collector"
SOURCE_AD_LIBRARY = "ad_library"
SOURCES = (SOURCE_COLLECTOR, SOURCE_AD_LIBRARY)


class CorpusError(ValueError):
    """Raised for unusable corpus input (not per-line skips)."""


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp; naive values are taken as UTC."""
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class AdRecord:
    """One ad: caption text plus advertiser, disclaimer, and provenance."""

    id: str
    advertiser_id: str
    advertiser_name: str
    text: str
    first_seen: datetime
    last_seen: datetime
    source: str
    declared_political: bool
    disclaimer: str | None = None
    landing_url: str | None = None
    language: str | None = None
    media_refs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("ad id must be non-empty")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.first_seen > self.last_seen:
            raise ValueError(f"ad {self.id}: first_seen after last_seen")
        if self.source == SOURCE_AD_LIBRARY and not self.declared_political:
            raise ValueError(f"ad {self.id}: ad_library ads are declared political")

    def to_json_obj(self) -> dict:
        return {
            "id": self.id,
            "advertiser_id": self.advertiser_id,
            "advertiser_name": self.advertiser_name,
            "text": self.text,
            "disclaimer": self.disclaimer,
            "landing_url": self.landing_url,
            "first_seen": format_timestamp(self.first_seen),
            "last_seen": format_timestamp(self.last_seen),
            "language": self.language,
            "source": self.source,
            "declared_political": self.declared_political,
            "media_refs": list(self.media_refs),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AdRecord":
        if not isinstance(obj, dict):
            raise ValueError("ad row must be a JSON object")
        source = obj.get("source", SOURCE_COLLECTOR)
        return cls(
            id=str(obj["id"]) if obj.get("id") is not None else "",
            advertiser_id=str(obj.get("advertiser_id", "")),
            advertiser_name=str(obj.get("advertiser_name", "")),
            text=str(obj["text"]),
            disclaimer=obj.get("disclaimer"),
            landing_url=obj.get("landing_url"),
            first_seen=parse_timestamp(obj["first_seen"]),
            last_seen=parse_timestamp(obj["last_seen"]),
            language=obj.get("language"),
            source=source,
            declared_political=bool(
                obj.get("declared_political", source == SOURCE_AD_LIBRARY)
            ),
            media_refs=tuple(obj.get("media_refs") or ()),
        )


@dataclass(frozen=True)
class Provenance:
    file: str
    rows: int
    skipped: int
    ingested_at: datetime


@dataclass
class AdStore:
    """Insertion-ordered ad collection keyed by unique id.

    Treated as immutable after construction; filters return new stores.
    """

    records: dict[str, AdRecord] = field(default_factory=dict)
    provenance: Provenance | None = None

    @classmethod
    def from_records(
        cls, records: Iterable[AdRecord], provenance: Provenance | None = None
    ) -> "AdStore":
        out: dict[str, AdRecord] = {}
        for rec in records:
            if rec.id in out:
                raise CorpusError(f"duplicate ad id {rec.id!r}")
            out[rec.id] = rec
        return cls(records=out, provenance=provenance)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[AdRecord]:
        return iter(self.records.values())

    def __contains__(self, ad_id: str) -> bool:
        return ad_id in self.records

    def get(self, ad_id: str) -> AdRecord | None:
        return self.records.get(ad_id)

    def ids(self) -> list[str]:
        return list(self.records)


def ingest(stream: IO, source_name: str = "<stream>") -> AdStore:
    """Read newline-delimited JSON ads into a store.

    Malformed lines are skipped and counted in the provenance; duplicate ids
    collapse to the latest occurrence (keeping the first position). Unknown
    fields are ignored for forward compatibility.
    """
    records: dict[str, AdRecord] = {}
    rows = 0
    skipped = 0
    for raw in stream:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8", errors="replace")
        line = raw.strip()
        if not line:
            continue
        rows += 1
        try:
            rec = AdRecord.from_json_obj(json.loads(line))
        except (ValueError, KeyError, TypeError):
            skipped += 1
            continue
        records[rec.id] = rec
    prov = Provenance(
        file=source_name,
        rows=rows,
        skipped=skipped,
        ingested_at=datetime.now(timezone.utc),
    )
    return AdStore(records=records, provenance=prov)


def ingest_path(path: str) -> AdStore:
    with open(path, "r", encoding="utf-8") as fh:
        return ingest(fh, source_name=path)


def serialize(store: AdStore, stream: IO[str]) -> None:
    """Write one ad per line, mirroring the ingest format."""
    for rec in store:
        stream.write(json.dumps(rec.to_json_obj(), ensure_ascii=False) + "\n")


def serialize_path(store: AdStore, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        serialize(store, fh)


@dataclass(frozen=True)
class PeriodFilter:
    """Inclusive UTC date window, day granularity."""

    start: date
    end: date

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("period start after end")

    def contains(self, dt: datetime) -> bool:
        return self.start <= dt.astimezone(timezone.utc).date() <= self.end


def dedup_by_caption(store: AdStore) -> AdStore:
    """Keep one ad per identical normalized caption.

    Advertisers reuse one caption across many image variants; the survivor is
    the earliest ``first_seen`` (ties: smallest id), so the pass is
    deterministic and idempotent.
    """
    survivors: dict[str, AdRecord] = {}
    for rec in store:
        key = normalize_text(rec.text)
        cur = survivors.get(key)
        if cur is None or (rec.first_seen, rec.id) < (cur.first_seen, cur.id):
            survivors[key] = rec
    keep = {rec.id for rec in survivors.values()}
    return AdStore(
        records={rec.id: rec for rec in store if rec.id in keep},
        provenance=store.provenance,
    )


def _tag_matches(tag: str, lang: str) -> bool:
    tag = tag.lower()
    lang = lang.lower()
    return tag == lang or tag.startswith(lang + "-")


def filter_language(store: AdStore, lang: str) -> AdStore:
    """Keep ads tagged ``lang`` (tag-prefix match, so pt-BR matches pt);
    untagged ads go through the stopword heuristic."""
    primary = lang.lower().split("-")[0]
    kept: dict[str, AdRecord] = {}
    for rec in store:
        if rec.language is not None:
            if _tag_matches(rec.language, lang):
                kept[rec.id] = rec
        elif classify_language(rec.text) == primary:
            kept[rec.id] = rec
    return AdStore(records=kept, provenance=store.provenance)


def filter_period(store: AdStore, period: PeriodFilter) -> AdStore:
    """Keep ads whose first_seen date falls inside the window."""
    kept = {rec.id: rec for rec in store if period.contains(rec.first_seen)}
    return AdStore(records=kept, provenance=store.provenance)


def drop_ids(store: AdStore, ids: Iterable[str]) -> AdStore:
    """Remove the given ids (e.g. ads already used for training)."""
    drop = set(ids)
    kept = {rec.id: rec for rec in store if rec.id not in drop}
    return AdStore(records=kept, provenance=store.provenance)


def with_language(rec: AdRecord, language: str | None) -> AdRecord:
    return replace(rec, language=language)
