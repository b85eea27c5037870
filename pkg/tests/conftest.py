import numpy as np
import pytest

from adaudit.corpus import AdRecord, AdStore, parse_timestamp
from adaudit.textproc import EmbeddingTable


def make_ad(
    ad_id,
    text,
    first_seen="2018-09-01T12:00:00Z",
    last_seen=None,
    source="collector",
    declared=None,
    language="pt",
    advertiser_id="a0001",
    advertiser_name="Anunciante 1",
    disclaimer=None,
    media_refs=("m1",),
):
    if declared is None:
        declared = source == "ad_library"
    return AdRecord(
        id=ad_id,
        advertiser_id=advertiser_id,
        advertiser_name=advertiser_name,
        text=text,
        disclaimer=disclaimer,
        landing_url=None,
        first_seen=parse_timestamp(first_seen),
        last_seen=parse_timestamp(last_seen or first_seen),
        language=language,
        source=source,
        declared_political=declared,
        media_refs=tuple(media_refs),
    )


def make_store(*records):
    return AdStore.from_records(records)


@pytest.fixture
def tiny_table():
    vocab = {
        "voto": np.array([1.0, 0.0, 0.0]),
        "urna": np.array([0.0, 1.0, 0.0]),
        "loja": np.array([0.0, 0.0, 1.0]),
        "festa": np.array([0.5, 0.5, 0.0]),
    }
    return EmbeddingTable(dim=3, vocab=vocab)
