"""Canonical text normalization used by dedup and declared-ad matching."""

from __future__ import annotations

import re
import unicodedata

_WS_RE = re.compile(r"\s+")


def normalize_text(s: str) -> str:
    """Unicode NFKC, lowercase, whitespace runs collapsed, ends trimmed.

    Idempotent, so normalized text can be compared or re-normalized freely.
    """
    s = unicodedata.normalize("NFKC", s).lower()
    return _WS_RE.sub(" ", s).strip()


def strip_accents(s: str) -> str:
    """Drop combining marks (NFKD) for accent-insensitive keyword search."""
    decomposed = unicodedata.normalize("NFKD", s)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))
