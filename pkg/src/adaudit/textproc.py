"""Tokenization and feature extraction shared by every classifier.

Two feature families: hashed bag-of-words counts (for Naive Bayes) and
word-embedding features (mean vector for logistic regression, token matrix
for the CNN).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

# FNV-1a 64-bit constants. The offset basis doubles as the published hash
# seed: changing it changes every hashed feature space.
FNV64_SEED = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

#: Default hashed feature-space size.
DEFAULT_DIMS = 2**18

URL_TOKEN = "<url>"

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_TOKEN_RE = re.compile(r"<url>|#\w+|\w+")


@dataclass(frozen=True)
class TokenSeq:
    """Ordered lowercase tokens extracted from one ad text."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if any(not t for t in self.tokens):
            raise ValueError("empty token")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def tokenize(text: str) -> TokenSeq:
    """Segment ``text`` into lowercase word tokens.

    URLs collapse to the single token ``<url>``, hashtags keep their ``#``,
    punctuation is dropped. Deterministic; returns an empty sequence for
    empty or punctuation-only input.
    """
    lowered = _URL_RE.sub(f" {URL_TOKEN} ", text).lower()
    return TokenSeq(tuple(_TOKEN_RE.findall(lowered)))


def fnv1a64(data: bytes) -> int:
    h = FNV64_SEED
    for byte in data:
        h = ((h ^ byte) * FNV64_PRIME) & _MASK64
    return h


def hash_token(token: str, dims: int) -> int:
    return fnv1a64(token.encode("utf-8")) % dims


@dataclass(frozen=True)
class SparseVector:
    """Hashed bag-of-words counts over a fixed feature space of ``dims``."""

    dims: int
    entries: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dims < 1:
            raise ValueError("dims must be >= 1")
        for idx, count in self.entries.items():
            if not 0 <= idx < self.dims:
                raise ValueError(f"index {idx} outside [0, {self.dims})")
            if count <= 0:
                raise ValueError("counts must be positive")

    def total(self) -> int:
        return sum(self.entries.values())


def hash_vectorize(tokens: TokenSeq | Iterable[str], dims: int = DEFAULT_DIMS) -> SparseVector:
    """Hash each token into ``dims`` buckets and accumulate unsigned counts.

    No sign trick: Naive Bayes needs nonnegative features. FNV-1a keeps the
    mapping identical across runs and platforms.
    """
    if dims < 1:
        raise ValueError("dims must be >= 1")
    entries: dict[int, int] = {}
    for token in tokens:
        idx = hash_token(token, dims)
        entries[idx] = entries.get(idx, 0) + 1
    return SparseVector(dims=dims, entries=entries)


class EmbeddingFormatError(ValueError):
    """Raised when an embedding stream cannot be interpreted."""


@dataclass
class EmbeddingTable:
    """Token -> dense vector lookup with a uniform dimension."""

    dim: int
    vocab: dict[str, np.ndarray]
    skipped: int = 0

    def get(self, token: str) -> np.ndarray | None:
        return self.vocab.get(token)

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def __len__(self) -> int:
        return len(self.vocab)


def load_embeddings(stream: IO[str]) -> EmbeddingTable:
    """Parse word2vec text format: optional ``vocab dim`` header, then one
    ``token v1 .. v_dim`` line per word.

    With a header, lines of the wrong arity are skipped and counted. Without
    one, the first line fixes the dimension and any later mismatch is fatal.
    """
    first = stream.readline()
    if not first.strip():
        raise EmbeddingFormatError("empty embedding stream")

    dim: int | None = None
    has_header = False
    parts = first.split()
    if len(parts) == 2:
        try:
            int(parts[0])
            dim = int(parts[1])
            has_header = True
        except ValueError:
            pass

    vocab: dict[str, np.ndarray] = {}
    skipped = 0

    def consume(line: str) -> None:
        nonlocal dim, skipped
        fields = line.split()
        if not fields:
            return
        token, values = fields[0], fields[1:]
        if dim is None:
            dim = len(values)
        if len(values) != dim:
            if has_header:
                skipped += 1
                return
            raise EmbeddingFormatError(
                f"line for {token!r} has {len(values)} values, expected {dim}"
            )
        vocab[token] = np.array([float(v) for v in values], dtype=np.float64)

    if not has_header:
        consume(first)
    for line in stream:
        consume(line)

    if dim is None or dim < 1:
        raise EmbeddingFormatError("could not determine embedding dimension")
    return EmbeddingTable(dim=dim, vocab=vocab, skipped=skipped)


def save_embeddings(table: EmbeddingTable, stream: IO[str]) -> None:
    """Write word2vec text format with a header, 6 decimals per value."""
    stream.write(f"{len(table.vocab)} {table.dim}\n")
    for token, vec in table.vocab.items():
        stream.write(token + " " + " ".join(f"{v:.6f}" for v in vec) + "\n")


def embed_sequence(tokens: TokenSeq | Iterable[str], table: EmbeddingTable) -> np.ndarray:
    """Stack one embedding row per in-vocabulary token, source order.

    Out-of-vocabulary tokens are dropped, so the result may have zero rows.
    """
    rows = [table.vocab[t] for t in tokens if t in table.vocab]
    if not rows:
        return np.zeros((0, table.dim), dtype=np.float64)
    return np.stack(rows)


def mean_embedding(tokens: TokenSeq | Iterable[str], table: EmbeddingTable) -> np.ndarray:
    """Arithmetic mean of in-vocabulary rows; zero vector when none match."""
    matrix = embed_sequence(tokens, table)
    if matrix.shape[0] == 0:
        return np.zeros(table.dim, dtype=np.float64)
    return matrix.mean(axis=0)
