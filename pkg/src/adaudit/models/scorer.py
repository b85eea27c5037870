"""Uniform text -> probability interface over the three model kinds.

Both the CLI and the HTTP service score through this class, which keeps the
two paths bit-identical for the same model file.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..textproc import EmbeddingTable, embed_sequence, hash_vectorize, mean_embedding, tokenize
from .cnn import CnnModel, cnn_forward
from .logreg import LogRegModel, predict_proba_logreg
from .mnb import MnbModel, predict_proba_mnb


@dataclass
class TextScorer:
    model: object
    table: EmbeddingTable | None = None
    model_id: str = ""

    def __post_init__(self) -> None:
        if isinstance(self.model, MnbModel):
            self.kind = "mnb"
        elif isinstance(self.model, LogRegModel):
            self.kind = "logreg"
        elif isinstance(self.model, CnnModel):
            self.kind = "cnn"
        else:
            raise TypeError(f"unsupported model type {type(self.model).__name__}")
        if self.kind in ("logreg", "cnn") and self.table is None:
            raise ValueError(f"{self.kind} scoring needs an embedding table")
        if not self.model_id:
            self.model_id = self.kind

    def predict_text(self, text: str) -> float:
        tokens = tokenize(text)
        if self.kind == "mnb":
            return predict_proba_mnb(self.model, hash_vectorize(tokens, self.model.dims))
        if self.kind == "logreg":
            return predict_proba_logreg(self.model, mean_embedding(tokens, self.table))
        prob, _ = cnn_forward(self.model, embed_sequence(tokens, self.table), mode="eval")
        return prob
