"""Emoji-driven automatic labeling of documents."""
from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .lexicon import CATEGORIES, EmotionCategory, Lexicon, extract_emojis, strip_emojis

__all__ = [
    "Provenance",
    "Document",
    "score_emotions",
    "auto_label",
    "build_auto_corpus",
]

EmotionScoreTable = Mapping[EmotionCategory, int]


class Provenance(str, enum.Enum):
    MANUAL = "manual"
    AUTO = "auto"
    UNLABELED = "unlabeled"

    @classmethod
    def parse(cls, value: str) -> "Provenance":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown provenance {value!r}; expected manual, auto or unlabeled"
            ) from None


@dataclass(frozen=True)
class Document:
    id: str
    raw_text: str
    gold_label: EmotionCategory | None = None
    auto_label: EmotionCategory | None = None
    provenance: Provenance = Provenance.UNLABELED

    def __post_init__(self):
        if self.provenance is Provenance.MANUAL and self.gold_label is None:
            raise ValueError(f"document {self.id!r}: manual provenance requires a gold label")
        if self.provenance is Provenance.AUTO and self.auto_label is None:
            raise ValueError(f"document {self.id!r}: auto provenance requires an auto label")

    @property
    def label(self) -> EmotionCategory | None:
        """The label matching the document's provenance."""
        if self.provenance is Provenance.MANUAL:
            return self.gold_label
        if self.provenance is Provenance.AUTO:
            return self.auto_label
        return None


def score_emotions(doc: Document | str, lex: Lexicon) -> dict[EmotionCategory, int]:
    """Sum of absolute emoji scores per category."""
    text = doc.raw_text if isinstance(doc, Document) else doc
    totals = {c: 0 for c in CATEGORIES}
    for entry in extract_emojis(text, lex):
        totals[entry.category] += abs(entry.score)
    return totals


def _tie_index(seed: int, doc_id: str, n: int) -> int:
    digest = hashlib.sha256(f"{seed}\x00{doc_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % n


def _label_from_scores(scores: EmotionScoreTable, seed: int, doc_id: str) -> EmotionCategory | None:
    best = max(scores.values())
    if best <= 0:
        return None
    tied = [c for c in CATEGORIES if scores[c] == best]
    if len(tied) == 1:
        return tied[0]
    return tied[_tie_index(seed, doc_id, len(tied))]


def auto_label(doc: Document, lex: Lexicon, seed: int = 0) -> EmotionCategory | None:
    """Category with the largest accumulated score, or ``None`` if no emoji scored.

    Ties are broken by a choice that depends only on ``(seed, doc.id)``.
    """
    return _label_from_scores(score_emotions(doc, lex), seed, doc.id)


def build_auto_corpus(
    docs: Iterable[Document],
    lex: Lexicon,
    seed: int = 0,
    single_emoji_only: bool = False,
    strip: bool = True,
) -> list[Document]:
    """Auto-label ``docs`` and keep the labelable ones, in input order.

    With ``strip`` (the default) matched emojis are removed from the kept
    texts so the label cannot leak into the features. Documents left with
    no text after stripping are dropped.
    """
    out = []
    for doc in docs:
        if doc.provenance is Provenance.MANUAL:
            raise ValueError(f"document {doc.id!r} is manually labeled; refusing to auto-label it")
        occurrences = extract_emojis(doc.raw_text, lex)
        if not occurrences:
            continue
        if single_emoji_only and len(occurrences) != 1:
            continue
        totals = {c: 0 for c in CATEGORIES}
        for entry in occurrences:
            totals[entry.category] += abs(entry.score)
        label = _label_from_scores(totals, seed, doc.id)
        if label is None:
            continue
        text = strip_emojis(doc.raw_text, lex) if strip else doc.raw_text
        if not text.strip():
            continue
        out.append(
            replace(doc, raw_text=text, auto_label=label, gold_label=None, provenance=Provenance.AUTO)
        )
    return out
