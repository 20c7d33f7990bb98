"""POS-based candidate span detection: maximal runs of candidate-tagged tokens."""

from __future__ import annotations

from dataclasses import dataclass

from pydantic import BaseModel, Field, field_validator

from .corpus import Sentence

NUMERIC_POS = ("NUM", "ORDINAL")


@dataclass(frozen=True)
class CandidateSpan:
    """A proposed entity span; `surface` is the covered text, space-joined."""

    start: int
    end: int
    surface: str

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid candidate span ({self.start}, {self.end})")

    def overlaps(self, other) -> bool:
        return self.start < other.end and other.start < self.end


class DetectorConfig(BaseModel):
    """Which POS tags make a token an entity candidate.

    Consecutive proper nouns merge into one span; numeral/ordinal tags join the
    candidate set only when `include_numeric` is on, which matters for schemes
    with DATE or ORDINAL labels.
    """

    candidate_pos: list[str] = Field(default=["PROPN"])
    include_numeric: bool = False

    @field_validator("candidate_pos")
    @classmethod
    def _non_empty(cls, value: list[str]) -> list[str]:
        if not value:
            raise ValueError("candidate_pos must not be empty")
        deduped = list(dict.fromkeys(value))
        return deduped

    def effective_pos(self) -> frozenset[str]:
        pos = set(self.candidate_pos)
        if self.include_numeric:
            pos.update(NUMERIC_POS)
        return frozenset(pos)


def detect_candidates(sentence: Sentence, config: DetectorConfig | None = None) -> list[CandidateSpan]:
    """Return maximal runs of consecutive candidate-POS tokens as spans.

    Output is sorted by start and pairwise disjoint; every candidate-POS token
    is covered by exactly one span.
    """
    config = config or DetectorConfig()
    candidate = config.effective_pos()
    spans: list[CandidateSpan] = []
    start: int | None = None
    for i, tok in enumerate(sentence.tokens):
        if tok.pos in candidate:
            if start is None:
                start = i
        elif start is not None:
            spans.append(CandidateSpan(start, i, sentence.span_surface(start, i)))
            start = None
    if start is not None:
        end = len(sentence.tokens)
        spans.append(CandidateSpan(start, end, sentence.span_surface(start, end)))
    return spans
