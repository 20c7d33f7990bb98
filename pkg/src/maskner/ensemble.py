"""Confidence-gated combination of base predictions with a second classifier."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Dataset, Sentence
from .detector import CandidateSpan
from .errors import ParseError
from .labeler import SECONDARY, Prediction

# Relayed spans carry no probability of their own; 1.0 marks "trusted as given".
RELAY_CONFIDENCE = 1.0


@dataclass(frozen=True)
class SecondarySpan:
    start: int
    end: int
    label: str

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span ({self.start}, {self.end})")
        if not self.label:
            raise ValueError("span label must be non-empty")

    def overlaps(self, other) -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class SecondaryPredictions:
    """Another classifier's spans, keyed by sentence id."""

    by_sentence: Mapping[str, tuple[SecondarySpan, ...]]

    def __post_init__(self):
        for sid, spans in self.by_sentence.items():
            _require_disjoint(spans, f"secondary spans for {sid!r}")

    def spans_for(self, sentence_id: str) -> tuple[SecondarySpan, ...]:
        return self.by_sentence.get(sentence_id, ())

    def validate_against(self, dataset: Dataset):
        known = {s.id: len(s.tokens) for s in dataset.sentences}
        for sid, spans in self.by_sentence.items():
            if sid not in known:
                raise ValueError(f"secondary predictions name unknown sentence {sid!r}")
            for span in spans:
                if span.end > known[sid]:
                    raise ValueError(
                        f"secondary span ({span.start}, {span.end}) exceeds sentence {sid!r}"
                    )


def secondary_from_records(records: Sequence[Mapping]) -> SecondaryPredictions:
    """Build from parsed records of shape {id, spans:[{start,end,label}]}."""
    by_sentence: dict[str, tuple[SecondarySpan, ...]] = {}
    for record in records:
        if not isinstance(record, Mapping) or "id" not in record:
            raise ParseError(f"secondary record lacks an id: {record!r}")
        sid = record["id"]
        if sid in by_sentence:
            raise ParseError(f"duplicate sentence id {sid!r} in secondary predictions")
        spans = []
        for raw in record.get("spans", []):
            try:
                spans.append(SecondarySpan(raw["start"], raw["end"], raw["label"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad secondary span {raw!r} for {sid!r}: {exc}") from exc
        by_sentence[sid] = tuple(spans)
    return SecondaryPredictions(by_sentence)


def read_secondary_records(text: str) -> list[dict]:
    """Parse JSON-lines secondary predictions into raw records."""
    records = []
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), line=n) from exc
    return records


def load_secondary(path: str | Path) -> SecondaryPredictions:
    """Read JSON-lines secondary predictions, one sentence record per line."""
    return secondary_from_records(read_secondary_records(Path(path).read_text(encoding="utf-8")))


@dataclass
class ThresholdConfig:
    p_h: float = 0.0
    grid: list[float] = field(default_factory=list)


def _require_disjoint(spans: Sequence, what: str):
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    for left, right in zip(ordered, ordered[1:]):
        if left.overlaps(right):
            raise ValueError(
                f"{what} overlap: ({left.start}, {left.end}) and ({right.start}, {right.end})"
            )


def combine(
    base: Sequence[Prediction],
    secondary: Sequence[SecondarySpan],
    p_h: float,
    sentence: Sentence | None = None,
) -> list[Prediction]:
    """Keep base predictions that clear the threshold; relay the rest.

    A base prediction survives iff its confidence is strictly above p_h.
    Every secondary span not overlapping a surviving base span is relayed
    (the second classifier's verdict covers low-confidence regions, including
    its O-tags: a dropped base span with no secondary counterpart disappears).
    p_h = -inf means "trust the base outright", so secondary spans are ignored
    rather than patched into uncovered gaps.
    """
    _require_disjoint([p.span for p in base], "base spans")
    _require_disjoint(secondary, "secondary spans")
    if math.isinf(p_h) and p_h < 0:
        return sorted(base, key=lambda p: p.span.start)
    kept = [p for p in base if p.confidence > p_h]
    merged = list(kept)
    for span in secondary:
        if any(span.overlaps(p.span) for p in kept):
            continue
        surface = sentence.span_surface(span.start, span.end) if sentence is not None else ""
        merged.append(
            Prediction(
                CandidateSpan(span.start, span.end, surface),
                span.label,
                RELAY_CONFIDENCE,
                None,
                source=SECONDARY,
            )
        )
    merged.sort(key=lambda p: p.span.start)
    return merged


@dataclass
class ThresholdResult:
    p_h: float
    f1: float
    table: list[tuple[float, float]]


def tune_threshold(
    dev: Dataset,
    base_predictions: Mapping[str, Sequence[Prediction]],
    secondary: SecondaryPredictions,
    grid: Sequence[float],
    label_filter: Sequence[str] | None = None,
) -> ThresholdResult:
    """Grid-search the threshold; smallest value achieving maximal micro-F1.

    The grid is augmented with -inf (pure base) and +inf (pure secondary), so
    the winner never scores below either system alone.
    """
    from .evaluator import span_f1

    if not grid:
        raise ValueError("threshold grid must be non-empty")
    if not dev.sentences:
        raise ValueError("cannot tune on an empty dataset")
    secondary.validate_against(dev)
    points = sorted(set(float(g) for g in grid) | {float("-inf"), float("inf")})

    table: list[tuple[float, float]] = []
    best: tuple[float, float] | None = None
    for p_h in points:
        combined = {
            s.id: combine(base_predictions.get(s.id, ()), secondary.spans_for(s.id), p_h, s)
            for s in dev.sentences
        }
        f1 = span_f1(dev, combined, label_filter).micro["f1"]
        table.append((p_h, f1))
        if best is None or f1 > best[1]:
            best = (p_h, f1)
    return ThresholdResult(best[0], best[1], table)
