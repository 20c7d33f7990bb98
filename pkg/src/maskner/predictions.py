"""Serialize and reload prediction sets."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Dataset, GoldSpan, render_conll, tags_from_spans
from .detector import CandidateSpan
from .errors import ParseError
from .labeler import BASE, Prediction

FORMATS = ("jsonlines", "conll")


def _check_ids_and_ranges(dataset: Dataset, predictions: Mapping[str, Sequence[Prediction]]):
    lengths = {s.id: len(s.tokens) for s in dataset.sentences}
    for sid, preds in predictions.items():
        if sid not in lengths:
            raise ValueError(f"predictions name unknown sentence {sid!r}")
        for p in preds:
            if p.span.end > lengths[sid]:
                raise ValueError(
                    f"span ({p.span.start}, {p.span.end}) out of range for sentence {sid!r}"
                )


def write_predictions(
    dataset: Dataset,
    predictions: Mapping[str, Sequence[Prediction]],
    fmt: str = "jsonlines",
    meta: Mapping | None = None,
) -> str:
    """Render predictions over a corpus.

    jsonlines: one record per sentence, preceded by a meta record when given
    (the meta travels with the file so a rerun can be checked against it).
    conll: token-per-line `surface pos tag` with predicted BIO tags; meta has
    no in-band slot here, callers report it on stderr.
    """
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    _check_ids_and_ranges(dataset, predictions)

    if fmt == "conll":
        tags_by_id = {}
        for sentence in dataset.sentences:
            spans = [
                GoldSpan(p.span.start, p.span.end, p.label)
                for p in predictions.get(sentence.id, ())
            ]
            tags_by_id[sentence.id] = tags_from_spans(len(sentence), spans)
        return render_conll(dataset, tags_by_id)

    lines = []
    if meta is not None:
        lines.append(json.dumps({"meta": dict(meta)}, ensure_ascii=False, sort_keys=True))
    for sentence in dataset.sentences:
        record = {
            "id": sentence.id,
            "tokens": [tok.surface for tok in sentence.tokens],
            "spans": [
                {
                    "start": p.span.start,
                    "end": p.span.end,
                    "label": p.label,
                    "confidence": p.confidence,
                    "word": p.winning_word,
                    "source": p.source,
                }
                for p in sorted(predictions.get(sentence.id, ()), key=lambda p: p.span.start)
            ],
        }
        lines.append(json.dumps(record, ensure_ascii=False))
    return "\n".join(lines) + "\n" if lines else ""


def read_predictions_jsonl(text: str) -> tuple[dict | None, dict[str, list[Prediction]]]:
    """Parse a jsonlines prediction file back into per-sentence predictions.

    Returns (meta, predictions); meta is None when the file has no meta record.
    """
    meta: dict | None = None
    by_sentence: dict[str, list[Prediction]] = {}
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), line=n) from exc
        if not isinstance(record, dict):
            raise ParseError(f"expected an object, got {type(record).__name__}", line=n)
        if "meta" in record and "id" not in record:
            if meta is not None:
                raise ParseError("duplicate meta record", line=n)
            meta = record["meta"]
            continue
        try:
            sid = record["id"]
            tokens = record["tokens"]
            preds = []
            for raw in record.get("spans", []):
                start, end = raw["start"], raw["end"]
                surface = " ".join(tokens[start:end])
                preds.append(
                    Prediction(
                        CandidateSpan(start, end, surface),
                        raw["label"],
                        raw.get("confidence", 1.0),
                        raw.get("word"),
                        source=raw.get("source", BASE),
                    )
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad prediction record: {exc}", line=n) from exc
        if sid in by_sentence:
            raise ParseError(f"duplicate sentence id {sid!r}", line=n)
        by_sentence[sid] = preds
    return meta, by_sentence


def load_predictions(path: str | Path) -> tuple[dict | None, dict[str, list[Prediction]]]:
    return read_predictions_jsonl(Path(path).read_text(encoding="utf-8"))


def gold_to_predictions(dataset: Dataset) -> dict[str, list[Prediction]]:
    """Recast gold spans as predictions, e.g. to sanity-check the evaluator."""
    result: dict[str, list[Prediction]] = {}
    for sentence in dataset.sentences:
        result[sentence.id] = [
            Prediction(
                CandidateSpan(span.start, span.end, sentence.span_surface(span.start, span.end)),
                span.label,
                1.0,
                None,
            )
            for span in sentence.gold
        ]
    return result
