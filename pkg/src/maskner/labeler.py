"""Assign each candidate span the label whose representative words best fill the mask."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .backend import MaskBackend, MaskDistribution
from .corpus import Dataset, Sentence
from .detector import CandidateSpan, DetectorConfig, detect_candidates
from .lexicon import LabelLexicon
from .templates import Template, render_for_mode

AGGREGATIONS = ("max", "sum")

BASE = "base"
SECONDARY = "secondary"


@dataclass(frozen=True)
class ScoredLabel:
    label: str
    score: float
    # None only when the label's word list is empty
    winning_word: str | None


@dataclass(frozen=True)
class Prediction:
    span: CandidateSpan
    label: str
    confidence: float
    winning_word: str | None
    source: str = BASE

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence outside [0,1]: {self.confidence}")
        if self.source not in (BASE, SECONDARY):
            raise ValueError(f"unknown prediction source: {self.source!r}")


def _check_aggregation(aggregation: str):
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")


def score_labels(
    dist: MaskDistribution,
    lexicon: LabelLexicon,
    aggregation: str = "max",
) -> list[ScoredLabel]:
    """Score every label against a mask distribution, best first.

    max: a label scores its best word's probability. sum: a label scores the
    sum over its words (still a probability: the words are disjoint events of
    one distribution). Absent words score 0. Ties keep lexicon declaration
    order, which the stable sort preserves.
    """
    _check_aggregation(aggregation)
    if not lexicon.labels:
        raise ValueError("lexicon has no labels")
    scored: list[ScoredLabel] = []
    for label in lexicon.labels:
        words = lexicon.words[label]
        best_word: str | None = None
        best_prob = 0.0
        total = 0.0
        for word in words:
            prob = dist.probs.get(word, 0.0)
            total += prob
            if best_word is None or prob > best_prob:
                best_word = word
                best_prob = prob
        score = best_prob if aggregation == "max" else min(total, 1.0)
        scored.append(ScoredLabel(label, score, best_word))
    scored.sort(key=lambda s: -s.score)
    return scored


def classify_span(
    span: CandidateSpan,
    sentence: Sentence,
    template: Template,
    backend: MaskBackend,
    lexicon: LabelLexicon,
    aggregation: str = "max",
    abstain_below: float = 0.0,
) -> Prediction | None:
    """Label one candidate span, or abstain when the top score is too low.

    The backend is asked only about the lexicon's words: the argmax over
    labels needs no other probabilities.
    """
    prompt = render_for_mode(
        template, span.surface, sentence.text(), backend.mode, backend.mask_sentinel
    )
    dist = backend.fill(prompt, candidates=lexicon.all_words())
    top = score_labels(dist, lexicon, aggregation)[0]
    if top.score <= abstain_below:
        return None
    return Prediction(span, top.label, top.score, top.winning_word, source=BASE)


def tag_sentence(
    sentence: Sentence,
    template: Template,
    backend: MaskBackend,
    lexicon: LabelLexicon,
    detector_config: DetectorConfig | None = None,
    aggregation: str = "max",
    abstain_below: float = 0.0,
) -> list[Prediction]:
    """Detect candidate spans and label each; abstained spans are omitted."""
    predictions: list[Prediction] = []
    for span in detect_candidates(sentence, detector_config):
        prediction = classify_span(
            span, sentence, template, backend, lexicon, aggregation, abstain_below
        )
        if prediction is not None:
            predictions.append(prediction)
    return predictions


def tag_dataset(
    dataset: Dataset,
    template: Template,
    backend: MaskBackend,
    lexicon: LabelLexicon,
    detector_config: DetectorConfig | None = None,
    aggregation: str = "max",
    abstain_below: float = 0.0,
    jobs: int = 1,
) -> dict[str, list[Prediction]]:
    """Tag every sentence; result keys follow corpus order regardless of jobs."""
    if jobs < 1:
        raise ValueError("jobs must be a positive integer")

    def work(sentence: Sentence) -> list[Prediction]:
        return tag_sentence(
            sentence, template, backend, lexicon, detector_config, aggregation, abstain_below
        )

    sentences: Sequence[Sentence] = dataset.sentences
    if jobs == 1 or len(sentences) <= 1:
        results = [work(sentence) for sentence in sentences]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, sentences))
    return {sentence.id: preds for sentence, preds in zip(sentences, results)}
