"""Representative-word lists per entity label."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Sequence

import yaml

from .errors import LexiconError
from .templates import Template, render_for_mode

if TYPE_CHECKING:
    from .backend import MaskBackend
    from .corpus import Dataset


@dataclass(frozen=True)
class LabelLexicon:
    """Ordered label list plus one ordered, lowercase word list per label.

    Label declaration order doubles as the tie-breaking order when two labels
    score identically.
    """

    labels: tuple[str, ...]
    words: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise LexiconError("duplicate labels in lexicon")
        if set(self.words) != set(self.labels):
            raise LexiconError("lexicon word map must cover exactly the declared labels")
        for label, words in self.words.items():
            if len(set(words)) != len(words):
                raise LexiconError(f"duplicate words under label {label!r}")

    def all_words(self) -> list[str]:
        """Union of every label's words, in declaration order, first occurrence kept."""
        seen: dict[str, None] = {}
        for label in self.labels:
            for word in self.words[label]:
                seen.setdefault(word)
        return list(seen)


@dataclass
class LexiconResult:
    lexicon: LabelLexicon
    warnings: list[str] = field(default_factory=list)


def builtin_lexicon() -> LabelLexicon:
    """Hand-picked representative words for five common entity types."""
    return LabelLexicon(
        labels=("LOC", "PER", "ORG", "ORDINAL", "DATE"),
        words={
            "LOC": ("location", "city", "country", "region", "area", "province", "state", "town"),
            "PER": ("person", "man", "woman", "boy", "girl", "human", "someone", "kid"),
            "ORG": ("organization", "community", "department", "association", "company", "team"),
            "ORDINAL": ("number", "digit", "count", "third", "second"),
            "DATE": ("date", "day", "month", "time", "year"),
        },
    )


def lexicon_from_mapping(mapping: Mapping[str, Sequence[str]]) -> LexiconResult:
    """Build a lexicon from a label -> word-array mapping.

    Words are lowercased and de-duplicated preserving first occurrence; label
    order follows the mapping order.
    """
    if not mapping:
        raise LexiconError("lexicon defines no labels")
    warnings: list[str] = []
    labels: list[str] = []
    words: dict[str, tuple[str, ...]] = {}
    for label, entries in mapping.items():
        if not isinstance(label, str) or not label:
            raise LexiconError(f"label keys must be non-empty strings, got {label!r}")
        if isinstance(entries, str) or not isinstance(entries, (list, tuple)):
            raise LexiconError(f"label {label!r} must map to an array of words")
        cleaned: dict[str, None] = {}
        for entry in entries:
            if not isinstance(entry, str) or not entry:
                raise LexiconError(f"label {label!r} contains a non-string entry: {entry!r}")
            low = entry.lower()
            if low in cleaned:
                warnings.append(f"label {label!r}: duplicate word {low!r} dropped")
            else:
                cleaned[low] = None
        if not cleaned:
            warnings.append(f"label {label!r} has an empty word list")
        labels.append(label)
        words[label] = tuple(cleaned)
    return LexiconResult(LabelLexicon(tuple(labels), words), warnings)


class _StrictLoader(yaml.SafeLoader):
    pass


def _no_duplicates(loader: _StrictLoader, node: yaml.MappingNode):
    seen = set()
    for key_node, _ in node.value:
        key = loader.construct_object(key_node)
        if key in seen:
            raise LexiconError(f"duplicate label key {key!r}")
        seen.add(key)
    return loader.construct_mapping(node)


_StrictLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _no_duplicates)


def _reject_duplicate_keys(pairs):
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise LexiconError(f"duplicate label key {key!r}")
        seen.add(key)
    return dict(pairs)


def load_lexicon_mapping(path: str | Path) -> dict:
    """Read the raw label -> word-array mapping (JSON or YAML, by extension)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            mapping = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
        except json.JSONDecodeError as exc:
            raise LexiconError(f"{path}: {exc}") from exc
    else:
        try:
            mapping = yaml.load(text, Loader=_StrictLoader)
        except yaml.YAMLError as exc:
            raise LexiconError(f"{path}: {exc}") from exc
    if mapping is None:
        raise LexiconError(f"{path}: lexicon defines no labels")
    if not isinstance(mapping, dict):
        raise LexiconError(f"{path}: expected a mapping of labels to word arrays")
    return mapping


def load_lexicon(path: str | Path) -> LexiconResult:
    """Load a label -> word-array document (JSON or YAML, by extension)."""
    return lexicon_from_mapping(load_lexicon_mapping(path))


def derive_from_data(
    samples: "Dataset",
    template: Template,
    backend: "MaskBackend",
    top_m: int = 8,
) -> LexiconResult:
    """Derive representative words from gold mentions in few-shot samples.

    For every gold mention the backend is queried with the instantiated prompt
    and per-word probabilities are summed across the label's mentions; each
    label keeps its top_m words by accumulated score (ties broken
    lexicographically). The accumulation is commutative, so concurrent backends
    would yield the same result.
    """
    if top_m < 1:
        raise ValueError("top_m must be a positive integer")
    scores: dict[str, dict[str, float]] = {label: {} for label in samples.label_set}
    mentions: dict[str, int] = {label: 0 for label in samples.label_set}
    for sentence in samples.sentences:
        text = sentence.text()
        for span in sentence.gold:
            surface = sentence.span_surface(span.start, span.end)
            prompt = render_for_mode(template, surface, text, backend.mode, backend.mask_sentinel)
            dist = backend.fill(prompt)
            acc = scores[span.label]
            mentions[span.label] += 1
            for word, prob in dist.probs.items():
                low = word.lower()
                acc[low] = acc.get(low, 0.0) + prob

    warnings: list[str] = []
    words: dict[str, tuple[str, ...]] = {}
    for label in samples.label_set:
        if mentions[label] == 0:
            warnings.append(f"label {label!r} has no mentions in the samples; empty word list")
            words[label] = ()
            continue
        ranked = sorted(scores[label].items(), key=lambda kv: (-kv[1], kv[0]))
        words[label] = tuple(word for word, _ in ranked[:top_m])
    return LexiconResult(LabelLexicon(tuple(samples.label_set), words), warnings)
