"""Column-format NER corpora: parsing, few-shot sampling, and group relabeling."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .errors import ParseError

DOC_SEPARATOR = "-DOCSTART-"


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str
    index: int

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")


@dataclass(frozen=True, order=True)
class GoldSpan:
    """A labeled token span; `start` inclusive, `end` exclusive."""

    start: int
    end: int
    label: str

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span ({self.start}, {self.end})")
        if not self.label:
            raise ValueError("span label must be non-empty")

    def overlaps(self, other: "GoldSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[Token, ...]
    gold: tuple[GoldSpan, ...] = ()

    def __post_init__(self):
        for i, tok in enumerate(self.tokens):
            if tok.index != i:
                raise ValueError(f"token index {tok.index} at position {i} in {self.id}")
        prev_end = 0
        prev_start = -1
        for span in self.gold:
            if span.start < prev_start:
                raise ValueError(f"gold spans not sorted by start in {self.id}")
            if span.start < prev_end:
                raise ValueError(f"overlapping gold spans in {self.id}")
            if span.end > len(self.tokens):
                raise ValueError(f"gold span {span} exceeds sentence {self.id}")
            prev_start, prev_end = span.start, span.end

    def __len__(self) -> int:
        return len(self.tokens)

    def text(self) -> str:
        """Surface rendering used for prompts: token surfaces joined by single spaces."""
        return " ".join(tok.surface for tok in self.tokens)

    def span_surface(self, start: int, end: int) -> str:
        return " ".join(tok.surface for tok in self.tokens[start:end])


@dataclass(frozen=True)
class Dataset:
    sentences: tuple[Sentence, ...]
    label_set: tuple[str, ...]

    def __post_init__(self):
        ids = [s.id for s in self.sentences]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate sentence ids: {dupes}")
        known = set(self.label_set)
        for sent in self.sentences:
            for span in sent.gold:
                if span.label not in known:
                    raise ValueError(f"label {span.label!r} of {sent.id} not in label_set")

    def __len__(self) -> int:
        return len(self.sentences)

    def by_id(self) -> dict[str, Sentence]:
        return {s.id: s for s in self.sentences}


@dataclass(frozen=True)
class EntityGroup:
    name: str
    labels: frozenset[str]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("entity group must contain at least one label")


# Label partition used by the domain-adaptation experiments on OntoNotes-style tag sets.
BUILTIN_GROUPS: dict[str, EntityGroup] = {
    "A": EntityGroup("A", frozenset({"ORG", "NORP", "ORDINAL", "WORK OF ART", "QUANTITY", "LAW"})),
    "B": EntityGroup("B", frozenset({"GPE", "CARDINAL", "PERCENT", "TIME", "EVENT", "LANGUAGE"})),
    "C": EntityGroup("C", frozenset({"PERSON", "DATE", "MONEY", "LOC", "FAC", "PRODUCT"})),
}


@dataclass(frozen=True)
class ColumnSpec:
    """Column layout of a whitespace-separated corpus file.

    `tag = -1` addresses the last column of each line. `pos = None` marks a corpus
    without POS annotation; such tokens get the placeholder tag "X".
    """

    token: int = 0
    pos: int | None = 1
    tag: int = -1

    def __post_init__(self):
        if self.token < 0:
            raise ValueError("token column must be >= 0")
        if self.pos is not None and self.pos < 0:
            raise ValueError("pos column must be >= 0 or None")
        if self.tag < -1:
            raise ValueError("tag column must be >= 0, or -1 for the last column")

    def max_index(self) -> int:
        cols = [self.token, self.tag if self.tag >= 0 else 0]
        if self.pos is not None:
            cols.append(self.pos)
        return max(cols)


@dataclass
class ParseResult:
    dataset: Dataset
    warnings: list[str] = field(default_factory=list)
    iob_repairs: int = 0


def spans_from_bio(tags: list[str], line_numbers: list[int] | None = None) -> tuple[list[GoldSpan], int, list[str]]:
    """Decode BIO tags into spans.

    An I-X without a preceding same-type tag is repaired to B-X; repairs are
    counted and reported as warnings rather than rejected.
    """
    lines = line_numbers or [i + 1 for i in range(len(tags))]
    spans: list[GoldSpan] = []
    warnings: list[str] = []
    repairs = 0
    start: int | None = None
    label: str | None = None

    def close(end: int):
        nonlocal start, label
        if start is not None and label is not None:
            spans.append(GoldSpan(start, end, label))
        start, label = None, None

    for i, tag in enumerate(tags):
        if tag == "O":
            close(i)
        elif tag.startswith("B-") and len(tag) > 2:
            close(i)
            start, label = i, tag[2:]
        elif tag.startswith("I-") and len(tag) > 2:
            this = tag[2:]
            if label == this:
                continue
            repairs += 1
            warnings.append(f"line {lines[i]}: orphan I-{this} treated as B-{this}")
            close(i)
            start, label = i, this
        else:
            raise ParseError(f"unrecognized entity tag {tag!r}", line=lines[i])
    close(len(tags))
    return spans, repairs, warnings


def tags_from_spans(length: int, spans: list[GoldSpan]) -> list[str]:
    tags = ["O"] * length
    for span in sorted(spans):
        tags[span.start] = f"B-{span.label}"
        for i in range(span.start + 1, span.end):
            tags[i] = f"I-{span.label}"
    return tags


def parse_conll(text: str, columns: ColumnSpec | None = None, source: str = "corpus") -> ParseResult:
    """Parse a CoNLL-style column file into a Dataset.

    One token per line, whitespace-separated columns, blank line between
    sentences, entity tags in BIO scheme. `-DOCSTART-` separator lines are
    skipped. Sentence ids are `<source>:<1-based ordinal>`.
    """
    columns = columns or ColumnSpec()
    required = columns.max_index()

    sentences: list[Sentence] = []
    labels: list[str] = []
    seen_labels: set[str] = set()
    warnings: list[str] = []
    repairs = 0

    surfaces: list[str] = []
    poses: list[str] = []
    tags: list[str] = []
    tag_lines: list[int] = []

    def flush():
        nonlocal surfaces, poses, tags, tag_lines, repairs
        if not surfaces:
            return
        spans, reps, warns = spans_from_bio(tags, tag_lines)
        repairs += reps
        warnings.extend(warns)
        tokens = tuple(Token(s, p, i) for i, (s, p) in enumerate(zip(surfaces, poses)))
        sid = f"{source}:{len(sentences) + 1}"
        sentences.append(Sentence(sid, tokens, tuple(sorted(spans))))
        for span in spans:
            if span.label not in seen_labels:
                seen_labels.add(span.label)
                labels.append(span.label)
        surfaces, poses, tags, tag_lines = [], [], [], []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            flush()
            continue
        cols = line.split()
        if cols[0] == DOC_SEPARATOR:
            flush()
            continue
        if len(cols) <= required:
            raise ParseError(
                f"expected at least {required + 1} columns, got {len(cols)}", line=lineno
            )
        surfaces.append(cols[columns.token])
        poses.append(cols[columns.pos] if columns.pos is not None else "X")
        tags.append(cols[columns.tag])
        tag_lines.append(lineno)
    flush()

    return ParseResult(Dataset(tuple(sentences), tuple(labels)), warnings, repairs)


def render_conll(dataset: Dataset, tags_by_id: dict[str, list[str]]) -> str:
    """Render sentences as `surface pos tag` lines; re-parsable by parse_conll."""
    blocks = []
    for sent in dataset.sentences:
        tags = tags_by_id.get(sent.id) or ["O"] * len(sent)
        lines = [f"{tok.surface} {tok.pos} {tag}" for tok, tag in zip(sent.tokens, tags)]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n" if blocks else ""


def render_gold_conll(dataset: Dataset) -> str:
    tags = {s.id: tags_from_spans(len(s), list(s.gold)) for s in dataset.sentences}
    return render_conll(dataset, tags)


@dataclass
class SampleResult:
    dataset: Dataset
    warnings: list[str] = field(default_factory=list)


SAMPLE_MODES = ("per_label_mentions", "sentences")


def few_shot_sample(dataset: Dataset, mode: str, k: int, seed: int) -> SampleResult:
    """Draw a seeded few-shot sample.

    `sentences` mode takes a uniform sample of min(k, n) sentences.
    `per_label_mentions` mode greedily accepts uniformly-shuffled sentences that
    still contribute to a label below k gold mentions, until every label in the
    label set has at least k mentions or the pool is exhausted.

    Sampled sentences keep their original corpus order. Deterministic per
    (dataset order, mode, k, seed).
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    if mode not in SAMPLE_MODES:
        raise ValueError(f"unknown sampling mode {mode!r}; expected one of {SAMPLE_MODES}")

    rng = random.Random(seed)
    n = len(dataset.sentences)
    warnings: list[str] = []

    if mode == "sentences":
        if k > n:
            warnings.append(f"requested {k} sentences but the corpus has only {n}; returning all")
            picked = list(range(n))
        else:
            picked = sorted(rng.sample(range(n), k))
    else:
        order = list(range(n))
        rng.shuffle(order)
        counts: dict[str, int] = {label: 0 for label in dataset.label_set}
        picked = []
        for idx in order:
            sent = dataset.sentences[idx]
            if not any(counts[sp.label] < k for sp in sent.gold):
                continue
            picked.append(idx)
            for sp in sent.gold:
                counts[sp.label] += 1
            if all(c >= k for c in counts.values()):
                break
        unmet = [label for label in dataset.label_set if counts[label] < k]
        if unmet:
            warnings.append(
                f"pool exhausted before reaching {k} mentions for: {', '.join(unmet)}"
            )
        picked.sort()

    sampled = tuple(dataset.sentences[i] for i in picked)
    return SampleResult(Dataset(sampled, dataset.label_set), warnings)


def relabel_group(dataset: Dataset, target: EntityGroup) -> Dataset:
    """Delete every gold span labeled with a target-group label (O-tagging).

    The label set is left unchanged; non-target spans are passed through as-is.
    """
    unknown = sorted(target.labels - set(dataset.label_set))
    if unknown:
        raise ValueError(f"group {target.name!r} names labels absent from the corpus: {unknown}")
    sentences = tuple(
        replace(sent, gold=tuple(sp for sp in sent.gold if sp.label not in target.labels))
        for sent in dataset.sentences
    )
    return Dataset(sentences, dataset.label_set)
