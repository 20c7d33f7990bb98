"""Cloze templates and their instantiation into prompts."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import TemplateError, UnsupportedTemplateError

TOKEN_PLACEHOLDER = "[TOKEN]"
MASK_PLACEHOLDER = "[MASK]"

MASKED = "masked"
CAUSAL = "causal"

# Punctuation allowed after the mask in causal-renderable patterns.
_TRAILING_PUNCT = re.compile(r"^[\s.,;:!?]*$")


@dataclass(frozen=True)
class Template:
    id: str
    pattern: str


@dataclass(frozen=True)
class Prompt:
    """A rendered backend query.

    Masked prompts contain exactly one mask sentinel; causal prompts end at the
    word preceding the mask position and carry no sentinel.
    """

    text: str
    mask_mode: str
    mask_sentinel: str | None = None


_BUILTIN_PATTERNS: tuple[tuple[str, str], ...] = (
    ("T1", "[TOKEN] is a [MASK]."),
    ("T2", "[TOKEN] was a [MASK]."),
    ("T3", "[TOKEN] would be a [MASK]."),
    ("T4", "[TOKEN] a [MASK]."),
    ("T5", "[TOKEN] [MASK]."),
    ("T6", "[TOKEN] is an example of a [MASK]."),
    ("T7", "[TOKEN] is an instance of a [MASK]."),
    ("T8", "[TOKEN] denotes a [MASK]."),
    ("T9", "[TOKEN] is well-known to be a [MASK]."),
    ("T10", "Many people consider [TOKEN] to be a [MASK]."),
    ("T11", "[TOKEN] is a common [MASK] known to many people."),
    ("T12", "There are many [MASK]s but [TOKEN] stands out nevertheless."),
    ("T13", "A [MASK] like [TOKEN] is often mentioned in conversations."),
    ("T14", "A [MASK] like [TOKEN]."),
    ("T15", "This [MASK], [TOKEN], is worth discussing."),
)


def builtin_catalog() -> dict[str, Template]:
    """The fifteen built-in cloze patterns, keyed T1 through T15."""
    return {tid: Template(tid, pattern) for tid, pattern in _BUILTIN_PATTERNS}


def parse_template(pattern: str, id: str) -> Template:
    """Validate placeholder cardinality and return a Template."""
    for placeholder in (TOKEN_PLACEHOLDER, MASK_PLACEHOLDER):
        n = pattern.count(placeholder)
        if n == 0:
            raise TemplateError(f"template {id!r}: missing {placeholder}")
        if n > 1:
            raise TemplateError(f"template {id!r}: duplicate {placeholder}")
    return Template(id, pattern)


def instantiate_masked(
    template: Template, span_surface: str, sentence_text: str, mask_sentinel: str = "[MASK]"
) -> Prompt:
    """Render `sentence + " " + pattern` with the span substituted and the mask
    replaced by the backend's sentinel. The sentence is passed through verbatim,
    without re-punctuation."""
    if not span_surface:
        raise ValueError("span surface must be non-empty")
    body = template.pattern.replace(MASK_PLACEHOLDER, mask_sentinel).replace(
        TOKEN_PLACEHOLDER, span_surface
    )
    text = f"{sentence_text} {body}" if sentence_text else body
    if text.count(mask_sentinel) != 1:
        raise TemplateError(
            f"prompt must contain the mask sentinel {mask_sentinel!r} exactly once; "
            f"check the sentence and span for collisions"
        )
    return Prompt(text=text, mask_mode=MASKED, mask_sentinel=mask_sentinel)


def instantiate_causal(template: Template, span_surface: str, sentence_text: str) -> Prompt:
    """Render a next-word context: the pattern is cut at the mask position.

    Only patterns whose mask follows the token slot and sits at the end (modulo
    trailing punctuation) can be served by an autoregressive backend.
    """
    if not span_surface:
        raise ValueError("span surface must be non-empty")
    mask_at = template.pattern.index(MASK_PLACEHOLDER)
    token_at = template.pattern.index(TOKEN_PLACEHOLDER)
    if mask_at < token_at:
        raise UnsupportedTemplateError(
            f"template {template.id!r}: mask precedes the token slot; not renderable in causal mode"
        )
    trailing = template.pattern[mask_at + len(MASK_PLACEHOLDER):]
    if not _TRAILING_PUNCT.match(trailing):
        raise UnsupportedTemplateError(
            f"template {template.id!r}: content follows the mask; not renderable in causal mode"
        )
    body = template.pattern[:mask_at].replace(TOKEN_PLACEHOLDER, span_surface)
    text = f"{sentence_text} {body}" if sentence_text else body
    return Prompt(text=text.rstrip(), mask_mode=CAUSAL, mask_sentinel=None)


def render_for_mode(
    template: Template, span_surface: str, sentence_text: str, mode: str, mask_sentinel: str
) -> Prompt:
    if mode == MASKED:
        return instantiate_masked(template, span_surface, sentence_text, mask_sentinel)
    if mode == CAUSAL:
        return instantiate_causal(template, span_surface, sentence_text)
    raise ValueError(f"unknown prompt mode {mode!r}")
