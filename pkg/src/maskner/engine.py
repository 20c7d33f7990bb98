"""Wire a config to corpora, backends, and reports: the engine behind service and CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import httpx

from .backend import MaskBackend, make_backend
from .config import EngineConfig, TemplateSpec
from .corpus import (
    BUILTIN_GROUPS,
    ColumnSpec,
    Dataset,
    EntityGroup,
    ParseResult,
    few_shot_sample,
    parse_conll,
    relabel_group,
    render_gold_conll,
)
from .ensemble import (
    SecondaryPredictions,
    ThresholdResult,
    combine,
    load_secondary,
    secondary_from_records,
    tune_threshold,
)
from .errors import ConfigError, TemplateError
from .evaluator import (
    EvalReport,
    TemplateRow,
    compare_templates,
    render_comparison,
    render_report,
    span_f1,
)
from .labeler import Prediction, tag_dataset
from .lexicon import LabelLexicon, builtin_lexicon, derive_from_data, load_lexicon, lexicon_from_mapping
from .predictions import read_predictions_jsonl, write_predictions
from .templates import Template, builtin_catalog, parse_template


def build_template(spec: str | TemplateSpec) -> Template:
    if isinstance(spec, TemplateSpec):
        return parse_template(spec.pattern, spec.id)
    catalog = builtin_catalog()
    if spec not in catalog:
        raise TemplateError(f"unknown template id {spec!r}")
    return catalog[spec]


def build_lexicon(config: EngineConfig, base_dir: Path | None = None) -> tuple[LabelLexicon, list[str]]:
    if config.lexicon == "builtin":
        return builtin_lexicon(), []
    if isinstance(config.lexicon, str):
        path = Path(config.lexicon)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        result = load_lexicon(path)
    else:
        result = lexicon_from_mapping(config.lexicon)
    return result.lexicon, result.warnings


def build_backend_from_config(
    config: EngineConfig,
    base_dir: Path | None = None,
    transport: httpx.BaseTransport | None = None,
) -> MaskBackend:
    return make_backend(config.backend, base_dir=base_dir, transport=transport)


def build_secondary(config: EngineConfig, base_dir: Path | None = None) -> SecondaryPredictions | None:
    if config.hybrid is None or config.hybrid.secondary is None:
        return None
    if isinstance(config.hybrid.secondary, str):
        path = Path(config.hybrid.secondary)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_secondary(path)
    return secondary_from_records(config.hybrid.secondary)


def _columns(config: EngineConfig) -> ColumnSpec:
    return ColumnSpec(config.columns.token, config.columns.pos, config.columns.tag)


def _parse(config: EngineConfig, corpus_text: str, source: str) -> ParseResult:
    return parse_conll(corpus_text, _columns(config), source)


def _meta(config: EngineConfig, backend: MaskBackend | None) -> dict:
    return {
        "config_hash": config.config_hash(),
        "model": backend.model_id() if backend is not None else "none",
        "seed": config.seed,
    }


@dataclass
class TagResult:
    output: str
    meta: dict
    predictions: Mapping[str, Sequence[Prediction]]
    warnings: list[str] = field(default_factory=list)


def run_tag(
    config: EngineConfig,
    corpus_text: str,
    source: str = "corpus",
    output_format: str = "jsonlines",
    base_dir: Path | None = None,
    transport: httpx.BaseTransport | None = None,
) -> TagResult:
    """Parse, detect, label, optionally arbitrate with the second classifier."""
    parsed = _parse(config, corpus_text, source)
    dataset = parsed.dataset
    template = build_template(config.template)
    lexicon, lex_warnings = build_lexicon(config, base_dir)
    backend = build_backend_from_config(config, base_dir, transport)
    predictions = tag_dataset(
        dataset,
        template,
        backend,
        lexicon,
        config.detector,
        config.aggregation,
        config.abstain_below,
        jobs=config.jobs,
    )

    secondary = build_secondary(config, base_dir)
    if secondary is not None:
        if config.hybrid.p_h is None:
            raise ConfigError("hybrid tagging requires p_h (or run tune-threshold first)")
        secondary.validate_against(dataset)
        by_id = dataset.by_id()
        predictions = {
            sid: combine(preds, secondary.spans_for(sid), config.hybrid.p_h, by_id[sid])
            for sid, preds in predictions.items()
        }

    meta = _meta(config, backend)
    output = write_predictions(
        dataset, predictions, output_format, meta if output_format == "jsonlines" else None
    )
    return TagResult(output, meta, predictions, parsed.warnings + lex_warnings)


@dataclass
class EvalResult:
    report: EvalReport
    rendered: str
    meta: dict
    predictions_meta: dict | None = None
    warnings: list[str] = field(default_factory=list)


def run_eval(
    config: EngineConfig,
    corpus_text: str,
    predictions_text: str,
    source: str = "corpus",
) -> EvalResult:
    """Score a predictions file against gold annotations."""
    parsed = _parse(config, corpus_text, source)
    pred_meta, predictions = read_predictions_jsonl(predictions_text)
    label_filter = config.eval.label_filter if config.eval else None
    report = span_f1(parsed.dataset, predictions, label_filter)
    return EvalResult(
        report, render_report(report), _meta(config, None), pred_meta, parsed.warnings
    )


@dataclass
class CompareResult:
    rows: list[TemplateRow]
    rendered: str
    meta: dict
    warnings: list[str] = field(default_factory=list)


def run_compare_templates(
    config: EngineConfig,
    corpus_text: str,
    source: str = "corpus",
    base_dir: Path | None = None,
    transport: httpx.BaseTransport | None = None,
) -> CompareResult:
    """Tag with every configured template and tabulate the scores."""
    parsed = _parse(config, corpus_text, source)
    specs = config.templates if config.templates is not None else list(builtin_catalog())
    templates = [build_template(spec) for spec in specs]
    lexicon, lex_warnings = build_lexicon(config, base_dir)
    backend = build_backend_from_config(config, base_dir, transport)
    label_filter = config.eval.label_filter if config.eval else None
    rows = compare_templates(
        parsed.dataset,
        templates,
        backend,
        lexicon,
        config.detector,
        config.aggregation,
        config.abstain_below,
        label_filter,
        jobs=config.jobs,
    )
    return CompareResult(
        rows, render_comparison(rows), _meta(config, backend), parsed.warnings + lex_warnings
    )


@dataclass
class TuneResult:
    result: ThresholdResult
    meta: dict
    warnings: list[str] = field(default_factory=list)


def run_tune_threshold(
    config: EngineConfig,
    corpus_text: str,
    source: str = "corpus",
    base_dir: Path | None = None,
    transport: httpx.BaseTransport | None = None,
) -> TuneResult:
    """Grid-search the arbitration threshold on a dev corpus."""
    if config.hybrid is None or config.hybrid.secondary is None:
        raise ConfigError("tune-threshold requires hybrid.secondary predictions")
    if not config.hybrid.grid:
        raise ConfigError("tune-threshold requires a non-empty hybrid.grid")
    parsed = _parse(config, corpus_text, source)
    dataset = parsed.dataset
    template = build_template(config.template)
    lexicon, lex_warnings = build_lexicon(config, base_dir)
    backend = build_backend_from_config(config, base_dir, transport)
    base_predictions = tag_dataset(
        dataset,
        template,
        backend,
        lexicon,
        config.detector,
        config.aggregation,
        config.abstain_below,
        jobs=config.jobs,
    )
    secondary = build_secondary(config, base_dir)
    label_filter = config.eval.label_filter if config.eval else None
    result = tune_threshold(dataset, base_predictions, secondary, config.hybrid.grid, label_filter)
    return TuneResult(result, _meta(config, backend), parsed.warnings + lex_warnings)


@dataclass
class DeriveResult:
    lexicon: dict[str, list[str]]
    sample_ids: list[str]
    meta: dict
    warnings: list[str] = field(default_factory=list)


def run_derive_lexicon(
    config: EngineConfig,
    corpus_text: str,
    mode: str,
    k: int,
    top_m: int = 8,
    source: str = "corpus",
    base_dir: Path | None = None,
    transport: httpx.BaseTransport | None = None,
) -> DeriveResult:
    """Sample few-shot sentences and derive representative words from them."""
    parsed = _parse(config, corpus_text, source)
    sample = few_shot_sample(parsed.dataset, mode, k, config.seed)
    template = build_template(config.template)
    backend = build_backend_from_config(config, base_dir, transport)
    derived = derive_from_data(sample.dataset, template, backend, top_m)
    mapping = {label: list(derived.lexicon.words[label]) for label in derived.lexicon.labels}
    return DeriveResult(
        mapping,
        [s.id for s in sample.dataset.sentences],
        _meta(config, backend),
        parsed.warnings + sample.warnings + derived.warnings,
    )


@dataclass
class CorpusResult:
    output: str
    meta: dict
    sentence_ids: list[str]
    warnings: list[str] = field(default_factory=list)


def run_sample(
    config: EngineConfig, corpus_text: str, mode: str, k: int, source: str = "corpus"
) -> CorpusResult:
    """Few-shot sample a corpus; emits the sampled subset in corpus format."""
    parsed = _parse(config, corpus_text, source)
    sample = few_shot_sample(parsed.dataset, mode, k, config.seed)
    return CorpusResult(
        render_gold_conll(sample.dataset),
        _meta(config, None),
        [s.id for s in sample.dataset.sentences],
        parsed.warnings + sample.warnings,
    )


def run_relabel(
    config: EngineConfig, corpus_text: str, group: str, source: str = "corpus"
) -> CorpusResult:
    """Strip a label group's spans from gold annotations (O-tagging)."""
    parsed = _parse(config, corpus_text, source)
    target = _resolve_group(group, parsed.dataset)
    stripped = relabel_group(parsed.dataset, target)
    return CorpusResult(
        render_gold_conll(stripped),
        _meta(config, None),
        [s.id for s in stripped.sentences],
        parsed.warnings,
    )


def _resolve_group(group: str, dataset: Dataset) -> EntityGroup:
    if group in BUILTIN_GROUPS:
        builtin = BUILTIN_GROUPS[group]
        # Builtin groups describe a full tag scheme; restrict to labels the
        # corpus actually uses so partial corpora stay usable.
        present = builtin.labels & set(dataset.label_set)
        if not present:
            raise ConfigError(f"group {group!r} shares no labels with the corpus")
        return EntityGroup(builtin.name, frozenset(present))
    labels = frozenset(part.strip() for part in group.split(",") if part.strip())
    if not labels:
        raise ConfigError("relabel group must name a builtin group or list labels")
    return EntityGroup("custom", labels)
