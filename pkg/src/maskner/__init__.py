"""Zero- and few-shot entity tagging by cloze-prompting a masked language model."""

from .backend import BackendConfig, HttpBackend, MaskDistribution, StubBackend, make_backend, stub_load
from .config import EngineConfig, load_config
from .corpus import (
    BUILTIN_GROUPS,
    ColumnSpec,
    Dataset,
    EntityGroup,
    GoldSpan,
    Sentence,
    Token,
    few_shot_sample,
    parse_conll,
    relabel_group,
)
from .detector import CandidateSpan, DetectorConfig, detect_candidates
from .ensemble import SecondaryPredictions, SecondarySpan, combine, tune_threshold
from .errors import (
    BackendError,
    BackendUnavailableError,
    ConfigError,
    CorpusError,
    EngineError,
    LexiconError,
    MissingFixtureError,
    ParseError,
    ProtocolError,
    TemplateError,
    UnsupportedTemplateError,
)
from .evaluator import EvalReport, compare_templates, span_f1
from .labeler import Prediction, ScoredLabel, classify_span, score_labels, tag_dataset, tag_sentence
from .lexicon import LabelLexicon, builtin_lexicon, derive_from_data, lexicon_from_mapping, load_lexicon
from .predictions import gold_to_predictions, load_predictions, read_predictions_jsonl, write_predictions
from .templates import Prompt, Template, builtin_catalog, parse_template, render_for_mode

__all__ = [
    "BackendConfig",
    "BackendError",
    "BackendUnavailableError",
    "BUILTIN_GROUPS",
    "builtin_catalog",
    "builtin_lexicon",
    "CandidateSpan",
    "classify_span",
    "ColumnSpec",
    "combine",
    "compare_templates",
    "ConfigError",
    "CorpusError",
    "Dataset",
    "derive_from_data",
    "detect_candidates",
    "DetectorConfig",
    "EngineConfig",
    "EngineError",
    "EntityGroup",
    "EvalReport",
    "few_shot_sample",
    "gold_to_predictions",
    "GoldSpan",
    "HttpBackend",
    "LabelLexicon",
    "lexicon_from_mapping",
    "LexiconError",
    "load_config",
    "load_lexicon",
    "load_predictions",
    "make_backend",
    "MaskDistribution",
    "MissingFixtureError",
    "parse_conll",
    "parse_template",
    "ParseError",
    "Prediction",
    "Prompt",
    "ProtocolError",
    "read_predictions_jsonl",
    "relabel_group",
    "render_for_mode",
    "score_labels",
    "ScoredLabel",
    "SecondaryPredictions",
    "SecondarySpan",
    "Sentence",
    "span_f1",
    "StubBackend",
    "stub_load",
    "tag_dataset",
    "tag_sentence",
    "Template",
    "TemplateError",
    "Token",
    "tune_threshold",
    "UnsupportedTemplateError",
    "write_predictions",
]
