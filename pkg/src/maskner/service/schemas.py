"""Request and response bodies for the HTTP surface.

Requests must be self-contained: path-valued config entries are a client-side
convenience and are rejected here (clients inline file contents before
sending).
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..config import EngineConfig, Threshold

SampleMode = Literal["per_label_mentions", "sentences"]


class HealthResponse(BaseModel):
    status: str
    version: str


class TemplateInfo(BaseModel):
    id: str
    pattern: str


class TemplatesResponse(BaseModel):
    templates: list[TemplateInfo]


class BuiltinLexiconResponse(BaseModel):
    labels: list[str]
    words: dict[str, list[str]]


class _EngineRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: EngineConfig = Field(default_factory=EngineConfig)
    corpus: str
    source: str = "corpus"


class TagRequest(_EngineRequest):
    format: Literal["jsonlines", "conll"] = "jsonlines"


class TagResponse(BaseModel):
    output: str
    meta: dict
    warnings: list[str]


class EvalRequest(_EngineRequest):
    predictions: str


class EvalResponse(BaseModel):
    report: dict
    rendered: str
    meta: dict
    predictions_meta: dict | None = None
    warnings: list[str]


class CompareTemplatesRequest(_EngineRequest):
    pass


class CompareTemplatesResponse(BaseModel):
    rows: list[dict]
    rendered: str
    meta: dict
    warnings: list[str]


class TuneThresholdRequest(_EngineRequest):
    pass


class TuneThresholdResponse(BaseModel):
    p_h: Threshold
    f1: float
    table: list[tuple[Threshold, float]]
    meta: dict
    warnings: list[str]


class DeriveLexiconRequest(_EngineRequest):
    mode: SampleMode = "per_label_mentions"
    k: int = Field(ge=1)
    top_m: int = Field(default=8, ge=1)


class DeriveLexiconResponse(BaseModel):
    lexicon: dict[str, list[str]]
    sample_ids: list[str]
    meta: dict
    warnings: list[str]


class SampleRequest(_EngineRequest):
    mode: SampleMode = "sentences"
    k: int = Field(ge=1)


class RelabelRequest(_EngineRequest):
    group: str


class CorpusResponse(BaseModel):
    output: str
    sentence_ids: list[str]
    meta: dict
    warnings: list[str]
