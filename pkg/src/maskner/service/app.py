"""HTTP application exposing the tagging engine."""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

import httpx
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import engine
from ..config import EngineConfig
from ..errors import (
    BackendUnavailableError,
    ConfigError,
    EngineError,
    MissingFixtureError,
    ProtocolError,
)
from ..lexicon import builtin_lexicon
from ..templates import builtin_catalog
from . import schemas


def _version() -> str:
    try:
        return version("maskner")
    except PackageNotFoundError:
        return "0.0.0"


def _ensure_inline(config: EngineConfig):
    """Reject configs that point at files: requests must carry their data."""
    if isinstance(config.backend.fixtures, str):
        raise ConfigError(
            "backend.fixtures must be an inline prompt table in service requests"
        )
    if isinstance(config.lexicon, str) and config.lexicon != "builtin":
        raise ConfigError("lexicon must be 'builtin' or an inline mapping in service requests")
    if config.hybrid is not None and isinstance(config.hybrid.secondary, str):
        raise ConfigError("hybrid.secondary must be inline records in service requests")


def create_app(transport: httpx.BaseTransport | None = None) -> FastAPI:
    """Build the application; `transport` overrides upstream HTTP for tests."""
    app = FastAPI(title="maskner", version=_version())

    @app.exception_handler(EngineError)
    async def _engine_error(request: Request, exc: EngineError):
        if isinstance(exc, (BackendUnavailableError, ProtocolError)):
            return JSONResponse(status_code=502, content={"detail": str(exc)})
        if isinstance(exc, MissingFixtureError):
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/v1/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=_version())

    @app.get("/v1/templates", response_model=schemas.TemplatesResponse)
    def templates():
        return schemas.TemplatesResponse(
            templates=[
                schemas.TemplateInfo(id=t.id, pattern=t.pattern)
                for t in builtin_catalog().values()
            ]
        )

    @app.get("/v1/lexicon/builtin", response_model=schemas.BuiltinLexiconResponse)
    def lexicon_builtin():
        lex = builtin_lexicon()
        return schemas.BuiltinLexiconResponse(
            labels=list(lex.labels), words={l: list(w) for l, w in lex.words.items()}
        )

    @app.post("/v1/tag", response_model=schemas.TagResponse)
    def tag(request: schemas.TagRequest):
        _ensure_inline(request.config)
        result = engine.run_tag(
            request.config,
            request.corpus,
            request.source,
            request.format,
            transport=transport,
        )
        return schemas.TagResponse(output=result.output, meta=result.meta, warnings=result.warnings)

    @app.post("/v1/eval", response_model=schemas.EvalResponse)
    def evaluate(request: schemas.EvalRequest):
        _ensure_inline(request.config)
        result = engine.run_eval(request.config, request.corpus, request.predictions, request.source)
        return schemas.EvalResponse(
            report=result.report.as_dict(),
            rendered=result.rendered,
            meta=result.meta,
            predictions_meta=result.predictions_meta,
            warnings=result.warnings,
        )

    @app.post("/v1/compare-templates", response_model=schemas.CompareTemplatesResponse)
    def compare(request: schemas.CompareTemplatesRequest):
        _ensure_inline(request.config)
        result = engine.run_compare_templates(
            request.config, request.corpus, request.source, transport=transport
        )
        return schemas.CompareTemplatesResponse(
            rows=[row.as_dict() for row in result.rows],
            rendered=result.rendered,
            meta=result.meta,
            warnings=result.warnings,
        )

    @app.post("/v1/tune-threshold", response_model=schemas.TuneThresholdResponse)
    def tune(request: schemas.TuneThresholdRequest):
        _ensure_inline(request.config)
        result = engine.run_tune_threshold(
            request.config, request.corpus, request.source, transport=transport
        )
        return schemas.TuneThresholdResponse(
            p_h=result.result.p_h,
            f1=result.result.f1,
            table=result.result.table,
            meta=result.meta,
            warnings=result.warnings,
        )

    @app.post("/v1/derive-lexicon", response_model=schemas.DeriveLexiconResponse)
    def derive(request: schemas.DeriveLexiconRequest):
        _ensure_inline(request.config)
        result = engine.run_derive_lexicon(
            request.config,
            request.corpus,
            request.mode,
            request.k,
            request.top_m,
            request.source,
            transport=transport,
        )
        return schemas.DeriveLexiconResponse(
            lexicon=result.lexicon,
            sample_ids=result.sample_ids,
            meta=result.meta,
            warnings=result.warnings,
        )

    @app.post("/v1/sample", response_model=schemas.CorpusResponse)
    def sample(request: schemas.SampleRequest):
        _ensure_inline(request.config)
        result = engine.run_sample(request.config, request.corpus, request.mode, request.k, request.source)
        return schemas.CorpusResponse(
            output=result.output,
            sentence_ids=result.sentence_ids,
            meta=result.meta,
            warnings=result.warnings,
        )

    @app.post("/v1/relabel", response_model=schemas.CorpusResponse)
    def relabel(request: schemas.RelabelRequest):
        _ensure_inline(request.config)
        result = engine.run_relabel(request.config, request.corpus, request.group, request.source)
        return schemas.CorpusResponse(
            output=result.output,
            sentence_ids=result.sentence_ids,
            meta=result.meta,
            warnings=result.warnings,
        )

    return app
