"""HTTP surface: the fill-mask wire protocol plus a health probe."""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from .config import ServiceConfig
from .model import BadRequest, ClozeModel


class FillMaskRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str
    mask_sentinel: str = "[MASK]"
    top_k: int = Field(default=50, ge=1)
    candidates: list[str] | None = None


class NextWordRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    context: str
    top_k: int = Field(default=50, ge=1)
    candidates: list[str] | None = None


class TokenScore(BaseModel):
    token: str
    prob: float
    oov: bool | None = None


class ScoreResponse(BaseModel):
    tokens: list[TokenScore]
    model: str


class HealthResponse(BaseModel):
    status: str
    model: str


def create_app(config: ServiceConfig, scorer: ClozeModel | None = None) -> FastAPI:
    """Load the model (or adopt a pre-loaded one) and expose the protocol."""
    scorer = scorer if scorer is not None else ClozeModel(config)
    slots = threading.BoundedSemaphore(config.max_concurrency)
    app = FastAPI(title="fillmask-service")

    def check_caps(top_k: int, candidates):
        if top_k > config.max_top_k:
            raise HTTPException(400, f"top_k exceeds the configured cap ({config.max_top_k})")
        if candidates is not None and len(candidates) > config.max_top_k:
            raise HTTPException(
                400, f"candidate list exceeds the configured cap ({config.max_top_k})"
            )

    @app.get("/v1/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", model=scorer.model_id)

    @app.post("/v1/fill-mask", response_model=ScoreResponse, response_model_exclude_none=True)
    def fill_mask(request: FillMaskRequest):
        check_caps(request.top_k, request.candidates)
        try:
            with slots:
                tokens = scorer.fill_mask(
                    request.text, request.mask_sentinel, request.top_k, request.candidates
                )
        except BadRequest as exc:
            raise HTTPException(400, str(exc)) from exc
        return ScoreResponse(tokens=tokens, model=scorer.model_id)

    @app.post("/v1/next-word", response_model=ScoreResponse, response_model_exclude_none=True)
    def next_word(request: NextWordRequest):
        check_caps(request.top_k, request.candidates)
        try:
            with slots:
                tokens = scorer.next_word(request.context, request.top_k, request.candidates)
        except BadRequest as exc:
            raise HTTPException(400, str(exc)) from exc
        return ScoreResponse(tokens=tokens, model=scorer.model_id)

    return app
