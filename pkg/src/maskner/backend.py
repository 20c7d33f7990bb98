"""Probability sources for mask filling: fixture-driven stub and HTTP client."""

from __future__ import annotations

import json
import math
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Mapping, Sequence

import httpx
import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import (
    BackendError,
    BackendUnavailableError,
    ConfigError,
    MissingFixtureError,
    ProtocolError,
)
from .templates import CAUSAL, MASKED, Prompt

_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class MaskDistribution:
    """Word probabilities at the mask position.

    Entries are a subset of a full-vocabulary softmax, so they must lie in
    [0,1] and sum to at most 1 (plus float slack). Never renormalized: label
    scores are compared as raw probabilities.
    """

    probs: Mapping[str, float]
    prompt_echo: str

    def __post_init__(self):
        total = 0.0
        for word, prob in self.probs.items():
            if not isinstance(prob, (int, float)) or isinstance(prob, bool) or math.isnan(prob):
                raise ValueError(f"probability for {word!r} is not a number: {prob!r}")
            if prob < 0.0 or prob > 1.0:
                raise ValueError(f"probability for {word!r} outside [0,1]: {prob}")
            total += prob
        if total > 1.0 + _SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total}, exceeding 1")

    def top(self) -> tuple[str, float] | None:
        best: tuple[str, float] | None = None
        for word, prob in self.probs.items():
            if best is None or prob > best[1]:
                best = (word, prob)
        return best


class BackendConfig(BaseModel):
    """How to reach a probability source."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["stub", "http"] = "stub"
    endpoint: str | None = None
    mask_sentinel: str = "[MASK]"
    mode: Literal["masked", "causal"] = "masked"
    timeout: float = Field(default=10.0, gt=0)
    retries: int = Field(default=2, ge=0)
    top_k: int = Field(default=50, ge=1)
    max_in_flight: int = Field(default=8, ge=1)
    backoff: float = Field(default=0.25, ge=0)
    fixtures: str | dict[str, dict[str, float]] | None = None

    @model_validator(mode="after")
    def _check_kind(self):
        if self.kind == "http" and not self.endpoint:
            raise ValueError("http backend requires an endpoint")
        return self


class MaskBackend:
    """Common surface of all probability sources."""

    mode: str
    mask_sentinel: str

    def fill(self, prompt: Prompt, candidates: Sequence[str] | None = None) -> MaskDistribution:
        raise NotImplementedError

    def model_id(self) -> str:
        raise NotImplementedError

    def _check_mode(self, prompt: Prompt):
        if prompt.mask_mode != self.mode:
            raise ConfigError(
                f"prompt built for {prompt.mask_mode!r} mode sent to a {self.mode!r} backend"
            )


class StubBackend(MaskBackend):
    """Answers exactly from a prompt -> word -> probability table.

    A prompt absent from the table is an error: silently falling back would
    hide mis-wired tests.
    """

    def __init__(self, fixtures: Mapping[str, Mapping[str, float]], *,
                 mode: str = MASKED, mask_sentinel: str = "[MASK]"):
        self.mode = mode
        self.mask_sentinel = mask_sentinel
        self._table: dict[str, MaskDistribution] = {}
        for prompt_text, probs in fixtures.items():
            try:
                self._table[prompt_text] = MaskDistribution(dict(probs), prompt_text)
            except ValueError as exc:
                raise ConfigError(f"fixture for {prompt_text!r}: {exc}") from exc

    def fill(self, prompt: Prompt, candidates: Sequence[str] | None = None) -> MaskDistribution:
        self._check_mode(prompt)
        dist = self._table.get(prompt.text)
        if dist is None:
            raise MissingFixtureError(f"no fixture for prompt: {prompt.text!r}")
        if candidates is None:
            return dist
        probs = {word: dist.probs.get(word, 0.0) for word in candidates}
        return MaskDistribution(probs, prompt.text)

    def model_id(self) -> str:
        return "stub"


def load_fixture_table(path: str | Path) -> dict:
    """Read a prompt -> word -> probability table from a JSON or YAML file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read fixtures {path}: {exc}") from exc
    if path.suffix.lower() == ".json":
        try:
            table = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    else:
        try:
            table = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if table is None:
        return {}
    if not isinstance(table, dict):
        raise ConfigError(f"{path}: fixtures must map prompt text to word probability maps")
    return table


def stub_load(fixtures: str | Path | Mapping[str, Mapping[str, float]], *,
              mode: str = MASKED, mask_sentinel: str = "[MASK]") -> StubBackend:
    """Build a stub backend from an inline table or a JSON/YAML file of one."""
    if isinstance(fixtures, (str, Path)):
        table = load_fixture_table(fixtures)
    else:
        table = fixtures
    if not isinstance(table, Mapping):
        raise ConfigError("fixtures must map prompt text to word probability maps")
    for prompt_text, probs in table.items():
        if not isinstance(probs, Mapping):
            raise ConfigError(f"fixture for {prompt_text!r} must be a word -> probability map")
    return StubBackend(table, mode=mode, mask_sentinel=mask_sentinel)


class HttpBackend(MaskBackend):
    """Client for the fill-mask wire protocol.

    One request per prompt; a bounded semaphore caps in-flight requests so a
    wide worker pool cannot stampede the model service.
    """

    def __init__(self, config: BackendConfig, transport: httpx.BaseTransport | None = None):
        if config.kind != "http" or not config.endpoint:
            raise ConfigError("HttpBackend requires kind=http and an endpoint")
        self.mode = config.mode
        self.mask_sentinel = config.mask_sentinel
        self._config = config
        self._gate = threading.BoundedSemaphore(config.max_in_flight)
        self._client = httpx.Client(
            base_url=config.endpoint.rstrip("/"),
            timeout=httpx.Timeout(config.timeout),
            transport=transport,
        )
        self._model: str | None = None

    def close(self):
        self._client.close()

    def fill(self, prompt: Prompt, candidates: Sequence[str] | None = None) -> MaskDistribution:
        self._check_mode(prompt)
        if self.mode == MASKED:
            path = "/v1/fill-mask"
            payload = {
                "text": prompt.text,
                "mask_sentinel": self.mask_sentinel,
                "top_k": self._config.top_k,
                "candidates": list(candidates) if candidates is not None else None,
            }
        else:
            path = "/v1/next-word"
            payload = {
                "context": prompt.text,
                "top_k": self._config.top_k,
                "candidates": list(candidates) if candidates is not None else None,
            }
        body = self._post(path, payload)
        return self._parse(body, prompt.text)

    def _post(self, path: str, payload: dict) -> dict:
        attempts = self._config.retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            if attempt:
                time.sleep(self._config.backoff * 2 ** (attempt - 1))
            try:
                with self._gate:
                    response = self._client.post(path, json=payload)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = BackendUnavailableError(
                    f"{path} returned {response.status_code}"
                )
                continue
            if response.status_code >= 400:
                raise BackendError(
                    f"{path} rejected the request ({response.status_code}): {response.text}"
                )
            try:
                return response.json()
            except ValueError as exc:
                raise ProtocolError(f"{path} returned a non-JSON body") from exc
        raise BackendUnavailableError(
            f"{path} unreachable after {attempts} attempts: {last_error}"
        )

    def _parse(self, body: dict, prompt_text: str) -> MaskDistribution:
        if not isinstance(body, dict) or not isinstance(body.get("tokens"), list):
            raise ProtocolError("response must carry a tokens array")
        probs: dict[str, float] = {}
        for entry in body["tokens"]:
            if not isinstance(entry, dict) or "token" not in entry or "prob" not in entry:
                raise ProtocolError(f"malformed token entry: {entry!r}")
            probs[str(entry["token"])] = entry["prob"]
        model = body.get("model")
        if isinstance(model, str) and model:
            self._model = model
        try:
            return MaskDistribution(probs, prompt_text)
        except ValueError as exc:
            raise ProtocolError(str(exc)) from exc

    def model_id(self) -> str:
        if self._model is not None:
            return self._model
        try:
            with self._gate:
                response = self._client.get("/v1/health")
        except httpx.HTTPError as exc:
            raise BackendUnavailableError(f"health check failed: {exc}") from exc
        if response.status_code != 200:
            raise BackendUnavailableError(f"health check returned {response.status_code}")
        try:
            model = response.json().get("model")
        except ValueError as exc:
            raise ProtocolError("health response is not JSON") from exc
        if not isinstance(model, str) or not model:
            raise ProtocolError("health response carries no model identifier")
        self._model = model
        return model


def make_backend(config: BackendConfig, *, base_dir: Path | None = None,
                 transport: httpx.BaseTransport | None = None) -> MaskBackend:
    """Instantiate the backend a config describes.

    Relative fixture paths resolve against base_dir (the config file's
    directory) so configs stay relocatable.
    """
    if config.kind == "stub":
        if config.fixtures is None:
            raise ConfigError("stub backend requires fixtures")
        fixtures: str | Path | Mapping[str, Mapping[str, float]] = config.fixtures
        if isinstance(fixtures, str):
            path = Path(fixtures)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            fixtures = path
        return stub_load(fixtures, mode=config.mode, mask_sentinel=config.mask_sentinel)
    return HttpBackend(config, transport=transport)
