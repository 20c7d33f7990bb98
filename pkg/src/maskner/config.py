"""Engine configuration: one structured document drives every command."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Annotated, Literal

import yaml
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    ValidationError,
)

from .backend import BackendConfig, load_fixture_table
from .detector import DetectorConfig
from .errors import ConfigError


def _parse_threshold(value):
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("-inf", "-infinity"):
            return float("-inf")
        if text in ("inf", "+inf", "infinity", "+infinity"):
            return float("inf")
        return float(value)
    return value


def _dump_threshold(value: float):
    if math.isinf(value):
        return "-inf" if value < 0 else "+inf"
    return value


# JSON has no infinity literal; thresholds cross the wire as "-inf"/"+inf".
Threshold = Annotated[
    float,
    BeforeValidator(_parse_threshold),
    PlainSerializer(_dump_threshold, when_used="json"),
]


class TemplateSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    pattern: str = Field(min_length=1)


class ColumnsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    token: int = Field(default=0, ge=0)
    pos: int | None = Field(default=1, ge=0)
    tag: int = -1


class HybridConfig(BaseModel):
    """Second-classifier arbitration: a spans file plus a threshold or a grid."""

    model_config = ConfigDict(extra="forbid")

    secondary: str | list[dict] | None = None
    p_h: Threshold | None = None
    grid: list[Threshold] | None = None


class EvalSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label_filter: list[str] | None = None


class EngineConfig(BaseModel):
    """Everything a run needs; hashable for the reproducibility header.

    String-valued fixture/lexicon/secondary entries are file paths relative to
    the config's directory; inline_paths replaces them with file contents so
    the config becomes location-independent.
    """

    model_config = ConfigDict(extra="forbid")

    backend: BackendConfig = Field(default_factory=BackendConfig)
    template: str | TemplateSpec = "T1"
    templates: list[str | TemplateSpec] | None = None
    lexicon: str | dict[str, list[str]] = "builtin"
    detector: DetectorConfig = Field(default_factory=DetectorConfig)
    aggregation: Literal["max", "sum"] = "max"
    abstain_below: float = Field(default=0.0, ge=0.0, le=1.0)
    hybrid: HybridConfig | None = None
    eval: EvalSettings | None = None
    seed: int = 0
    jobs: int = Field(default=1, ge=1)
    columns: ColumnsConfig = Field(default_factory=ColumnsConfig)

    def config_hash(self) -> str:
        canonical = json.dumps(
            self.model_dump(mode="json"), sort_keys=True, ensure_ascii=False
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def inline_paths(self, base_dir: str | Path) -> "EngineConfig":
        """Replace path-valued fields with their file contents.

        Respects the config file's own location, so relative paths written
        next to the config keep working after the config leaves the machine.
        """
        base = Path(base_dir)
        update: dict = {}
        if isinstance(self.backend.fixtures, str):
            path = _resolve(base, self.backend.fixtures, "backend.fixtures")
            update["backend"] = self.backend.model_copy(
                update={"fixtures": load_fixture_table(path)}
            )
        if isinstance(self.lexicon, str) and self.lexicon != "builtin":
            from .lexicon import load_lexicon_mapping

            path = _resolve(base, self.lexicon, "lexicon")
            update["lexicon"] = {
                str(k): list(v) for k, v in load_lexicon_mapping(path).items()
            }
        if self.hybrid is not None and isinstance(self.hybrid.secondary, str):
            from .ensemble import read_secondary_records

            path = _resolve(base, self.hybrid.secondary, "hybrid.secondary")
            records = read_secondary_records(path.read_text(encoding="utf-8"))
            update["hybrid"] = self.hybrid.model_copy(update={"secondary": records})
        return self.model_copy(update=update) if update else self


def _resolve(base: Path, value: str, what: str) -> Path:
    path = Path(value)
    if not path.is_absolute():
        path = base / path
    if not path.exists():
        raise ConfigError(f"{what} file does not exist: {path}")
    return path


def config_from_mapping(mapping: dict) -> EngineConfig:
    try:
        return EngineConfig.model_validate(mapping)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> EngineConfig:
    """Read a YAML (or JSON: YAML superset) config document."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        mapping = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if mapping is None:
        mapping = {}
    if not isinstance(mapping, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return config_from_mapping(mapping)
