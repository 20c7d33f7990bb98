"""Process configuration: one model, one device, fixed caps."""

from pydantic import BaseModel, ConfigDict, Field


class ServiceConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, protected_namespaces=())

    model: str = Field(min_length=1, description="Model id or local checkpoint path.")
    device: str = "cpu"
    max_top_k: int = Field(default=200, ge=1)
    host: str = "127.0.0.1"
    port: int = Field(default=8000, ge=0, le=65535)
    max_concurrency: int = Field(default=4, ge=1)
