"""Process configuration: bind address, data directory, provider settings."""

from __future__ import annotations

import os
from pathlib import Path

from pydantic import BaseModel, Field

from .providers import ProviderSettings

DEFAULT_PORT = 8700


class AppConfig(BaseModel):
    data_dir: Path = Path("./dreamloom-data")
    bind_host: str = "127.0.0.1"
    bind_port: int = DEFAULT_PORT
    templates_path: Path | None = None
    cors_origin: str = "*"
    provider: ProviderSettings = Field(default_factory=ProviderSettings)

    @classmethod
    def from_env(cls, **overrides) -> "AppConfig":
        values: dict = {"provider": ProviderSettings.from_env()}
        if os.environ.get("MM_DATA_DIR"):
            values["data_dir"] = Path(os.environ["MM_DATA_DIR"])
        if os.environ.get("MM_CORS_ORIGIN"):
            values["cors_origin"] = os.environ["MM_CORS_ORIGIN"]
        provider_overrides = overrides.pop("provider_overrides", None)
        if provider_overrides:
            values["provider"] = values["provider"].model_copy(update=provider_overrides)
        values.update(overrides)
        return cls(**values)


def parse_bind(bind: str) -> tuple[str, int]:
    """Split a host:port flag; a bare port keeps the default host."""
    if ":" in bind:
        host, _, port = bind.rpartition(":")
        return host or "127.0.0.1", int(port)
    return bind, DEFAULT_PORT
