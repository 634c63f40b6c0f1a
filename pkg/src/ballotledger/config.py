"""Service configuration, loadable from a JSON file (BALLOTLEDGER_CONFIG)."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError

ENV_CONFIG = "BALLOTLEDGER_CONFIG"
DEFAULT_LISTEN = "127.0.0.1:8732"


@dataclass
class ServiceConfig:
    listen_address: str = DEFAULT_LISTEN
    group: str = "rfc5114-2048-256"
    rounds: int = 2
    challenge_bits: int = 128
    seal_max_txs: int = 16
    seal_interval_s: float = 2.0
    schedule_path: Optional[str] = None
    data_dir: Optional[str] = None

    def __post_init__(self):
        if self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if self.seal_max_txs < 1:
            raise ConfigError("seal_max_txs must be >= 1")
        if self.challenge_bits < 1:
            raise ConfigError("challenge_bits must be >= 1")

    @property
    def host(self) -> str:
        return self.listen_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        try:
            return int(self.listen_address.rsplit(":", 1)[1])
        except (IndexError, ValueError):
            raise ConfigError(f"bad listen address {self.listen_address!r}") from None

    @classmethod
    def from_file(cls, path: str) -> "ServiceConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        path = os.environ.get(ENV_CONFIG)
        return cls.from_file(path) if path else cls()
