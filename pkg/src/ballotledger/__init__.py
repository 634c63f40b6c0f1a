"""Verifiable e-voting service: zero-knowledge identity registration, a
tamper-evident hash-chained ledger, the full poll lifecycle, content-
addressed report storage, gas-style cost accounting and a load bench."""

__version__ = "0.1.0"

from .config import ServiceConfig
from .service import VotingService

__all__ = ["ServiceConfig", "VotingService", "__version__"]
