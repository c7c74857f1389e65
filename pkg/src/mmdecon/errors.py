"""Exception taxonomy shared across the pipeline.

Every anticipated failure raises an EngineError subclass carrying a stable
machine-readable payload; the CLI turns these into JSON on stderr and exit
code 2. Anything else escaping to the top level is a bug.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for anticipated, user-facing failures."""

    def __init__(self, message: str, **detail):
        super().__init__(message)
        self.detail = {k: v for k, v in detail.items() if v is not None}

    def to_json(self) -> dict:
        payload = {"type": type(self).__name__, "message": str(self)}
        if self.detail:
            payload["detail"] = self.detail
        return payload


class CorpusError(EngineError):
    """Corpus-level schema or identity violation (duplicate id, bad split, ...)."""


class ConfigError(EngineError):
    """Invalid engine configuration or policy."""


class StoreFormatError(EngineError):
    """Embedding store file or manifest violates the binary format contract."""
