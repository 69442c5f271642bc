"""Self-describing JSON run records shared by every command."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Optional, Union

from . import __version__
from .certs import FixtureSummary
from .defperf import DPWitness
from .oracle import SieveResult
from .search import SearchReport

__all__ = ["SCHEMA_VERSION", "RunRecord", "dumps", "loads", "default_timestamp"]

SCHEMA_VERSION = 1

Payload = Union[SearchReport, SieveResult, FixtureSummary, DPWitness, None]

_KINDS = {
    "search_report": SearchReport,
    "sieve_result": SieveResult,
    "fact_summary": FixtureSummary,
    "witness": DPWitness,
}


def _kind_of(payload: Payload) -> str:
    for name, cls in _KINDS.items():
        if isinstance(payload, cls):
            return name
    if payload is None:
        return "witness"
    raise TypeError(f"unsupported payload {type(payload).__name__}")


def default_timestamp() -> Optional[str]:
    """UTC time from SOURCE_DATE_EPOCH, else None.

    Wall-clock time is left out by default so that repeated runs are
    byte-identical.
    """
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if not epoch:
        return None
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()


@dataclass
class RunRecord:
    command: list[str]
    config: dict
    payload: Payload
    exit_status: int
    message: Optional[str] = None
    timestamp: Optional[str] = None
    engine_version: str = __version__
    payload_type: Optional[str] = None

    def __post_init__(self) -> None:
        if self.payload_type is None:
            self.payload_type = _kind_of(self.payload)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": list(self.command),
            "config": self.config,
            "timestamp": self.timestamp,
            "engine_version": self.engine_version,
            "payload_type": self.payload_type,
            "payload": None if self.payload is None else self.payload.to_dict(),
            "message": self.message,
            "exit_status": self.exit_status,
        }

    @classmethod
    def from_dict(cls, data: dict) -> RunRecord:
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {data.get('schema_version')!r}")
        kind = data["payload_type"]
        if kind not in _KINDS:
            raise ValueError(f"unknown payload_type {kind!r}")
        raw = data["payload"]
        payload = None if raw is None else _KINDS[kind].from_dict(raw)
        return cls(
            command=list(data["command"]),
            config=data["config"],
            payload=payload,
            exit_status=data["exit_status"],
            message=data["message"],
            timestamp=data["timestamp"],
            engine_version=data["engine_version"],
            payload_type=kind,
        )


def dumps(record: RunRecord) -> str:
    return json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n"


def loads(text: str) -> RunRecord:
    return RunRecord.from_dict(json.loads(text))
