"""JSON result documents and the persisted memo cache."""

from __future__ import annotations

import contextlib
import fcntl
import json
import os
from dataclasses import dataclass
from typing import Any

from . import __version__
from .covdeg import CoveringDegreeEngine, memo_from_nodes, memo_to_nodes

__all__ = [
    "CACHE_ENV",
    "CACHE_FORMAT",
    "CACHE_VERSION",
    "SCHEMA_VERSION",
    "CertificateDocument",
    "canonical_json",
    "load_cache",
    "locked_cache",
    "save_cache",
]

SCHEMA_VERSION = "1"
CACHE_FORMAT = "covbound-memo"
CACHE_VERSION = 1
CACHE_ENV = "COVBOUND_CACHE"


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


@dataclass(frozen=True)
class CertificateDocument:
    command: dict
    problem: dict
    result: dict
    provenance: dict
    timing_ms: float | None = None
    schema_version: str = SCHEMA_VERSION
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "command": self.command,
            "problem": self.problem,
            "result": self.result,
            "provenance": self.provenance,
            "timing_ms": self.timing_ms,
        }

    def dumps(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> CertificateDocument:
        missing = {"schema_version", "tool_version", "command", "problem", "result", "provenance"} - set(data)
        if missing:
            raise ValueError(f"document lacks {sorted(missing)}")
        return cls(
            command=data["command"],
            problem=data["problem"],
            result=data["result"],
            provenance=data["provenance"],
            timing_ms=data.get("timing_ms"),
            schema_version=str(data["schema_version"]),
            tool_version=str(data["tool_version"]),
        )

    @classmethod
    def loads(cls, text: str) -> CertificateDocument:
        return cls.from_dict(json.loads(text))


def _mode(assume_fano_floor: bool) -> str:
    return "fano" if assume_fano_floor else "strict"


@contextlib.contextmanager
def locked_cache(path: str):
    """Hold an exclusive advisory lock on ``path + '.lock'`` for the block."""
    lock_path = path + ".lock"
    with open(lock_path, "a+") as fh:
        fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh.fileno(), fcntl.LOCK_UN)


def _read(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return {}
    if not isinstance(data, dict) or data.get("format") != CACHE_FORMAT or data.get("version") != CACHE_VERSION:
        # stale or foreign caches are ignored, never migrated
        return {}
    return data


def load_cache(path: str, engine: CoveringDegreeEngine) -> int:
    """Seed ``engine`` from the cache file; returns the number of entries loaded.

    Every node is re-checked on load, and a cache with any bad node is
    ignored as a whole.
    """
    data = _read(path)
    nodes = data.get("modes", {}).get(_mode(engine.assume_fano_floor), {})
    if not nodes:
        return 0
    try:
        memo = memo_from_nodes(nodes, allow_fano=engine.assume_fano_floor)
    except (ValueError, KeyError, TypeError):
        return 0
    for p, cert in memo.items():
        engine.memo.setdefault(p, cert)
    return len(memo)


def save_cache(path: str, engine: CoveringDegreeEngine) -> None:
    data = _read(path)
    modes = data.get("modes", {})
    # the engine already holds every valid entry that was loaded
    modes[_mode(engine.assume_fano_floor)] = memo_to_nodes(engine.memo)
    out = {"format": CACHE_FORMAT, "version": CACHE_VERSION, "modes": modes}
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(out, fh, sort_keys=True, separators=(",", ":"))
    os.replace(tmp, path)
