"""
reports.py — Stable CSV/JSON writers and the run manifest.

Every writer produces byte-identical files for identical content: CSVs use
"\n" line endings and no index, JSON uses sorted keys and a trailing newline.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import pandas as pd

from config import TOOL_VERSION

logger = logging.getLogger(__name__)


def write_csv(df: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator="\n")
    logger.debug("Wrote %s (%d rows)", path, len(df))
    return path


def write_json(data, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def to_json_text(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def file_digest(path) -> str:
    """sha256 of a file's bytes, as 'sha256:<hex>'."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return f"sha256:{h.hexdigest()}"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """What a run read, how it was configured, and the digest of everything it wrote."""

    command: str
    config: dict = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    tool_version: str = TOOL_VERSION
    started_at: str = field(default_factory=_now)
    finished_at: str | None = None

    def add_input(self, path) -> None:
        self.inputs[Path(path).name] = file_digest(path)

    def add_output(self, path) -> None:
        self.outputs[Path(path).name] = file_digest(path)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "tool_version": self.tool_version,
            "config": self.config,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": dict(sorted(self.outputs.items())),
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    def write(self, path) -> Path:
        self.finished_at = _now()
        return write_json(self.to_dict(), path)
