"""Provenance sidecars written next to every run artifact."""
from __future__ import annotations

import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from pydantic import BaseModel, Field

from . import __version__
from .data import file_sha256, read_json, write_json

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.json"


class RunManifest(BaseModel):
    artifact: str
    command: str
    engine_version: str = __version__
    config: Dict[str, Any] = Field(default_factory=dict)
    input_hashes: Dict[str, str] = Field(default_factory=dict)
    artifact_sha256: Optional[str] = None
    started_at: str
    finished_at: str


def manifest_path(artifact: Path) -> Path:
    artifact = Path(artifact)
    return artifact.with_name(artifact.name + MANIFEST_SUFFIX)


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def hash_inputs(inputs: Mapping[str, Optional[Path]]) -> Dict[str, str]:
    return {name: file_sha256(path) for name, path in sorted(inputs.items()) if path is not None and Path(path).exists()}


def write_manifest(
    artifact: Path,
    *,
    command: str,
    config: Mapping[str, Any],
    inputs: Mapping[str, Optional[Path]],
    started_at: str,
) -> Path:
    artifact = Path(artifact)
    manifest = RunManifest(
        artifact=artifact.name,
        command=command,
        config=dict(config),
        input_hashes=hash_inputs(inputs),
        artifact_sha256=file_sha256(artifact) if artifact.is_file() else None,
        started_at=started_at,
        finished_at=utc_now(),
    )
    return write_json(manifest_path(artifact), manifest.model_dump(mode="json"))


def read_manifest(artifact: Path) -> Optional[RunManifest]:
    path = manifest_path(artifact)
    if not path.exists():
        logger.warning("No manifest next to %s", artifact)
        return None
    return RunManifest.model_validate(read_json(path))


__all__ = ["MANIFEST_SUFFIX", "RunManifest", "hash_inputs", "manifest_path", "read_manifest", "utc_now", "write_manifest"]
