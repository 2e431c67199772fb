"""Run manifests: immutable records tying outputs to seeds and checksums."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command: str, task: str | None, seed: int, settings: dict, artifacts) -> Path:
    """Write manifest.json listing every artifact with its checksum.

    Manifests are immutable: writing into a directory that already has one is
    an error, which keeps finished runs from being silently overwritten.
    """
    out = Path(out_dir)
    path = out / "manifest.json"
    if path.exists():
        raise FileExistsError(f"{path} already exists; refusing to overwrite a finished run")
    entries = {}
    for artifact in artifacts:
        p = Path(artifact)
        entries[str(p.relative_to(out))] = _sha256(p)
    payload = {
        "command": command,
        "task": task,
        "seed": seed,
        "settings": settings,
        "artifacts": entries,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def read_manifest(out_dir) -> dict:
    return json.loads((Path(out_dir) / "manifest.json").read_text())
