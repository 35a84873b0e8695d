"""Content-hash-guarded pipeline workspace: one directory per stage, each with
a manifest recording its configuration and input digests so reruns with
unchanged inputs are no-ops and outputs are reproducible byte for byte."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Callable, Mapping, Sequence

MANIFEST = "manifest.json"


class WorkspaceError(RuntimeError):
    pass


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def fmt_value(v: object) -> str:
    """Deterministic CSV cell rendering; floats use shortest round-trip form."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt_value(v) for v in row) + "\n")


def require_artifact(workspace: Path, stage: str, filename: str, command: str) -> Path:
    path = workspace / stage / filename
    if not path.exists():
        raise WorkspaceError(
            f"missing artifact {stage}/{filename}: run `commtraj {command}` first"
        )
    return path


def _config_key(config: Mapping) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def run_stage(
    workspace: Path,
    stage: str,
    config: Mapping,
    inputs: Sequence[Path],
    build: Callable[[Path], None],
    force: bool = False,
) -> bool:
    """Run ``build`` into the stage directory unless an identical run is
    already recorded there. Returns True when work was (re)done."""
    stage_dir = workspace / stage
    manifest_path = stage_dir / MANIFEST
    input_digests = {p.name: sha256_file(p) for p in inputs}
    key = {"stage": stage, "config": _config_key(config), "inputs": input_digests}
    if not force and manifest_path.exists():
        try:
            recorded = json.loads(manifest_path.read_text())
        except json.JSONDecodeError:
            recorded = None
        if recorded and all(recorded.get(k) == v for k, v in key.items()):
            outputs = recorded.get("outputs", {})
            if all((stage_dir / name).exists() for name in outputs):
                return False
    stage_dir.mkdir(parents=True, exist_ok=True)
    for old in stage_dir.iterdir():
        if old.name != MANIFEST and old.is_file():
            old.unlink()
    build(stage_dir)
    outputs = {
        p.name: sha256_file(p)
        for p in sorted(stage_dir.iterdir())
        if p.is_file() and p.name != MANIFEST
    }
    manifest = dict(key)
    manifest["outputs"] = outputs
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return True
