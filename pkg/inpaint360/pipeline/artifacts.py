"""
Run directory layout and content-hash stage manifests.

Every stage writes ``<out>/<stage>/stage_manifest.json`` holding a
fingerprint of (stage, config section, seed, input artifact hashes) and
the sha256 of every file it produced. A stage whose fingerprint matches and
whose outputs still hash the same is up to date and can be skipped.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional

from inpaint360.documents import dumps, read_json, write_json
from inpaint360.errors import MissingInput

MANIFEST_NAME = "stage_manifest.json"
MANIFEST_VERSION = 1


def hash_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def hash_document(document: Any) -> str:
    return hashlib.sha256(dumps(document)).hexdigest()


@dataclass(frozen=True)
class RunLayout:
    root: Path

    def stage_dir(self, stage: str) -> Path:
        return self.root / stage

    def manifest_path(self, stage: str) -> Path:
        return self.stage_dir(stage) / MANIFEST_NAME

    @property
    def run_manifest(self) -> Path:
        return self.root / "run.json"

    @property
    def log_file(self) -> Path:
        return self.root / "logs" / "run.jsonl"

    @property
    def cache_dir(self) -> Path:
        """Artifacts kept across stage re-runs, keyed by their own fingerprints."""
        return self.root / "cache"

    def relative(self, path: Path) -> str:
        return Path(path).relative_to(self.root).as_posix()


def collect_outputs(layout: RunLayout, stage: str) -> dict[str, str]:
    """sha256 of every file under the stage directory except the manifest itself."""
    directory = layout.stage_dir(stage)
    outputs = {}
    for path in sorted(p for p in directory.rglob("*") if p.is_file() and p.name != MANIFEST_NAME):
        outputs[layout.relative(path)] = hash_file(path)
    return outputs


def stage_outputs(layout: RunLayout, stage: str) -> dict[str, str]:
    """Recorded outputs of a finished upstream stage; ``MissingInput`` if it never completed."""
    path = layout.manifest_path(stage)
    if not path.exists():
        raise MissingInput(f"{stage}/{MANIFEST_NAME}", f"stage '{stage}' has not completed")
    return read_json(path)["outputs"]


def fingerprint(stage: str, config_section: Any, seed: int, input_hashes: dict[str, str]) -> str:
    return hash_document({"stage": stage, "config": config_section, "seed": seed, "inputs": input_hashes})


def is_up_to_date(layout: RunLayout, stage: str, stage_fingerprint: str) -> bool:
    path = layout.manifest_path(stage)
    if not path.exists():
        return False
    manifest = read_json(path)
    if manifest.get("version") != MANIFEST_VERSION or manifest.get("fingerprint") != stage_fingerprint:
        return False
    for relative, digest in manifest["outputs"].items():
        file = layout.root / relative
        if not file.exists() or hash_file(file) != digest:
            return False
    return True


def write_stage_manifest(
    layout: RunLayout,
    stage: str,
    stage_fingerprint: str,
    seed: int,
    inputs: dict[str, str],
    extra: Optional[dict] = None,
) -> dict:
    manifest = {
        "version": MANIFEST_VERSION,
        "stage": stage,
        "fingerprint": stage_fingerprint,
        "seed": seed,
        "inputs": inputs,
        "outputs": collect_outputs(layout, stage),
    }
    if extra:
        manifest.update(extra)
    write_json(layout.manifest_path(stage), manifest)
    return manifest


def gather_inputs(layout: RunLayout, upstream: Iterable[str]) -> dict[str, str]:
    inputs = {}
    for stage in upstream:
        inputs.update(stage_outputs(layout, stage))
    return dict(sorted(inputs.items()))


def require(path: Path, detail: str = "") -> Path:
    if not Path(path).exists():
        raise MissingInput(str(path), detail)
    return Path(path)
