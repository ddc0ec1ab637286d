"""Run manifests: config snapshot, input digests, seed and outputs."""

from __future__ import annotations

import hashlib
from pathlib import Path

from fairgen import __version__
from fairgen.export.json_out import dump_json
from fairgen.model import RunManifest


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def build_manifest(
    command: str,
    seed: int,
    config: dict[str, str],
    inputs: list[str | Path],
    outputs: list[str] | None = None,
) -> RunManifest:
    return RunManifest(
        command=command,
        seed=seed,
        version=__version__,
        config=dict(sorted(config.items())),
        inputs={str(p): file_digest(p) for p in inputs},
        outputs=sorted(outputs or []),
    )


def manifest_to_dict(manifest: RunManifest) -> dict:
    return {
        "schema_version": "fairgen.manifest.v1",
        "command": manifest.command,
        "seed": manifest.seed,
        "version": manifest.version,
        "config": manifest.config,
        "inputs": manifest.inputs,
        "outputs": manifest.outputs,
    }


def write_manifest(manifest: RunManifest, path: str | Path) -> Path:
    dump_json(manifest_to_dict(manifest), path)
    return Path(path)
