"""
Run manifests: config echo plus content hashes of every input
"""

import logging
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Union

from packages.core.hashing import file_hash
from packages.core.models import RunManifest

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"


def package_version() -> str:
    try:
        return version("spillover")
    except PackageNotFoundError:
        return "0.0.0+local"


def build_manifest(
    command: str,
    config: Optional[Mapping[str, Any]] = None,
    inputs: Iterable[Union[str, Path]] = (),
    outputs: Sequence[Union[str, Path]] = (),
    notes: Sequence[str] = (),
) -> RunManifest:
    hashes: Dict[str, str] = {}
    for path in inputs:
        path = Path(path)
        if path.is_file():
            hashes[str(path)] = file_hash(path)
        elif path.is_dir():
            for child in sorted(p for p in path.iterdir() if p.is_file()):
                hashes[str(child)] = file_hash(child)
    return RunManifest(
        command=command,
        package_version=package_version(),
        config=dict(config or {}),
        inputs=hashes,
        outputs=[str(p) for p in outputs],
        notes=list(notes),
    )


def write_manifest(manifest: RunManifest, out_dir: Union[str, Path]) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / MANIFEST_FILE
    path.write_text(manifest.model_dump_json(indent=2))
    logger.info(f"Wrote run manifest {path}")
    return path
