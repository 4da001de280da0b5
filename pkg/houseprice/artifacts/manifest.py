import hashlib
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Union

from houseprice.artifacts.keys import MANIFEST_FILE, TOOL_VERSION
from houseprice.errors import LoadError

logger = logging.getLogger(__name__)


def file_digest(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as handle:
            for block in iter(lambda: handle.read(1 << 16), b""):
                digest.update(block)
    except OSError as e:
        raise LoadError(f"cannot read {path}: {str(e)}")
    return digest.hexdigest()


def input_digests(paths: Iterable[Union[str, Path]]) -> dict[str, str]:
    """SHA-256 per input file, keyed by path; directories contribute every file inside."""
    digests: dict[str, str] = {}
    for path in paths:
        path = Path(path)
        files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
        for file in files:
            digests[str(file)] = file_digest(file)
    return digests


def canonical_json(document: Any) -> str:
    return json.dumps(document, sort_keys=True, indent=2, default=str) + "\n"


def manifest_digest(manifest: dict[str, Any]) -> str:
    stable = {key: value for key, value in manifest.items() if key not in ("timestamp", "digest")}
    return hashlib.sha256(canonical_json(stable).encode("utf-8")).hexdigest()


def build_manifest(
    command: str,
    seed: int,
    inputs: Iterable[Union[str, Path]],
    outputs: Iterable[Union[str, Path]],
    settings: dict[str, Any],
) -> dict[str, Any]:
    manifest = {
        "command": command,
        "version": TOOL_VERSION,
        "seed": seed,
        "inputs": input_digests(inputs),
        "outputs": sorted(str(p) for p in outputs),
        "settings": settings,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    manifest["digest"] = manifest_digest(manifest)
    return manifest


def write_manifest(out_dir: Union[str, Path], manifest: dict[str, Any]) -> Path:
    path = Path(out_dir) / MANIFEST_FILE.format(command=manifest["command"])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(canonical_json(manifest), encoding="utf-8")
    except OSError as e:
        raise LoadError(f"cannot write manifest {path}: {str(e)}")
    logger.info(f"Wrote manifest {path} (digest {manifest['digest'][:12]})")
    return path


def write_json(document: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(canonical_json(document), encoding="utf-8")
    except OSError as e:
        raise LoadError(f"cannot write {path}: {str(e)}")
    return path
