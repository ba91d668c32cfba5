"""Helper utilities and common functions."""
import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np


def ensure_directory(path: Path) -> None:
    """
    Ensure a directory exists, creating it if necessary.

    Args:
        path: Directory path to ensure exists
    """
    path.mkdir(parents=True, exist_ok=True)


def _to_builtin(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_builtin(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def to_json(payload: Any) -> str:
    """
    Serialize to JSON with sorted keys, so equal payloads give equal bytes.

    numpy scalars and arrays are converted to Python builtins.
    """
    return json.dumps(_to_builtin(payload), indent=2, sort_keys=True) + "\n"


def write_json(path: Path, payload: Any) -> Path:
    """Write ``payload`` as deterministic JSON, creating parent directories."""
    path = Path(path)
    ensure_directory(path.parent)
    path.write_text(to_json(payload))
    return path


def write_jsonl(path: Path, records: Iterable[Any]) -> Path:
    """Write one compact JSON object per line."""
    path = Path(path)
    ensure_directory(path.parent)
    lines = [json.dumps(_to_builtin(r), sort_keys=True) for r in records]
    path.write_text("".join(line + "\n" for line in lines))
    return path


def directory_digest(path: Path) -> str:
    """SHA-256 over the relative names and bytes of every file below ``path``."""
    digest = hashlib.sha256()
    root = Path(path)
    for file in sorted(p for p in root.rglob("*") if p.is_file()):
        digest.update(file.relative_to(root).as_posix().encode())
        digest.update(file.read_bytes())
    return digest.hexdigest()
