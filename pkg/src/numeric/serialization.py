"""AMMT tensor encoding and checkpoint files.

Layout of one tensor: magic ``AMMT`` (4 bytes), rank as little-endian u32,
rank x u32 dims, then the values as little-endian float32.
A checkpoint is a blob of tensors written back to back plus a JSON index
mapping each parameter name to its byte offset and shape.
"""
import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from .errors import FormatError

MAGIC = b"AMMT"
_U32 = np.dtype("<u4")
_F32 = np.dtype("<f4")

PathLike = Union[str, Path]


def encode_tensor(array: np.ndarray) -> bytes:
    array = np.asarray(array)
    header = np.array([array.ndim, *array.shape], dtype=_U32).tobytes()
    return MAGIC + header + np.ascontiguousarray(array, dtype=_F32).tobytes()


def decode_tensor(buffer: bytes, offset: int = 0, path: Optional[str] = None) -> Tuple[np.ndarray, int]:
    """
    Decode one tensor starting at ``offset``.

    Returns:
        The float32 array and the offset just past it

    Raises:
        FormatError: naming the file and the byte offset of the defect
    """
    if buffer[offset:offset + 4] != MAGIC:
        raise FormatError(f"bad magic {buffer[offset:offset + 4]!r}, expected {MAGIC!r}", path, offset)
    pos = offset + 4
    if len(buffer) < pos + 4:
        raise FormatError("truncated rank field", path, pos)
    rank = int(np.frombuffer(buffer, dtype=_U32, count=1, offset=pos)[0])
    pos += 4
    if len(buffer) < pos + 4 * rank:
        raise FormatError(f"truncated dims for rank {rank}", path, pos)
    dims = tuple(int(d) for d in np.frombuffer(buffer, dtype=_U32, count=rank, offset=pos))
    pos += 4 * rank
    if any(d == 0 for d in dims):
        raise FormatError(f"zero-sized dimension in {dims}", path, offset + 8)
    count = int(np.prod(dims)) if dims else 1
    end = pos + 4 * count
    if len(buffer) < end:
        raise FormatError(f"truncated payload: need {4 * count} bytes, have {len(buffer) - pos}", path, pos)
    data = np.frombuffer(buffer, dtype=_F32, count=count, offset=pos).reshape(dims)
    return data.astype(np.float32), end


def save_tensor(path: PathLike, array: np.ndarray) -> None:
    Path(path).write_bytes(encode_tensor(array))


def load_tensor(path: PathLike) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FormatError("tensor file not found", str(path))
    buffer = path.read_bytes()
    data, end = decode_tensor(buffer, 0, str(path))
    if end != len(buffer):
        raise FormatError(f"{len(buffer) - end} trailing bytes after tensor", str(path), end)
    return data


def save_checkpoint(
    blob_path: PathLike,
    state: Dict[str, np.ndarray],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Write named tensors to ``blob_path`` and the index next to it (same stem, .json).

    Returns:
        Path of the JSON index
    """
    blob_path = Path(blob_path)
    index: Dict[str, Any] = {"blob": blob_path.name, "tensors": {}, "metadata": metadata or {}}
    chunks = []
    offset = 0
    for name in sorted(state):
        encoded = encode_tensor(state[name])
        index["tensors"][name] = {"offset": offset, "shape": list(np.shape(state[name]))}
        chunks.append(encoded)
        offset += len(encoded)
    blob_path.write_bytes(b"".join(chunks))
    index_path = blob_path.with_suffix(".json")
    index_path.write_text(json.dumps(index, indent=2, sort_keys=True))
    return index_path


def load_checkpoint(index_path: PathLike) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    """Read a checkpoint index and its blob; returns (state, metadata)."""
    index_path = Path(index_path)
    try:
        index = json.loads(index_path.read_text())
    except FileNotFoundError:
        raise FormatError("checkpoint index not found", str(index_path))
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid checkpoint index JSON: {e.msg}", str(index_path), e.pos)
    if not isinstance(index, dict) or "tensors" not in index or "blob" not in index:
        raise FormatError("checkpoint index lacks 'blob' or 'tensors'", str(index_path))
    blob_path = index_path.parent / index["blob"]
    if not blob_path.exists():
        raise FormatError("checkpoint blob not found", str(blob_path))
    buffer = blob_path.read_bytes()
    state: Dict[str, np.ndarray] = {}
    for name, entry in index["tensors"].items():
        data, _ = decode_tensor(buffer, int(entry["offset"]), str(blob_path))
        if list(data.shape) != list(entry["shape"]):
            raise FormatError(
                f"tensor '{name}' has shape {list(data.shape)}, index says {entry['shape']}",
                str(blob_path), int(entry["offset"]),
            )
        state[name] = data
    return state, index.get("metadata", {})
