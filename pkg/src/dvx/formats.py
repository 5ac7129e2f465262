"""Binary corpus file formats.

Embedding file (``.dvxe``): magic ``DVXE`` (4 ASCII bytes), little-endian
u32 version (=1), u32 n, u32 d, then n*d IEEE-754 f32 values, row-major.

Relevance file (``.dvxr``): magic ``DVXR``, same header with d fixed to 1,
payload of n f32 scores.

The payload length must equal n*d*4 exactly; shorter payloads raise
``TRUNCATED_PAYLOAD``, anything else malformed raises ``FORMAT_ERROR``.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DvxError

EMBEDDING_MAGIC = b"DVXE"
RELEVANCE_MAGIC = b"DVXR"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sIII")


class FileHeader(NamedTuple):
    version: int
    n: int
    d: int
    magic: str


def _parse_header(raw: bytes, path: Path) -> FileHeader:
    if len(raw) < _HEADER.size:
        raise DvxError("FORMAT_ERROR", f"{path}: file shorter than header")
    magic, version, n, d = _HEADER.unpack_from(raw)
    if magic not in (EMBEDDING_MAGIC, RELEVANCE_MAGIC):
        raise DvxError("FORMAT_ERROR", f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise DvxError("FORMAT_ERROR", f"{path}: unsupported version {version}")
    if magic == RELEVANCE_MAGIC and d != 1:
        raise DvxError("FORMAT_ERROR", f"{path}: relevance file must have d=1, got {d}")
    return FileHeader(version=version, n=n, d=d, magic=magic.decode("ascii"))


def validate_embedding_file(path: str | Path) -> FileHeader:
    """Parse and check a DVXE/DVXR file, returning its header summary.

    Verifies magic, version, and that the payload is exactly n*d*4 bytes.
    """
    path = Path(path)
    raw = path.read_bytes()
    header = _parse_header(raw, path)
    expected = header.n * header.d * 4
    payload = len(raw) - _HEADER.size
    if payload < expected:
        raise DvxError(
            "TRUNCATED_PAYLOAD",
            f"{path}: payload has {payload} bytes, header promises {expected}",
        )
    if payload > expected:
        raise DvxError(
            "FORMAT_ERROR",
            f"{path}: {payload - expected} trailing bytes after payload",
        )
    return header


def write_embeddings(path: str | Path, matrix: np.ndarray) -> None:
    """Write an n x d float matrix as a DVXE file (values stored as f32)."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise DvxError("FORMAT_ERROR", f"expected 2-D matrix, got shape {matrix.shape}")
    n, d = matrix.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(EMBEDDING_MAGIC, FORMAT_VERSION, n, d))
        fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def read_embeddings(path: str | Path) -> np.ndarray:
    """Read a DVXE file into an n x d float32 array."""
    path = Path(path)
    header = validate_embedding_file(path)
    if header.magic != "DVXE":
        raise DvxError("FORMAT_ERROR", f"{path}: expected DVXE magic, got {header.magic}")
    raw = path.read_bytes()[_HEADER.size :]
    return np.frombuffer(raw, dtype="<f4").reshape(header.n, header.d).copy()


def write_relevance(path: str | Path, scores: np.ndarray) -> None:
    """Write n scores as a DVXR file (values stored as f32)."""
    scores = np.asarray(scores).reshape(-1)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(RELEVANCE_MAGIC, FORMAT_VERSION, scores.size, 1))
        fh.write(np.ascontiguousarray(scores, dtype="<f4").tobytes())


def read_relevance(path: str | Path) -> np.ndarray:
    """Read a DVXR file into a length-n float32 array."""
    path = Path(path)
    header = validate_embedding_file(path)
    if header.magic != "DVXR":
        raise DvxError("FORMAT_ERROR", f"{path}: expected DVXR magic, got {header.magic}")
    raw = path.read_bytes()[_HEADER.size :]
    return np.frombuffer(raw, dtype="<f4").copy()
