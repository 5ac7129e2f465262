"""Writers for the binary corpus wire format.

Layout (little-endian): 4 ASCII magic bytes ("DVXE" for embeddings,
"DVXR" for relevance), u32 version (=1), u32 n, u32 d, then n*d f32
values row-major. Relevance files fix d to 1.
"""

from __future__ import annotations

import struct

import numpy as np

_HEADER = struct.Struct("<4sIII")
VERSION = 1


def write_embeddings(path, matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix)
    n, d = matrix.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"DVXE", VERSION, n, d))
        fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def write_relevance(path, scores: np.ndarray) -> None:
    scores = np.asarray(scores).reshape(-1)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"DVXR", VERSION, scores.size, 1))
        fh.write(np.ascontiguousarray(scores, dtype="<f4").tobytes())
