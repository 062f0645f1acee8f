"""Sentence embeddings: a deterministic hash embedder plus a matrix-file
interchange format for plugging in external encoders.

The hash embedder is not a semantic model; it is a stable bag-of-words
projection good enough to expose vocabulary overlap, used wherever tests
and offline runs need embeddings without model weights. External encoders
hand their output over as a binary matrix file (magic ``TDEM``, uint32
dimension, uint32 row count, row-major float32 little-endian payload) with
one row per trigger sentence.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError

MAGIC = b"TDEM"
DEFAULT_DIMENSION = 256
DEFAULT_SEED = 0

_MASK = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def token_hash(token: str, seed: int) -> int:
    """Stable 64-bit hash of a token, independent of process or platform."""
    h = (_FNV_OFFSET ^ _splitmix64(seed & _MASK)) & _MASK
    for byte in token.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return _splitmix64(h)


@dataclass(frozen=True, slots=True)
class EmbeddingSpec:
    kind: str = "hash"  # "hash" | "external"
    dimension: int = DEFAULT_DIMENSION
    seed: int = DEFAULT_SEED
    matrix_path: str | None = None

    def __post_init__(self):
        if self.kind not in ("hash", "external"):
            raise ValueError(f"unknown embedding kind {self.kind!r}")
        if self.dimension < 2:
            raise ValueError("dimension must be at least 2")
        if self.kind == "external" and not self.matrix_path:
            raise ValueError("external embeddings need a matrix_path")


def embed_hash(sentence: str, dimension: int = DEFAULT_DIMENSION,
               seed: int = DEFAULT_SEED) -> np.ndarray:
    """Unit-norm signed bag-of-words hash embedding of one sentence."""
    tokens = sentence.lower().split()
    if not tokens:
        raise ValueError("cannot embed an empty sentence")
    vec = np.zeros(dimension, dtype=np.float64)
    for token in tokens:
        h = token_hash(token, seed)
        bucket = h % dimension
        sign = 1.0 if (h >> 63) == 0 else -1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # Signed counts can cancel; fall back to unsigned counts.
        for token in tokens:
            vec[token_hash(token, seed) % dimension] += 1.0
        norm = float(np.linalg.norm(vec))
    return vec / norm


def embed_sentences(sentences: list[str], spec: EmbeddingSpec) -> np.ndarray:
    """Embed sentences row-wise according to the spec."""
    if spec.kind == "external":
        raise ValueError("external embeddings are read from a matrix file")
    if not sentences:
        return np.zeros((0, spec.dimension), dtype=np.float64)
    return np.stack([embed_hash(s, spec.dimension, spec.seed) for s in sentences])


def write_matrix(path, matrix: np.ndarray) -> None:
    array = np.ascontiguousarray(matrix, dtype="<f4")
    if array.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    rows, dimension = array.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", dimension, rows))
        fh.write(array.tobytes(order="C"))


def read_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    header = struct.calcsize("<4sII")
    if len(blob) < header:
        raise DataError("matrix file too short for its header")
    magic, dimension, rows = struct.unpack_from("<4sII", blob)
    if magic != MAGIC:
        raise DataError(f"bad matrix magic {magic!r}")
    expected = header + rows * dimension * 4
    if len(blob) != expected:
        raise DataError(
            f"matrix payload is {len(blob) - header} bytes, "
            f"expected {expected - header}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=header)
    return data.reshape(rows, dimension).astype(np.float64)
