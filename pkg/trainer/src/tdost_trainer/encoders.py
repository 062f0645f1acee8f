"""Sentence encoders and the binary matrix interchange format.

The hash encoder must be bit-compatible with the exporter's: same FNV-1a
walk, same splitmix finalizer, same bucket/sign rule, so a matrix built
here scores identically to one built there. Real pre-trained encoders are
optional imports; everything else in this package runs without them.

Matrix files: magic ``TDEM``, uint32 dimension, uint32 row count, then
row-major float32 little-endian, one row per trigger sentence in dataset
order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .data import DatasetError, Window

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
    h = (_FNV_OFFSET ^ _splitmix64(seed & _MASK)) & _MASK
    for byte in token.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return _splitmix64(h)


def embed_hash(sentence: str, dimension: int = DEFAULT_DIMENSION,
               seed: int = DEFAULT_SEED) -> np.ndarray:
    tokens = sentence.lower().split()
    if not tokens:
        raise ValueError("cannot embed an empty sentence")
    vec = np.zeros(dimension, dtype=np.float64)
    for token in tokens:
        h = token_hash(token, seed)
        bucket = h % dimension
        vec[bucket] += 1.0 if (h >> 63) == 0 else -1.0
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        for token in tokens:
            vec[token_hash(token, seed) % dimension] += 1.0
        norm = float(np.linalg.norm(vec))
    return vec / norm


class HashEncoder:
    """Deterministic bag-of-words projection; no weights, no downloads."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION, seed: int = DEFAULT_SEED):
        if dimension < 2:
            raise ValueError("dimension must be at least 2")
        self.dimension = dimension
        self.seed = seed
        self.name = "hash"

    def encode(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dimension), dtype=np.float64)
        return np.stack([embed_hash(t, self.dimension, self.seed) for t in texts])


class SentenceTransformerEncoder:
    """Frozen pre-trained encoder; needs sentence-transformers and weights."""

    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise DatasetError(
                f"encoder {model_name!r} needs the sentence-transformers "
                f"package (install the 'encoders' extra)"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise DatasetError(
                f"could not load encoder weights for {model_name!r}: {exc}"
            ) from exc
        self._model.eval()
        self.dimension = int(self._model.get_sentence_embedding_dimension())
        self.name = model_name

    def encode(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dimension), dtype=np.float64)
        out = self._model.encode(
            texts, convert_to_numpy=True, normalize_embeddings=True,
            show_progress_bar=False,
        )
        return np.asarray(out, dtype=np.float64)


PRETRAINED_NAMES = {
    "all-distilroberta-v1": "sentence-transformers/all-distilroberta-v1",
    "sentence-t5": "sentence-transformers/sentence-t5-base",
}


def make_encoder(name: str, dimension: int = DEFAULT_DIMENSION,
                 seed: int = DEFAULT_SEED):
    if name == "hash":
        return HashEncoder(dimension=dimension, seed=seed)
    if name in PRETRAINED_NAMES:
        return SentenceTransformerEncoder(PRETRAINED_NAMES[name])
    supported = ["hash", *sorted(PRETRAINED_NAMES)]
    raise DatasetError(f"unknown encoder {name!r}, supported: {supported}")


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    array = np.ascontiguousarray(matrix, dtype="<f4")
    if array.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    rows, dimension = array.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", dimension, rows))
        fh.write(array.tobytes(order="C"))


def read_matrix(path: str | Path) -> np.ndarray:
    blob = Path(path).read_bytes()
    header = struct.calcsize("<4sII")
    if len(blob) < header:
        raise DatasetError("matrix file too short for its header")
    magic, dimension, rows = struct.unpack_from("<4sII", blob)
    if magic != MAGIC:
        raise DatasetError(f"bad matrix magic {magic!r}")
    if len(blob) != header + rows * dimension * 4:
        raise DatasetError("matrix payload does not match its header")
    data = np.frombuffer(blob, dtype="<f4", offset=header)
    return data.reshape(rows, dimension).astype(np.float64)


def encode_windows(windows: list[Window], encoder) -> list[np.ndarray]:
    """Per-window trigger matrices, float32, ready for batching."""
    out = []
    for window in windows:
        matrix = encoder.encode(list(window.texts))
        if matrix.shape != (len(window.texts), encoder.dimension):
            raise DatasetError(
                f"encoder returned {matrix.shape} for window {window.window_id}"
            )
        out.append(matrix.astype(np.float32))
    return out


def encode_dataset(windows: list[Window], encoder, out_path: str | Path) -> np.ndarray:
    """One flat matrix over every trigger in dataset order, written to disk."""
    texts = [t for w in windows for t in w.texts]
    matrix = encoder.encode(texts)
    write_matrix(out_path, matrix)
    return matrix
