"""Sentence/comment embeddings and the vector primitives built on them.

Two providers ship with the package:

* :class:`HashProvider` -- a seeded feature-hashing bag of words. Texts that
  share tokens get correlated vectors, which is all the offline pipeline needs.
* :class:`FileProvider` -- serves vectors precomputed by an external model and
  stored in the ``EMB1`` binary format.
"""

from __future__ import annotations

import functools
import hashlib
import re
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateCentroid,
    DimMismatch,
    EmptyInput,
    EmptyText,
    ProviderMismatch,
    ZeroVector,
)

DEFAULT_DIM = 768
EMB1_MAGIC = b"EMB1"
_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)*")


@dataclass
class EmbeddingMatrix:
    """Row-per-text unit vectors stored as float32."""

    data: np.ndarray
    provider_id: str
    row_keys: list = field(default_factory=list)

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 2 or self.data.shape[1] == 0:
            raise ValueError("embedding data must be a 2-D array with dim > 0")
        if not self.row_keys:
            self.row_keys = list(range(self.data.shape[0]))
        if len(self.row_keys) != self.data.shape[0]:
            raise ValueError("row_keys length does not match number of rows")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def __len__(self):
        return self.rows

    def take(self, indices) -> "EmbeddingMatrix":
        idx = np.asarray(indices, dtype=np.intp)
        return EmbeddingMatrix(self.data[idx], self.provider_id, [self.row_keys[i] for i in idx])


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _unit_rows(mat: np.ndarray) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ZeroVector("cannot normalize a zero embedding row")
    return (mat / norms).astype(np.float32)


class EmbeddingProvider:
    """Base provider: maps a batch of texts to unit vectors of fixed ``dim``."""

    id: str = "base"
    dim: int = DEFAULT_DIM

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        raise NotImplementedError


class HashProvider(EmbeddingProvider):
    """Feature-hashing bag-of-words embedding.

    Every token lands in one of ``dim`` buckets with a +1/-1 sign, both taken
    from a keyed BLAKE2b digest so that results are identical across processes
    and platforms.
    """

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 0):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = int(dim)
        self.seed = int(seed)
        self.id = f"hash-v1:dim={self.dim}:seed={self.seed}"
        self._key = self.seed.to_bytes(8, "little", signed=False)
        self._bucket = functools.lru_cache(maxsize=1 << 16)(self._bucket_uncached)

    def _bucket_uncached(self, token: str) -> tuple[int, float]:
        h = int.from_bytes(
            hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=self._key).digest(),
            "little",
        )
        return (h >> 1) % self.dim, (1.0 if h & 1 else -1.0)

    def vector(self, text: str) -> np.ndarray:
        tokens = tokenize(text) or [text.strip().lower()]
        vec = np.zeros(self.dim, dtype=np.float64)
        for tok in tokens:
            idx, sign = self._bucket(tok)
            vec[idx] += sign
        norm = np.linalg.norm(vec)
        if norm == 0:
            # opposite-signed collisions cancelled out; fall back to the raw text
            idx, sign = self._bucket("\x00" + text)
            vec[idx] = sign
            norm = 1.0
        return vec / norm

    def encode(self, texts):
        out = np.empty((len(texts), self.dim), dtype=np.float32)
        for i, t in enumerate(texts):
            out[i] = self.vector(t)
        return out


class FileProvider(EmbeddingProvider):
    """Serves rows of a precomputed ``EMB1`` file in input order."""

    def __init__(self, path):
        self.path = str(path)
        self.matrix = read_emb1(path)
        self.dim = self.matrix.shape[1]
        self.id = f"file:{self.path}"

    def encode(self, texts):
        if len(texts) != self.matrix.shape[0]:
            raise ProviderMismatch(
                f"{self.path} holds {self.matrix.shape[0]} rows but {len(texts)} texts were given"
            )
        return _unit_rows(self.matrix)


def embed_batch(texts, provider: EmbeddingProvider, row_keys=None, workers: int = 1) -> EmbeddingMatrix:
    """Embed ``texts`` in order; ``workers > 1`` shards across threads."""
    texts = list(texts)
    for i, t in enumerate(texts):
        if not isinstance(t, str) or not t.strip():
            raise EmptyText(f"text at position {i} is empty")
    if isinstance(provider, FileProvider) or workers <= 1 or len(texts) < 2 * workers:
        data = provider.encode(texts)
    else:
        size = -(-len(texts) // workers)
        chunks = [texts[i : i + size] for i in range(0, len(texts), size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(provider.encode, chunks))
        data = np.concatenate(parts, axis=0)
    return EmbeddingMatrix(data, provider.id, list(row_keys) if row_keys is not None else [])


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise DimMismatch(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroVector("cosine undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def cosine_matrix(A, B) -> np.ndarray:
    """All-pairs cosine similarity between the rows of ``A`` and ``B``."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    if np.any(na == 0) or np.any(nb == 0):
        raise ZeroVector("cosine undefined for a zero vector")
    sims = (A / na[:, None]) @ (B / nb[:, None]).T
    return np.clip(sims, -1.0, 1.0)


def centroid(rows) -> np.ndarray:
    """Arithmetic mean of ``rows``. Deliberately not renormalized."""
    mat = np.asarray(rows, dtype=np.float64)
    if mat.size == 0:
        raise EmptyInput("centroid of zero rows")
    if mat.ndim == 1:
        mat = mat[None, :]
    mean = mat.mean(axis=0)
    if np.linalg.norm(mean) < 1e-8:
        raise DegenerateCentroid("rows average to (nearly) the zero vector")
    return mean


# ---------------------------------------------------------------------------
# EMB1 files
# ---------------------------------------------------------------------------


def write_emb1(path, data) -> None:
    mat = np.ascontiguousarray(data, dtype="<f4")
    rows, dim = mat.shape
    with open(path, "wb") as fh:
        fh.write(EMB1_MAGIC)
        fh.write(struct.pack("<II", rows, dim))
        fh.write(mat.tobytes(order="C"))


def read_emb1(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != EMB1_MAGIC:
            raise ValueError(f"{path}: not an EMB1 file")
        rows, dim = struct.unpack("<II", fh.read(8))
        payload = fh.read()
    expected = rows * dim * 4
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype="<f4").reshape(rows, dim).astype(np.float32)
