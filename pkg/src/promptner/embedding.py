"""Entity embeddings and cosine similarity.

Two providers ship with the package:

* :class:`LocalTrigramEmbedder` - hashed character-trigram term frequencies,
  512 dimensions, L2 normalized. Deterministic, offline, no model needed.
* :class:`RemoteEmbedder` - POSTs ``{"texts": [...]}`` to an encoder service
  and expects ``{"vectors": [[...], ...]}`` back.

Either can be wrapped in :class:`EmbeddingCache`.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import tempfile
import threading
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyText, ProviderUnavailable, ZeroVector
from .transport import HttpxTransport, Transport, TransportError
from .vocab import normalize

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    values: np.ndarray
    provider_id: str

    @property
    def dimension(self) -> int:
        return int(self.values.shape[0])

    @cached_property
    def norm(self) -> float:
        return math.sqrt(_exact_dot(self.values, self.values))


def _exact_dot(a: np.ndarray, b: np.ndarray) -> float:
    # fsum is correctly rounded, so results do not depend on BLAS or CPU.
    return math.fsum((a * b).tolist())


class EmbeddingProvider(Protocol):
    provider_id: str

    def embed_many(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


class LocalTrigramEmbedder:
    """Hashed character-trigram embedder.

    The input is padded with one space on each side, every length-3 window is
    hashed with BLAKE2b (8 bytes, little endian) modulo ``dimension`` and
    counted; the count vector is L2 normalized.
    """

    def __init__(self, dimension: int = 512):
        self.dimension = dimension
        self.provider_id = f"local-trigram-{dimension}"

    def _bucket(self, gram: str) -> int:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dimension

    def embed_one(self, text: str) -> EmbeddingVector:
        padded = f" {text} "
        counts = np.zeros(self.dimension, dtype=np.float64)
        for i in range(len(padded) - 2):
            counts[self._bucket(padded[i : i + 3])] += 1.0
        return EmbeddingVector(counts / math.sqrt(math.fsum(counts * counts)), self.provider_id)

    def embed_many(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return [self.embed_one(t) for t in texts]


class RemoteEmbedder:
    def __init__(
        self,
        url: str,
        provider_id: str = "remote",
        api_key_env: str | None = "PROMPTNER_EMBEDDING_API_KEY",
        batch_size: int = 64,
        timeout: float = 60.0,
        transport: Transport | None = None,
    ):
        self.url = url
        self.provider_id = provider_id
        self.api_key_env = api_key_env
        self.batch_size = batch_size
        self.timeout = timeout
        self.transport = transport or HttpxTransport()
        self._dimension: int | None = None

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env) if self.api_key_env else None
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def embed_many(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        out: list[EmbeddingVector] = []
        for i in range(0, len(texts), self.batch_size):
            batch = list(texts[i : i + self.batch_size])
            try:
                resp = self.transport.post_json(self.url, {"texts": batch}, self._headers(), self.timeout)
            except TransportError as exc:
                raise ProviderUnavailable(f"{self.url}: {exc}") from exc
            if resp.status != 200 or not isinstance(resp.body, dict):
                raise ProviderUnavailable(f"{self.url}: HTTP {resp.status}")
            vectors = resp.body.get("vectors")
            if not isinstance(vectors, list) or len(vectors) != len(batch):
                raise ProviderUnavailable(f"{self.url}: expected {len(batch)} vectors")
            for values in vectors:
                arr = np.asarray(values, dtype=np.float64)
                if self._dimension is None:
                    self._dimension = arr.shape[0]
                elif arr.shape != (self._dimension,):
                    raise DimensionMismatch(
                        f"{self.provider_id} returned {arr.shape[0]} dims, expected {self._dimension}"
                    )
                out.append(EmbeddingVector(arr, self.provider_id))
        return out


class EmbeddingCache:
    """Memoizes a provider in memory and, optionally, one JSON file per key."""

    def __init__(self, provider: EmbeddingProvider, directory: Path | None = None):
        self.provider = provider
        self.provider_id = provider.provider_id
        self.directory = Path(directory) if directory else None
        self._memory: dict[str, EmbeddingVector] = {}
        self._lock = threading.Lock()
        if self.directory:
            self.directory.mkdir(parents=True, exist_ok=True)

    def key(self, text: str) -> str:
        return hashlib.sha256(f"{self.provider_id}\x00{text}".encode("utf-8")).hexdigest()

    def _load(self, key: str) -> EmbeddingVector | None:
        if key in self._memory:
            return self._memory[key]
        if self.directory:
            path = self.directory / f"{key}.json"
            if path.exists():
                data = json.loads(path.read_text(encoding="utf-8"))
                vec = EmbeddingVector(np.asarray(data["values"], dtype=np.float64), data["provider_id"])
                self._memory[key] = vec
                return vec
        return None

    def _store(self, key: str, text: str, vec: EmbeddingVector) -> None:
        with self._lock:
            self._memory[key] = vec
            if self.directory:
                payload = {"provider_id": vec.provider_id, "text": text, "values": vec.values.tolist()}
                fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    json.dump(payload, fh)
                os.replace(tmp, self.directory / f"{key}.json")

    def embed_many(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        keys = [self.key(t) for t in texts]
        found = {k: self._load(k) for k in set(keys)}
        missing = sorted({t for t, k in zip(texts, keys) if found[k] is None})
        if missing:
            for text, vec in zip(missing, self.provider.embed_many(missing)):
                k = self.key(text)
                self._store(k, text, vec)
                found[k] = vec
        return [found[k] for k in keys]


def embed(text: str, provider: EmbeddingProvider) -> EmbeddingVector:
    return embed_texts([text], provider)[0]


def embed_texts(texts: Sequence[str], provider: EmbeddingProvider) -> list[EmbeddingVector]:
    """Normalize and embed ``texts``; raises :class:`EmptyText` for blank input."""
    normed = []
    for text in texts:
        norm = normalize(text)
        if not norm:
            raise EmptyText(f"nothing to embed in {text!r}")
        normed.append(norm)
    return provider.embed_many(normed)


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"{a.dimension} vs {b.dimension}")
    na, nb = a.norm, b.norm
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity of a zero vector")
    value = _exact_dot(a.values, b.values) / (na * nb)
    return min(1.0, max(-1.0, value))
