"""Vector collections with exact top-k cosine retrieval and bit-exact
persistence.

A collection is either the code index or the text index; the two never mix
(kind guards on upsert). Search is a full cosine scan, so results match a
brute-force oracle exactly, and the on-disk layout is language-neutral:
manifest.json + ids.jsonl + vectors.f32 (little-endian float32 rows).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .chunking import CODE_KINDS, TEXT, Chunk
from .embeddings import BUILTIN_NAME, EmbeddingProvider, HashingEmbedder, l2_normalize
from .errors import CollectionError
from .ingest import content_hash

COLLECTION_CODE = "code"
COLLECTION_TEXT = "text"


@dataclass(frozen=True)
class ScoredHit:
    chunk_id: str
    score: float
    metadata: dict[str, Any]


@dataclass
class UpsertResult:
    inserted: int = 0
    updated: int = 0
    unchanged: int = 0
    rejected: list[tuple[str, str]] = field(default_factory=list)


class VectorCollection:
    def __init__(self, name: str, provider: EmbeddingProvider):
        if name not in (COLLECTION_CODE, COLLECTION_TEXT):
            raise CollectionError(f"collection name must be code|text, got {name!r}")
        self.name = name
        self.provider = provider
        self._ids: list[str] = []
        self._index: dict[str, int] = {}
        self._vectors = np.zeros((0, provider.dims), dtype=np.float32)
        self._meta: list[dict[str, Any]] = []
        self._hashes: dict[str, str] = {}
        self._texts: dict[str, str] = {}

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def dims(self) -> int:
        return self.provider.dims

    def _accepts(self, kind: str) -> bool:
        return kind in CODE_KINDS if self.name == COLLECTION_CODE else kind == TEXT

    def upsert(self, chunks: Sequence[Chunk]) -> UpsertResult:
        """Embed and store chunks; unchanged content (by hash) is a no-op."""
        result = UpsertResult()
        pending: list[tuple[Chunk, str]] = []
        for chunk in chunks:
            if not self._accepts(chunk.kind):
                result.rejected.append(
                    (chunk.id, f"kind {chunk.kind} not allowed in "
                               f"{self.name} collection"))
                continue
            digest = content_hash(chunk.text.encode("utf-8"))
            if self._hashes.get(chunk.id) == digest:
                result.unchanged += 1
                continue
            pending.append((chunk, digest))
        if not pending:
            return result
        vectors = self.provider.embed([c.text for c, _ in pending])
        if vectors.shape != (len(pending), self.dims):
            raise CollectionError("provider returned wrong embedding shape")
        for (chunk, digest), vector in zip(pending, vectors):
            meta = {"path": chunk.path, "kind": chunk.kind, "symbol": chunk.symbol}
            if chunk.id in self._index:
                row = self._index[chunk.id]
                self._vectors[row] = vector
                self._meta[row] = meta
                result.updated += 1
            else:
                self._index[chunk.id] = len(self._ids)
                self._ids.append(chunk.id)
                self._vectors = np.vstack([self._vectors, vector[None, :]])
                self._meta.append(meta)
                result.inserted += 1
            self._hashes[chunk.id] = digest
            self._texts[chunk.id] = chunk.text
        return result

    def query_top_k(self, query_vector: np.ndarray, k: int) -> list[ScoredHit]:
        """Exact cosine top-k: descending score, ties broken by ascending id."""
        if k < 0:
            raise ValueError("k must be non-negative")
        vector = np.asarray(query_vector, dtype=np.float32).reshape(-1)
        if vector.shape[0] != self.dims:
            raise CollectionError(
                f"query dims {vector.shape[0]} != collection dims {self.dims}")
        if k == 0 or not self._ids:
            return []
        vector = l2_normalize(vector[None, :])[0]
        scores = self._vectors @ vector
        order = sorted(range(len(self._ids)),
                       key=lambda i: (-float(scores[i]), self._ids[i]))
        return [
            ScoredHit(chunk_id=self._ids[i], score=float(scores[i]),
                      metadata=dict(self._meta[i]))
            for i in order[:k]
        ]

    def query_text(self, text: str, k: int) -> list[ScoredHit]:
        return self.query_top_k(self.provider.embed([text])[0], k)

    def text_of(self, chunk_id: str) -> str:
        return self._texts[chunk_id]

    # --- persistence ---------------------------------------------------

    def save(self, directory: str | Path) -> None:
        """Write manifest.json, ids.jsonl and vectors.f32 under a writer lock."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with _collection_lock(directory):
            manifest = {
                "collection": self.name,
                "provider": self.provider.name,
                "dims": self.dims,
                "entries": len(self._ids),
            }
            (directory / "manifest.json").write_text(
                json.dumps(manifest, sort_keys=True, indent=2) + "\n", "utf-8")
            with (directory / "ids.jsonl").open("w", encoding="utf-8") as handle:
                for i, chunk_id in enumerate(self._ids):
                    row = {
                        "chunk_id": chunk_id,
                        "path": self._meta[i]["path"],
                        "kind": self._meta[i]["kind"],
                        "symbol": self._meta[i]["symbol"],
                        "content_hash": self._hashes[chunk_id],
                        "text": self._texts[chunk_id],
                    }
                    handle.write(json.dumps(row, sort_keys=True) + "\n")
            (directory / "vectors.f32").write_bytes(
                np.ascontiguousarray(self._vectors, dtype="<f4").tobytes())

    @classmethod
    def load(cls, directory: str | Path,
             provider: EmbeddingProvider | None = None) -> "VectorCollection":
        directory = Path(directory)
        manifest = json.loads((directory / "manifest.json").read_text("utf-8"))
        dims = int(manifest["dims"])
        if provider is None:
            if manifest["provider"] != BUILTIN_NAME:
                raise CollectionError(
                    f"collection was built with provider {manifest['provider']!r}; "
                    "pass a matching provider to load()")
            provider = HashingEmbedder(dims)
        if provider.dims != dims or provider.name != manifest["provider"]:
            raise CollectionError("provider does not match stored manifest")
        collection = cls(manifest["collection"], provider)
        rows = [json.loads(line) for line
                in (directory / "ids.jsonl").read_text("utf-8").splitlines()
                if line.strip()]
        raw = (directory / "vectors.f32").read_bytes()
        vectors = np.frombuffer(raw, dtype="<f4").reshape(len(rows), dims).copy()
        if len(rows) != int(manifest["entries"]):
            raise CollectionError("ids.jsonl row count disagrees with manifest")
        collection._ids = [r["chunk_id"] for r in rows]
        collection._index = {cid: i for i, cid in enumerate(collection._ids)}
        collection._vectors = vectors
        collection._meta = [{"path": r["path"], "kind": r["kind"],
                             "symbol": r["symbol"]} for r in rows]
        collection._hashes = {r["chunk_id"]: r["content_hash"] for r in rows}
        collection._texts = {r["chunk_id"]: r["text"] for r in rows}
        return collection


class _collection_lock:
    """Exclusive writer lock: an O_EXCL lock file in the collection directory."""

    def __init__(self, directory: Path):
        self.path = directory / "lock"

    def __enter__(self):
        try:
            self.fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise CollectionError(
                f"collection is locked by another writer: {self.path}") from None
        return self

    def __exit__(self, *exc):
        os.close(self.fd)
        os.unlink(self.path)
        return False
