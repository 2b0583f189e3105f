"""Embedding providers.

Two implementations behind one small interface: a deterministic built-in
embedder (feature-hashed character trigrams, no model weights) that tests
and CI rely on, and an HTTP client for user-selected embedding endpoints.
All vectors leave a provider L2-normalized float32.
"""

from __future__ import annotations

import zlib
from typing import Callable, Protocol, Sequence

import numpy as np
import requests

from .errors import ProviderContractError, TransportError

BUILTIN_NAME = "hash-ngram"


class EmbeddingProvider(Protocol):
    name: str
    dims: int
    endpoint: str | None

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


def l2_normalize(matrix: np.ndarray) -> np.ndarray:
    """Renormalize rows whose norm strays from 1 by more than 1e-6."""
    matrix = np.asarray(matrix, dtype=np.float32)
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0):
        raise ProviderContractError("zero vector cannot be normalized")
    off = np.abs(norms - 1.0) > 1e-6
    if np.any(off):
        matrix = matrix.copy()
        matrix[off] = matrix[off] / norms[off, None]
    return matrix


class HashingEmbedder:
    """Deterministic embedder: crc32-hashed character 3-grams, signed counts."""

    def __init__(self, dims: int = 256):
        if dims <= 0:
            raise ValueError("dims must be positive")
        self.dims = dims
        self.name = BUILTIN_NAME
        self.endpoint = None

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            raise ValueError("inputs must be non-empty")
        out = np.zeros((len(texts), self.dims), dtype=np.float64)
        for row, text in enumerate(texts):
            data = text.encode("utf-8")
            grams = [data[i:i + 3] for i in range(len(data) - 2)] or [data]
            for gram in grams:
                h = zlib.crc32(gram)
                sign = 1.0 if (h >> 31) == 0 else -1.0
                out[row, h % self.dims] += sign
            norm = np.linalg.norm(out[row])
            if norm == 0.0:
                out[row, 0] = 1.0
            else:
                out[row] /= norm
        return l2_normalize(out.astype(np.float32))


class RemoteEmbeddingProvider:
    """Client for a POST {model, input} -> {embeddings} endpoint."""

    def __init__(self, name: str, dims: int, endpoint: str,
                 timeout: float = 30.0,
                 post: Callable[..., "requests.Response"] | None = None):
        self.name = name
        self.dims = dims
        self.endpoint = endpoint
        self.timeout = timeout
        self._post = post or requests.post

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            raise ValueError("inputs must be non-empty")
        payload = {"model": self.name, "input": list(texts)}
        try:
            response = self._post(self.endpoint, json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"embedding endpoint unreachable: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(
                f"embedding endpoint returned HTTP {response.status_code}")
        try:
            rows = response.json()["embeddings"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderContractError(
                f"embedding response not in wire format: {exc}") from exc
        if len(rows) != len(texts):
            raise ProviderContractError(
                f"expected {len(texts)} vectors, got {len(rows)}")
        matrix = np.asarray(rows, dtype=np.float32)
        if matrix.ndim != 2 or matrix.shape[1] != self.dims:
            got = matrix.shape[1] if matrix.ndim == 2 else "ragged"
            raise ProviderContractError(
                f"provider declared dims={self.dims}, endpoint returned {got}")
        return l2_normalize(matrix)
