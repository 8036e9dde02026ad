"""String semantic similarity providers.

Two interchangeable providers implement the similarity function used by all
metric computations:

* :class:`LexicalProvider` — deterministic, dependency-free Dice similarity
  over identifier token bigrams; the default for tests and offline runs.
* :class:`EmbeddingServiceProvider` — client for the embedding HTTP service;
  similarity is the clamped cosine of the two unit-norm embedding vectors.

Every provider guarantees sim(s, s) = 1, symmetry, results in [0, 1] and
determinism.  Empty-string semantics are fixed across providers:
sim("", "") = 1 and sim(s, "") = 0 for non-empty s, so two unspecified
types count as agreement.
"""

from __future__ import annotations

import os
import re
import threading

import httpx
import numpy as np

EMBED_ROUTE = "/embed"
TOKEN_ENV_VAR = "EMBED_SERVICE_TOKEN"


class ProviderError(RuntimeError):
    """The embedding service could not produce a usable vector."""


_WORD_RE = re.compile(r"[A-Za-z]+|\d+")
_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")


def _tokens(text: str) -> list[str]:
    """Case-folded identifier tokens, split on camelCase and snake_case."""
    out: list[str] = []
    for chunk in _WORD_RE.findall(text):
        out.extend(piece.casefold() for piece in _CAMEL_RE.findall(chunk))
    return out


def _bigrams(text: str) -> set[str]:
    grams: set[str] = set()
    for token in _tokens(text):
        if len(token) == 1:
            grams.add(token)
        grams.update(token[i : i + 2] for i in range(len(token) - 1))
    return grams


class LexicalProvider:
    """Dice coefficient over token character-bigram sets."""

    kind = "lexical"

    def similarity(self, s1: str, s2: str) -> float:
        if s1 == s2:
            return 1.0
        g1, g2 = _bigrams(s1), _bigrams(s2)
        if not g1 or not g2:
            return 0.0
        return 2.0 * len(g1 & g2) / (len(g1) + len(g2))


class EmbeddingServiceProvider:
    """Client for the embedding service's ``POST /embed`` route.

    Request body is ``{"texts": [...]}``; the response carries one
    unit-norm vector per input text, in order, under ``"vectors"``.  The
    auth token (optional) is sent as a bearer header and read from the
    ``EMBED_SERVICE_TOKEN`` environment variable unless given explicitly.
    """

    kind = "embedding_service"

    def __init__(
        self,
        endpoint: str,
        token: str | None = None,
        timeout: float = 30.0,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.token = token if token is not None else os.environ.get(TOKEN_ENV_VAR)
        self._client = client or httpx.Client(timeout=timeout)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        return headers

    def embed_many(self, texts: list[str]) -> list[np.ndarray]:
        try:
            response = self._client.post(
                self.endpoint + EMBED_ROUTE,
                json={"texts": texts},
                headers=self._headers(),
            )
        except httpx.HTTPError as exc:
            raise ProviderError(
                f"embedding service unreachable for {texts!r}: {exc}"
            ) from exc
        if response.status_code != 200:
            raise ProviderError(
                f"embedding service returned {response.status_code} for {texts!r}"
            )
        payload = response.json()
        vectors = payload.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProviderError(f"embedding service response malformed for {texts!r}")
        out = []
        for text, raw in zip(texts, vectors):
            vector = np.asarray(raw, dtype=np.float64)
            if vector.ndim != 1 or not np.all(np.isfinite(vector)):
                raise ProviderError(f"non-finite embedding for {text!r}")
            norm = float(np.linalg.norm(vector))
            if abs(norm - 1.0) > 1e-6:
                raise ProviderError(
                    f"embedding for {text!r} is not unit-norm (|v| = {norm:.8f})"
                )
            out.append(vector)
        return out

    def embed(self, text: str) -> np.ndarray:
        return self.embed_many([text])[0]

    def similarity(self, s1: str, s2: str) -> float:
        if s1 == s2:
            return 1.0
        if not s1 or not s2:
            return 0.0
        v1, v2 = self.embed_many([s1, s2])
        cosine = float(np.dot(v1, v2))
        return min(1.0, max(0.0, cosine))


class CachedProvider:
    """Memoizing wrapper keyed on the unordered string pair.

    Reads and writes are synchronized; a race may at worst duplicate a
    computation, never return a wrong value.
    """

    def __init__(self, provider):
        self.provider = provider
        self.kind = provider.kind
        self._cache: dict[tuple[str, str], float] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._cache)

    def similarity(self, s1: str, s2: str) -> float:
        key = (s1, s2) if s1 <= s2 else (s2, s1)
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        value = self.provider.similarity(s1, s2)
        with self._lock:
            return self._cache.setdefault(key, value)

    def embed(self, text: str):
        return self.provider.embed(text)


def cached(provider) -> CachedProvider:
    return CachedProvider(provider)


def similarity(provider, s1: str, s2: str) -> float:
    return provider.similarity(s1, s2)


def embed(provider, text: str):
    if provider.kind != "embedding_service":
        raise ProviderError(f"provider kind {provider.kind!r} cannot embed")
    return provider.embed(text)
