"""Embedding backends.

Both backends return unit-norm float vectors and are deterministic: the
same input text always yields the same vector, across calls and restarts.

* ``TransformerEncoder`` wraps a bidirectional encoder (the default is a
  code-pretrained model) with mean pooling over the final hidden states and
  L2 normalization.  Requires the ``transformer`` extra.
* ``HashedEncoder`` needs no model weights: token character-bigrams are
  feature-hashed into a fixed-width vector.  It exists so the service can
  run, and be tested, fully offline; its vectors are not semantic.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

DEFAULT_MODEL = "microsoft/codebert-base"

_WORD_RE = re.compile(r"[A-Za-z]+|\d+")
_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")


class EncoderError(RuntimeError):
    """The backend could not be constructed or produced no vector."""


class HashedEncoder:
    """Feature-hashed token bigrams, L2-normalized; fully offline."""

    def __init__(self, dim: int = 256):
        if dim < 8:
            raise EncoderError("dimension too small to be useful")
        self.dim = dim
        self.name = f"hashed-{dim}"

    def _features(self, text: str) -> list[str]:
        tokens: list[str] = []
        for chunk in _WORD_RE.findall(text):
            tokens.extend(t.casefold() for t in _CAMEL_RE.findall(chunk))
        features = [f"tok:{t}" for t in tokens]
        for token in tokens:
            features.extend(f"bg:{token[i:i + 2]}" for i in range(len(token) - 1))
        # guarantees a nonzero vector for any input, including empty text
        features.append(f"raw:{text}")
        return features

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for feature in self._features(text):
                digest = hashlib.blake2b(feature.encode(), digest_size=8).digest()
                index = int.from_bytes(digest[:4], "big") % self.dim
                sign = 1.0 if digest[4] % 2 == 0 else -1.0
                out[row, index] += sign
            norm = np.linalg.norm(out[row])
            if norm == 0:
                raise EncoderError(f"no features for {text!r}")
            out[row] /= norm
        return out


class TransformerEncoder:
    """Mean-pooled final hidden states of a bidirectional encoder."""

    def __init__(self, model_id: str = DEFAULT_MODEL, max_length: int = 256):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise EncoderError(
                "transformer backend needs the 'transformer' extra installed"
            ) from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_id)
            self._model = AutoModel.from_pretrained(model_id)
        except Exception as exc:
            raise EncoderError(f"cannot load model {model_id!r}: {exc}") from exc
        self._torch = torch
        self._model.eval()
        torch.set_num_threads(1)  # keeps reductions deterministic
        self.max_length = max_length
        self.name = model_id

    def encode(self, texts: list[str]) -> np.ndarray:
        torch = self._torch
        batch = self._tokenizer(
            texts,
            return_tensors="pt",
            padding=True,
            truncation=True,
            max_length=self.max_length,
        )
        with torch.inference_mode():
            hidden = self._model(**batch).last_hidden_state
        mask = batch["attention_mask"].unsqueeze(-1).to(hidden.dtype)
        summed = (hidden * mask).sum(dim=1)
        counts = mask.sum(dim=1).clamp(min=1)
        pooled = (summed / counts).double().numpy()
        norms = np.linalg.norm(pooled, axis=1, keepdims=True)
        if not np.all(norms > 0):
            raise EncoderError("degenerate pooled vector")
        return pooled / norms


def build_encoder(backend: str, model_id: str | None = None, dim: int = 256):
    if backend == "hashed":
        return HashedEncoder(dim)
    if backend == "transformer":
        return TransformerEncoder(model_id or DEFAULT_MODEL)
    raise EncoderError(f"unknown backend {backend!r}")
