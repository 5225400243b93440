"""Sentence encoders behind a tiny common surface: ``tag``, ``encode``.

The real path wraps a pretrained sentence-transformers model (any tag the
library resolves, e.g. ``sentence-transformers/all-MiniLM-L6-v2``). Tags
with a ``hash:`` prefix select a deterministic offline stand-in whose
vectors are seeded by each text's digest; it exists so exports can be
exercised end to end without model weights, and its output is useless
for actual recommendation quality.
"""

from __future__ import annotations

import numpy as np

from .store import ENCODER_DIM, text_key

HASH_TAG_PREFIX = "hash:"


class HashEncoder:
    """Deterministic pseudo-embeddings keyed by each text's digest."""

    def __init__(self, tag: str):
        self.tag = tag

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.empty((len(texts), ENCODER_DIM), dtype=np.float64)
        for i, body in enumerate(texts):
            seed = int(text_key(body)[:12], 16)
            out[i] = np.random.default_rng(seed).standard_normal(ENCODER_DIM)
        return out


class SentenceTransformerEncoder:
    """Pretrained encoder loaded through sentence-transformers.

    The import is deferred so the offline hash path never pays for, or
    requires, the deep-learning stack.
    """

    def __init__(self, tag: str):
        from sentence_transformers import SentenceTransformer

        self.tag = tag
        self._model = SentenceTransformer(tag)

    def encode(self, texts: list[str]) -> np.ndarray:
        vecs = self._model.encode(list(texts), convert_to_numpy=True, show_progress_bar=False)
        return np.asarray(vecs, dtype=np.float64)


def resolve_encoder(tag: str):
    if tag.startswith(HASH_TAG_PREFIX):
        return HashEncoder(tag)
    return SentenceTransformerEncoder(tag)
