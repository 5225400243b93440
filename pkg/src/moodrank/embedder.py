"""Embedding provider backed by a bit-exact ``emb.v1`` store file.

Embeddings are consumed as precomputed frozen vectors keyed by the SHA-256
digest of the text, which lets one store serve corpus sentences, lyric
chunks, and live queries uniformly, and keeps any deep-learning runtime out
of the engine's process.

``emb.v1`` is UTF-8 JSON Lines: a header object
``{"format":"emb.v1","dim":384,"model":"<tag>"}`` followed by one
``{"key":"<64-hex digest>","vec":[...]}`` object per line, reals at up to
9 significant digits, LF line endings.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, FormatError, MissingEmbeddingError

EMB_FORMAT = "emb.v1"
EMBEDDING_DIM = 384
_KEY_LEN = 64
_HEX_DIGITS = set("0123456789abcdef")


def text_key(body: str) -> str:
    """Lowercase hex SHA-256 of the UTF-8 bytes of the text."""
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def format_real(x: float) -> str:
    """Canonical decimal rendering at up to 9 significant digits."""
    return "%.9g" % x


@dataclass
class EmbeddingStore:
    dim: int
    model_tag: str
    entries: dict[str, np.ndarray] = field(default_factory=dict)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def load_embedding_store(path) -> EmbeddingStore:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError(f"{path}: empty file, expected an {EMB_FORMAT} header")

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:1: bad header JSON: {exc}") from None
    if not isinstance(header, dict) or header.get("format") != EMB_FORMAT:
        raise FormatError(f"{path}:1: expected format {EMB_FORMAT!r}, got {header!r}")
    dim = header.get("dim")
    if not isinstance(dim, int) or dim <= 0:
        raise FormatError(f"{path}:1: missing or invalid dim: {dim!r}")
    model_tag = header.get("model", "")

    store = EmbeddingStore(dim=dim, model_tag=model_tag)
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: bad row JSON: {exc}") from None
        if not isinstance(row, dict) or "key" not in row or "vec" not in row:
            raise DataError(f"{path}:{lineno}: row must have 'key' and 'vec'")
        key = row["key"]
        if (
            not isinstance(key, str)
            or len(key) != _KEY_LEN
            or not set(key) <= _HEX_DIGITS
        ):
            raise DataError(f"{path}:{lineno}: key is not a {_KEY_LEN}-char lowercase hex digest")
        if key in store.entries:
            raise DataError(f"{path}:{lineno}: duplicate key {key}")
        vec = np.asarray(row["vec"], dtype=np.float64)
        if vec.ndim != 1 or vec.shape[0] != dim:
            raise DataError(f"{path}:{lineno}: expected {dim} values, got {vec.size}")
        if not np.isfinite(vec).all():
            raise DataError(f"{path}:{lineno}: non-finite value in vector")
        store.entries[key] = vec
    return store


def save_embedding_store(store: EmbeddingStore, path) -> None:
    """Write the store in canonical form: rows sorted by key, 9-digit reals."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"format": EMB_FORMAT, "dim": store.dim, "model": store.model_tag}))
        fh.write("\n")
        for key in sorted(store.entries):
            values = ",".join(format_real(v) for v in store.entries[key])
            fh.write('{"key":%s,"vec":[%s]}\n' % (json.dumps(key), values))


def get_embedding(store: EmbeddingStore, body: str) -> np.ndarray:
    key = text_key(body)
    vec = store.entries.get(key)
    if vec is None:
        raise MissingEmbeddingError(key)
    return vec
