"""Reading and writing ``emb.v1`` embedding stores.

The format is UTF-8 JSON Lines: a header object
``{"format":"emb.v1","dim":384,"model":"<tag>"}`` followed by one
``{"key":"<64-hex digest>","vec":[...]}`` object per line, reals at up to
9 significant digits, LF line endings, rows sorted by key. Keys are
SHA-256 digests of the UTF-8 text, so the consumer can look vectors up
without ever seeing the original strings.

This module is intentionally self-contained: the export tool owns its own
copy of the hashing and serialization rules instead of depending on the
engine package.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .errors import ExportError

EMB_FORMAT = "emb.v1"
ENCODER_DIM = 384
_KEY_LEN = 64


def text_key(body: str) -> str:
    """Lowercase hex SHA-256 of the UTF-8 bytes of the text."""
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def format_real(x: float) -> str:
    """Canonical decimal rendering at up to 9 significant digits."""
    return "%.9g" % x


def write_store(path, model_tag: str, entries: dict[str, np.ndarray]) -> None:
    """Write entries as canonical emb.v1: sorted keys, 9-digit reals."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"format": EMB_FORMAT, "dim": ENCODER_DIM, "model": model_tag}))
        fh.write("\n")
        for key in sorted(entries):
            values = ",".join(format_real(v) for v in entries[key])
            fh.write('{"key":%s,"vec":[%s]}\n' % (json.dumps(key), values))


def read_store(path) -> tuple[str, dict[str, np.ndarray]]:
    """Parse an emb.v1 file into (model_tag, entries) for verification.

    Every row must carry exactly the header's dim values, all finite; the
    header dim must be the encoder width this tool exports.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ExportError(f"{path}: empty file, expected an {EMB_FORMAT} header")

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ExportError(f"{path}:1: bad header JSON: {exc}") from None
    if not isinstance(header, dict) or header.get("format") != EMB_FORMAT:
        raise ExportError(f"{path}:1: expected format {EMB_FORMAT!r}, got {header!r}")
    dim = header.get("dim")
    if dim != ENCODER_DIM:
        raise ExportError(f"{path}:1: dim is {dim!r}, expected {ENCODER_DIM}")

    entries: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ExportError(f"{path}:{lineno}: bad row JSON: {exc}") from None
        if not isinstance(row, dict) or "key" not in row or "vec" not in row:
            raise ExportError(f"{path}:{lineno}: row must have 'key' and 'vec'")
        key = row["key"]
        if not isinstance(key, str) or len(key) != _KEY_LEN:
            raise ExportError(f"{path}:{lineno}: key is not a {_KEY_LEN}-char digest")
        vec = np.asarray(row["vec"], dtype=np.float64)
        if vec.ndim != 1 or vec.shape[0] != dim:
            raise ExportError(f"{path}:{lineno}: expected {dim} values, got {vec.size}")
        if not np.isfinite(vec).all():
            raise ExportError(f"{path}:{lineno}: non-finite value in vector")
        entries[key] = vec
    return header.get("model", ""), entries
