"""Batch export: read texts, encode once per unique digest, write emb.v1.

The engine treats the store as an opaque key-value file, so correctness
here is entirely about key discipline: the digests written must equal
the digests the engine computes for the same corpus sentences, lyric
chunks, and queries. A header-level model tag records which encoder
produced the vectors.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .encoders import resolve_encoder
from .errors import ExportError
from .inputs import KINDS, read_texts
from .store import ENCODER_DIM, read_store, text_key, write_store


@dataclass(frozen=True)
class ExportManifest:
    """One export run: where texts come from and where vectors go.

    chunk_words must equal the engine's annotator setting, otherwise the
    lyric-chunk keys will not match anything the engine asks for.
    """

    inputs: tuple[str, ...]
    kind: str
    chunk_words: int
    model_tag: str
    out_path: str

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("manifest needs at least one input file")
        if self.kind not in KINDS:
            raise ValueError(f"unknown input kind {self.kind!r}, expected one of {KINDS}")
        if self.chunk_words < 1:
            raise ValueError(f"chunk_words must be positive, got {self.chunk_words}")
        if not self.model_tag:
            raise ValueError("model tag must be non-empty")


@dataclass(frozen=True)
class ExportResult:
    texts: int
    unique: int
    out_path: str


@dataclass(frozen=True)
class VerifyReport:
    required: int
    missing: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.missing

    def summary(self) -> str:
        return f"{self.required} keys required, {len(self.missing)} missing"


def collect_texts(manifest: ExportManifest) -> list[str]:
    texts: list[str] = []
    for path in manifest.inputs:
        texts.extend(read_texts(path, manifest.kind, manifest.chunk_words))
    return texts


def export_embeddings(manifest: ExportManifest, encoder=None,
                      update: bool = False) -> ExportResult:
    """Encode every unique text and write the canonical store file.

    Duplicate texts collapse to a single row via key dedup. The encoder
    defaults to whatever the manifest's model tag resolves to; passing
    one explicitly is the seam for tests.

    The engine reads one store covering corpus sentences, lyric chunks,
    and queries together, while a single export run handles one input
    kind; with update=True, rows already in the output file are kept and
    the new rows merged in, so consecutive runs of different kinds build
    the combined store. The existing file's model tag must match.
    """
    texts = collect_texts(manifest)
    if not texts:
        raise ExportError(f"no texts found in inputs {list(manifest.inputs)}")

    keyed: dict[str, str] = {}
    for body in texts:
        keyed.setdefault(text_key(body), body)

    if encoder is None:
        encoder = resolve_encoder(manifest.model_tag)

    existing: dict[str, np.ndarray] = {}
    if update and os.path.exists(manifest.out_path):
        prior_tag, existing = read_store(manifest.out_path)
        if prior_tag != encoder.tag:
            raise ExportError(
                f"{manifest.out_path}: existing store was encoded with "
                f"{prior_tag!r}, not {encoder.tag!r}; refusing to mix"
            )
        # Rows carried over need no re-encoding: same key means same text.
        for key in existing:
            keyed.pop(key, None)

    keys = sorted(keyed)
    entries = dict(existing)
    if keys:
        vecs = np.asarray(encoder.encode([keyed[k] for k in keys]), dtype=np.float64)
        if vecs.shape != (len(keys), ENCODER_DIM):
            raise ExportError(
                f"encoder {encoder.tag!r} produced shape {vecs.shape}, "
                f"expected ({len(keys)}, {ENCODER_DIM})"
            )
        if not np.isfinite(vecs).all():
            raise ExportError(f"encoder {encoder.tag!r} produced non-finite values")
        entries.update(zip(keys, vecs))

    write_store(manifest.out_path, encoder.tag, entries)
    return ExportResult(texts=len(texts), unique=len(entries), out_path=manifest.out_path)


def verify_store(path, manifest: ExportManifest) -> VerifyReport:
    """Check that the store at path covers every key the inputs require.

    Re-reads the inputs, recomputes their digests, and parses the store
    (which also enforces dims and finiteness). Missing digests come back
    sorted so reports are stable.
    """
    required = {text_key(body) for body in collect_texts(manifest)}
    _, entries = read_store(path)
    missing = sorted(required - entries.keys())
    return VerifyReport(required=len(required), missing=tuple(missing))
