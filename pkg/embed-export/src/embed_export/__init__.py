"""Offline embedding export: texts in, canonical emb.v1 store out."""

from .encoders import HashEncoder, SentenceTransformerEncoder, resolve_encoder
from .errors import ExportError, UsageError
from .exporter import (
    ExportManifest,
    ExportResult,
    VerifyReport,
    collect_texts,
    export_embeddings,
    verify_store,
)
from .inputs import DEFAULT_CHUNK_WORDS, KINDS, chunk_text, read_texts
from .store import EMB_FORMAT, ENCODER_DIM, format_real, read_store, text_key, write_store

__all__ = [
    "DEFAULT_CHUNK_WORDS",
    "EMB_FORMAT",
    "ENCODER_DIM",
    "ExportError",
    "ExportManifest",
    "ExportResult",
    "HashEncoder",
    "KINDS",
    "SentenceTransformerEncoder",
    "UsageError",
    "VerifyReport",
    "chunk_text",
    "collect_texts",
    "export_embeddings",
    "format_real",
    "read_store",
    "read_texts",
    "resolve_encoder",
    "text_key",
    "verify_store",
    "write_store",
]
