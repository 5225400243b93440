"""Input readers: each kind yields the exact text bodies the engine hashes.

Three kinds are supported. ``corpus`` is the emotion CSV
(``id,text,V,A``); the sentence bodies are hashed whole. ``lyrics`` is
the catalog CSV (``artist,song,text``); each lyric is split into
fixed-size word windows first, because the engine annotates songs
chunk by chunk. ``queries`` is a plain text file with one query per
line, stripped, matching what the recommend surface hashes.

Chunking must mirror the engine exactly or the keys will not match:
words are whitespace tokens, windows hold at most chunk_words of them,
and a chunk is its window rejoined with single spaces.
"""

from __future__ import annotations

import csv

from .errors import ExportError

CORPUS_HEADER = ["id", "text", "V", "A"]
LYRICS_HEADER = ["artist", "song", "text"]
KINDS = ("corpus", "lyrics", "queries")
DEFAULT_CHUNK_WORDS = 50


def chunk_text(body: str, chunk_words: int) -> list[str]:
    if chunk_words <= 0:
        raise ValueError(f"chunk_words must be positive, got {chunk_words}")
    words = body.split()
    return [" ".join(words[i:i + chunk_words]) for i in range(0, len(words), chunk_words)]


def _read_csv(path, expected_header):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"{path}: cannot read input: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ExportError(f"{path}: empty file, expected header {expected_header}") from None
        if header != expected_header:
            raise ExportError(f"{path}:1: bad header {header!r}, expected {expected_header!r}")
        return [(reader.line_num, row) for row in reader]


def read_corpus_texts(path) -> list[str]:
    """Sentence bodies from an emotion corpus CSV, in file order."""
    texts = []
    for line, row in _read_csv(path, CORPUS_HEADER):
        if len(row) != 4:
            raise ExportError(f"{path}:{line}: expected 4 fields, got {len(row)}")
        body = row[1]
        if not body.split():
            raise ExportError(f"{path}:{line}: empty sentence text")
        texts.append(body)
    return texts


def read_lyrics_texts(path, chunk_words: int) -> list[str]:
    """Lyric chunks from a catalog CSV, song by song in file order."""
    texts = []
    for line, row in _read_csv(path, LYRICS_HEADER):
        if len(row) != 3:
            raise ExportError(f"{path}:{line}: expected 3 fields, got {len(row)}")
        body = row[2]
        if not body.split():
            raise ExportError(f"{path}:{line}: empty lyrics for {row[0]!r} / {row[1]!r}")
        texts.extend(chunk_text(body, chunk_words))
    return texts


def read_query_texts(path) -> list[str]:
    """Stripped non-blank lines from a plain text file."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"{path}: cannot read input: {exc}") from None
    with fh:
        return [line.strip() for line in fh if line.strip()]


def read_texts(path, kind: str, chunk_words: int) -> list[str]:
    if kind == "corpus":
        return read_corpus_texts(path)
    if kind == "lyrics":
        return read_lyrics_texts(path, chunk_words)
    if kind == "queries":
        return read_query_texts(path)
    raise ValueError(f"unknown input kind {kind!r}, expected one of {KINDS}")
