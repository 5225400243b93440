"""Lyrics annotation: long texts to one VA point per song.

Lyrics rarely fit the short-sentence regime the head is trained on, so each
song is split into fixed-size word chunks, every chunk is scored on its own,
and the song's VA point is the plain mean of the chunk predictions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .corpus import Catalog, SongRecord
from .embedder import EmbeddingStore, format_real, text_key
from .errors import DataError, FormatError, MissingEmbeddingError
from .features import VAPoint, VAScaler, destandardize, va_bin, wide_feature
from .model import WideDeepHead, forward_batch

DEFAULT_CHUNK_WORDS = 50

SONGDB_FORMAT = "songdb.v1"


@dataclass(frozen=True)
class AnnotatedSong:
    artist: str  # display form
    artist_norm: str
    title: str
    valence: float
    arousal: float
    chunk_count: int = 1

    def __post_init__(self):
        # Predictions may leave the [1,5] annotation scale, but they must
        # stay finite; binning clamps later.
        if not (math.isfinite(self.valence) and math.isfinite(self.arousal)):
            raise DataError(
                f"{self.artist!r}/{self.title!r}: non-finite VA "
                f"({self.valence}, {self.arousal})"
            )
        if self.chunk_count < 1:
            raise DataError(f"{self.artist!r}/{self.title!r}: chunk_count must be >= 1")

    @property
    def va(self) -> VAPoint:
        return VAPoint(self.valence, self.arousal)

    @property
    def bin_id(self) -> int:
        return va_bin(self.va).id


@dataclass(frozen=True)
class SongDatabase:
    songs: tuple[AnnotatedSong, ...]
    model_tag: str
    scaler: VAScaler | None = None

    def __len__(self) -> int:
        return len(self.songs)


def chunk_lyrics(body: str, chunk_words: int = DEFAULT_CHUNK_WORDS) -> list[str]:
    """Split into consecutive windows of at most chunk_words words.

    Words are whitespace tokens; each chunk is the window rejoined with
    single spaces, so only the final chunk can be short. Empty input
    yields no chunks.
    """
    if chunk_words <= 0:
        raise ValueError(f"chunk_words must be positive, got {chunk_words}")
    words = body.split()
    return [" ".join(words[i:i + chunk_words]) for i in range(0, len(words), chunk_words)]


def annotate_song(head: WideDeepHead, scaler: VAScaler, store: EmbeddingStore,
                  song: SongRecord, chunk_words: int = DEFAULT_CHUNK_WORDS) -> AnnotatedSong:
    """Predict one VA point for a song as the mean over its lyric chunks.

    Every chunk must have a stored embedding; otherwise the error lists all
    missing keys so the embedding export can be regenerated in one pass.
    """
    chunks = chunk_lyrics(song.lyrics, chunk_words)
    if not chunks:
        raise DataError(f"{song.artist_raw!r}/{song.title!r}: no words to annotate")
    missing = [text_key(c) for c in chunks if text_key(c) not in store]
    if missing:
        raise MissingEmbeddingError(missing)
    x_deep = np.stack([store.entries[text_key(c)] for c in chunks])
    x_wide = np.stack([wide_feature(c) for c in chunks])
    preds_std = forward_batch(head, x_deep, x_wide)
    # Mean accumulated in chunk-index order: summation order is part of the
    # determinism contract, so no pairwise tricks here.
    v_sum = 0.0
    a_sum = 0.0
    for i in range(len(chunks)):
        point = destandardize(preds_std[i], scaler)
        v_sum += point.valence
        a_sum += point.arousal
    return AnnotatedSong(
        artist=song.artist_raw,
        artist_norm=song.artist_norm,
        title=song.title,
        valence=v_sum / len(chunks),
        arousal=a_sum / len(chunks),
        chunk_count=len(chunks),
    )


def annotate_catalog(head: WideDeepHead, scaler: VAScaler, store: EmbeddingStore,
                     catalog: Catalog, model_tag: str,
                     chunk_words: int = DEFAULT_CHUNK_WORDS):
    """Annotate every song in input order; returns (SongDatabase, skipped).

    Songs whose chunks lack embeddings are skipped and reported as
    (artist, title, reason) tuples rather than failing the batch. An empty
    catalog or a fully skipped one is an error.
    """
    if not catalog.songs:
        raise DataError("catalog has no songs to annotate")
    annotated = []
    skipped = []
    for song in catalog.songs:
        try:
            annotated.append(annotate_song(head, scaler, store, song, chunk_words))
        except MissingEmbeddingError as exc:
            skipped.append((song.artist_raw, song.title, str(exc)))
    if not annotated:
        raise DataError(f"all {len(catalog.songs)} songs were skipped; embeddings missing")
    return SongDatabase(songs=tuple(annotated), model_tag=model_tag, scaler=scaler), skipped


def save_song_db(db: SongDatabase, path) -> None:
    """Write songdb.v1 JSONL: a header line, then one row per song.

    Reals are written at 9 significant digits directly, so re-serializing a
    loaded database reproduces the file byte for byte.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header: dict = {"format": SONGDB_FORMAT, "model": db.model_tag}
        if db.scaler is not None:
            header["scaler"] = {
                "mean": [float(x) for x in db.scaler.mean],
                "std": [float(x) for x in db.scaler.std],
            }
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for song in db.songs:
            fh.write(
                '{"artist_norm":%s,"artist":%s,"title":%s,"v":%s,"a":%s,"chunks":%d}\n'
                % (
                    json.dumps(song.artist_norm, ensure_ascii=False),
                    json.dumps(song.artist, ensure_ascii=False),
                    json.dumps(song.title, ensure_ascii=False),
                    format_real(song.valence),
                    format_real(song.arousal),
                    song.chunk_count,
                )
            )


def load_song_db(path) -> SongDatabase:
    """Read songdb.v1, validating the header, field types, and key uniqueness."""
    songs = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise FormatError(f"{path}: empty song database")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: line 1: bad header: {exc}") from None
        if not isinstance(header, dict):
            raise FormatError(f"{path}: line 1: header must be an object")
        if header.get("format") != SONGDB_FORMAT:
            raise FormatError(
                f"{path}: line 1: expected format {SONGDB_FORMAT!r}, got {header.get('format')!r}"
            )
        model_tag = header.get("model")
        if not isinstance(model_tag, str) or not model_tag:
            raise FormatError(f"{path}: line 1: header missing model tag")
        scaler = None
        if "scaler" in header:
            try:
                scaler = VAScaler(
                    mean=np.array(header["scaler"]["mean"], dtype=np.float64),
                    std=np.array(header["scaler"]["std"], dtype=np.float64),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}: line 1: malformed scaler echo: {exc}") from None
        for line_num, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {line_num}: bad row: {exc}") from None
            try:
                artist_norm = row["artist_norm"]
                artist = row["artist"]
                title = row["title"]
                v = float(row["v"])
                a = float(row["a"])
                chunks = row["chunks"]
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path}: line {line_num}: malformed row: {exc}") from None
            if not (isinstance(artist, str) and isinstance(artist_norm, str)
                    and isinstance(title, str)):
                raise DataError(f"{path}: line {line_num}: text fields must be strings")
            if not (math.isfinite(v) and math.isfinite(a)):
                raise DataError(f"{path}: line {line_num}: non-finite VA ({v}, {a})")
            if not isinstance(chunks, int) or chunks < 1:
                raise DataError(f"{path}: line {line_num}: chunks must be a positive integer")
            key = (artist_norm, title)
            if key in seen:
                raise DataError(f"{path}: line {line_num}: duplicate song {key!r}")
            seen.add(key)
            songs.append(AnnotatedSong(artist=artist, artist_norm=artist_norm, title=title,
                                       valence=v, arousal=a, chunk_count=chunks))
    if not songs:
        raise DataError(f"{path}: song database has no rows")
    return SongDatabase(songs=tuple(songs), model_tag=model_tag, scaler=scaler)
