"""Input datasets: parsing, validation, artist-name normalization, joining.

Three file formats feed the pipeline: an emotion-labeled sentence corpus
(CSV ``id,text,V,A``), a lyrics catalog (CSV ``artist,song,text``), and a
play log (TSV ``user_id/artist_name/plays``). Rows that fail validation
abort the parse with a line-numbered error so corpus bugs surface early.
"""

from __future__ import annotations

import csv
import math
import unicodedata
from dataclasses import dataclass

from .errors import DataError
from .features import VA_MAX, VA_MIN

EMOTION_HEADER = ["id", "text", "V", "A"]
LYRICS_HEADER = ["artist", "song", "text"]
PLAYLOG_HEADER = ["user_id", "artist_name", "plays"]


@dataclass(frozen=True)
class EmotionSentence:
    id: str
    body: str
    valence: float
    arousal: float


@dataclass(frozen=True)
class SongRecord:
    artist_raw: str
    artist_norm: str
    title: str
    lyrics: str


@dataclass(frozen=True)
class PlayRecord:
    user_id: str
    artist_raw: str
    artist_norm: str
    play_count: int


@dataclass(frozen=True)
class Catalog:
    songs: tuple[SongRecord, ...]
    plays: tuple[PlayRecord, ...]
    joined_artists: frozenset[str]


def _normalize_pass(text: str) -> str:
    text = unicodedata.normalize("NFKC", text).lower()
    text = "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))
    return " ".join(text.split())


def normalize_artist_name(raw: str) -> str:
    """Canonical artist key: NFKC, lowercase, punctuation stripped, spaces collapsed.

    Removing punctuation can juxtapose characters that NFKC then composes, so
    the pass is iterated to a fixed point to keep the function idempotent.
    """
    out = _normalize_pass(raw)
    while True:
        nxt = _normalize_pass(out)
        if nxt == out:
            return out
        out = nxt


def _read_rows(path, expected_header, delimiter=","):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected header {expected_header}") from None
        if header != expected_header:
            raise DataError(f"{path}:1: bad header {header!r}, expected {expected_header!r}")
        rows = []
        for row in reader:
            rows.append((reader.line_num, row))
        return rows


def _parse_score(raw: str, name: str, path, line: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise DataError(f"{path}:{line}: {name} is not a number: {raw!r}") from None
    if not math.isfinite(value) or not VA_MIN <= value <= VA_MAX:
        raise DataError(f"{path}:{line}: {name}={raw} outside [{VA_MIN:g}, {VA_MAX:g}]")
    return value


def parse_emotion_corpus(path) -> list[EmotionSentence]:
    sentences = []
    for line, row in _read_rows(path, EMOTION_HEADER):
        if len(row) != 4:
            raise DataError(f"{path}:{line}: expected 4 fields, got {len(row)}")
        sid, body, v_raw, a_raw = row
        if not body.split():
            raise DataError(f"{path}:{line}: empty sentence text")
        sentences.append(
            EmotionSentence(
                id=sid,
                body=body,
                valence=_parse_score(v_raw, "V", path, line),
                arousal=_parse_score(a_raw, "A", path, line),
            )
        )
    return sentences


def parse_lyrics_catalog(path) -> list[SongRecord]:
    """Parse the lyrics CSV; duplicate (artist_norm, title) rows keep the first."""
    songs = []
    seen = set()
    for line, row in _read_rows(path, LYRICS_HEADER):
        if len(row) != 3:
            raise DataError(f"{path}:{line}: expected 3 fields, got {len(row)}")
        artist_raw, title, lyrics = row
        artist_norm = normalize_artist_name(artist_raw)
        if not artist_norm:
            raise DataError(f"{path}:{line}: artist name normalizes to empty: {artist_raw!r}")
        if not lyrics.split():
            raise DataError(f"{path}:{line}: empty lyrics for {artist_raw!r} / {title!r}")
        key = (artist_norm, title)
        if key in seen:
            continue
        seen.add(key)
        songs.append(SongRecord(artist_raw=artist_raw, artist_norm=artist_norm, title=title, lyrics=lyrics))
    return songs


def parse_play_log(path) -> list[PlayRecord]:
    """Parse the play TSV; rows for the same (user, artist) are summed."""
    order: list[tuple[str, str]] = []
    first_raw: dict[tuple[str, str], str] = {}
    totals: dict[tuple[str, str], int] = {}
    for line, row in _read_rows(path, PLAYLOG_HEADER, delimiter="\t"):
        if len(row) != 3:
            raise DataError(f"{path}:{line}: expected 3 fields, got {len(row)}")
        user_id, artist_raw, plays_raw = row
        artist_norm = normalize_artist_name(artist_raw)
        if not artist_norm:
            raise DataError(f"{path}:{line}: artist name normalizes to empty: {artist_raw!r}")
        try:
            plays = int(plays_raw)
        except ValueError:
            raise DataError(f"{path}:{line}: plays is not an integer: {plays_raw!r}") from None
        if plays < 0:
            raise DataError(f"{path}:{line}: negative play count: {plays}")
        key = (user_id, artist_norm)
        if key not in totals:
            order.append(key)
            first_raw[key] = artist_raw
            totals[key] = 0
        totals[key] += plays
    return [
        PlayRecord(user_id=u, artist_raw=first_raw[(u, a)], artist_norm=a, play_count=totals[(u, a)])
        for u, a in order
    ]


def join_catalog(songs, plays) -> Catalog:
    """Bundle both datasets with the intersection of their normalized artists."""
    song_artists = {s.artist_norm for s in songs}
    play_artists = {p.artist_norm for p in plays}
    return Catalog(
        songs=tuple(songs),
        plays=tuple(plays),
        joined_artists=frozenset(song_artists & play_artists),
    )


def write_emotion_corpus(sentences, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EMOTION_HEADER)
        for s in sentences:
            writer.writerow([s.id, s.body, repr(s.valence), repr(s.arousal)])


def write_lyrics_catalog(songs, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LYRICS_HEADER)
        for s in songs:
            writer.writerow([s.artist_raw, s.title, s.lyrics])


def write_play_log(plays, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(PLAYLOG_HEADER)
        for p in plays:
            writer.writerow([p.user_id, p.artist_raw, str(p.play_count)])
