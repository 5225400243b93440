"""User profiles and the two emotion memory tables.

The play log only records per-artist counts, so an artist's plays are split
equally across that artist's annotated songs before being accumulated into
the user-by-emotion and emotion-by-artist tables. Both tables are
row-normalized into preference distributions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .annotator import SongDatabase
from .corpus import Catalog
from .errors import DataError, FormatError
from .features import N_EMOTION_BINS, EmotionBin

ENGAGEMENT_LEVELS = ("low", "medium", "high", "super")

MEMTAB_FORMAT = "memtab.v1"
KIND_USER_EMOTION = "user_emotion"
KIND_EMOTION_ARTIST = "emotion_artist"


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    top_artist_norm: str
    total_plays: int
    engagement: str


@dataclass(frozen=True)
class UserEmotionTable:
    """user_id -> 9 bin shares summing to 1; users with no matched plays have no row."""

    rows: dict[str, tuple[float, ...]]


@dataclass(frozen=True)
class EmotionArtistTable:
    """bin id -> {artist_norm: share}; non-empty rows sum to 1."""

    rows: dict[int, dict[str, float]]


def top_artist(plays_by_artist: dict[str, int]) -> str:
    """Most-played artist_norm for one user; lexicographic tie-break."""
    if not plays_by_artist:
        raise DataError("user has no play records")
    return min(plays_by_artist, key=lambda a: (-plays_by_artist[a], a))


def _nearest_rank(sorted_totals: list[int], p: float) -> int:
    # Exclusive nearest-rank: rank = ceil(p * (N + 1)), clamped into [1, N].
    n = len(sorted_totals)
    rank = min(n, max(1, math.ceil(p * (n + 1))))
    return sorted_totals[rank - 1]


def engagement_level(total_plays: int, all_user_totals) -> str:
    """Quartile bucket of one user's total against the per-user population.

    Below Q1 is low, [Q1, Q2) medium, [Q2, Q3) high, and at or above Q3
    super; quartiles use the nearest-rank method, so every threshold is an
    actual population value.
    """
    totals = sorted(all_user_totals)
    if not totals:
        raise DataError("cannot bucket engagement for an empty population")
    q1 = _nearest_rank(totals, 0.25)
    q2 = _nearest_rank(totals, 0.50)
    q3 = _nearest_rank(totals, 0.75)
    if total_plays >= q3:
        return "super"
    if total_plays >= q2:
        return "high"
    if total_plays >= q1:
        return "medium"
    return "low"


def build_user_profiles(plays) -> dict[str, UserProfile]:
    """One profile per user in the play log.

    Totals count every play, whether or not the artist joined the lyrics
    catalog: engagement describes listening volume, not catalog coverage.
    """
    per_user: dict[str, dict[str, int]] = {}
    for rec in plays:
        per_user.setdefault(rec.user_id, {})
        per_user[rec.user_id][rec.artist_norm] = (
            per_user[rec.user_id].get(rec.artist_norm, 0) + rec.play_count
        )
    totals = {uid: sum(artists.values()) for uid, artists in per_user.items()}
    population = list(totals.values())
    profiles = {}
    for uid in sorted(per_user):
        profiles[uid] = UserProfile(
            user_id=uid,
            top_artist_norm=top_artist(per_user[uid]),
            total_plays=totals[uid],
            engagement=engagement_level(totals[uid], population),
        )
    return profiles


def build_memory_tables(catalog: Catalog, song_db: SongDatabase):
    """Accumulate equal-split play mass into both tables, then row-normalize.

    Returns (UserEmotionTable, EmotionArtistTable). Play records whose
    artist has no annotated song contribute nothing; an empty intersection
    yields empty tables. Accumulation runs over pre-merged (user, artist)
    pairs in sorted order, so the result is independent of play-record
    input order.
    """
    songs_by_artist: dict[str, list] = {}
    for song in song_db.songs:
        songs_by_artist.setdefault(song.artist_norm, []).append(song)

    merged: dict[tuple[str, str], int] = {}
    for rec in catalog.plays:
        key = (rec.user_id, rec.artist_norm)
        merged[key] = merged.get(key, 0) + rec.play_count

    ue_mass: dict[str, list[float]] = {}
    ea_mass: dict[int, dict[str, float]] = {}
    for user_id, artist_norm in sorted(merged):
        plays = merged[(user_id, artist_norm)]
        songs = songs_by_artist.get(artist_norm)
        if not songs:
            continue
        share = plays / len(songs)
        row = ue_mass.setdefault(user_id, [0.0] * N_EMOTION_BINS)
        for song in songs:
            b = song.bin_id
            row[b] += share
            ea_row = ea_mass.setdefault(b, {})
            ea_row[artist_norm] = ea_row.get(artist_norm, 0.0) + share

    ue_rows = {}
    for user_id in sorted(ue_mass):
        total = sum(ue_mass[user_id])
        if total > 0:
            ue_rows[user_id] = tuple(x / total for x in ue_mass[user_id])
    ea_rows = {}
    for b in sorted(ea_mass):
        total = sum(ea_mass[b].values())
        if total > 0:
            ea_rows[b] = {a: ea_mass[b][a] / total for a in sorted(ea_mass[b])}
    return UserEmotionTable(rows=ue_rows), EmotionArtistTable(rows=ea_rows)


def _bin_id(emotion_bin) -> int:
    b = emotion_bin.id if isinstance(emotion_bin, EmotionBin) else int(emotion_bin)
    if not 0 <= b < N_EMOTION_BINS:
        raise ValueError(f"bin id {b} outside [0, {N_EMOTION_BINS})")
    return b


def lookup_mem_ue(table: UserEmotionTable, user_id: str, emotion_bin) -> float:
    """User's share for the bin; 0 for unknown users (cold start)."""
    row = table.rows.get(user_id)
    return row[_bin_id(emotion_bin)] if row is not None else 0.0


def lookup_mem_ea(table: EmotionArtistTable, emotion_bin, artist_norm: str) -> float:
    """Artist's share within the bin; 0 when either is absent."""
    return table.rows.get(_bin_id(emotion_bin), {}).get(artist_norm, 0.0)


def _write_memtab(path, kind: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"format": MEMTAB_FORMAT, "kind": kind},
                            separators=(",", ":")) + "\n")
        for row in rows:
            # Default float serialization (repr) keeps the roundtrip lossless,
            # which the 1e-9 row-sum invariant relies on.
            fh.write(json.dumps(row, separators=(",", ":"), ensure_ascii=False) + "\n")


def _read_memtab(path, kind: str):
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise FormatError(f"{path}: empty memory table file")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: line 1: bad header: {exc}") from None
        if not isinstance(header, dict) or header.get("format") != MEMTAB_FORMAT:
            raise FormatError(f"{path}: line 1: expected format {MEMTAB_FORMAT!r}")
        if header.get("kind") != kind:
            raise FormatError(
                f"{path}: line 1: kind {header.get('kind')!r}, expected {kind!r}"
            )
        rows = []
        for line_num, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rows.append((line_num, json.loads(line)))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {line_num}: bad row: {exc}") from None
    return rows


def save_user_emotion_table(table: UserEmotionTable, path) -> None:
    rows = [{"user": uid, "p": list(table.rows[uid])} for uid in sorted(table.rows)]
    _write_memtab(path, KIND_USER_EMOTION, rows)


def load_user_emotion_table(path) -> UserEmotionTable:
    rows = {}
    for line_num, row in _read_memtab(path, KIND_USER_EMOTION):
        try:
            uid = row["user"]
            p = [float(x) for x in row["p"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}: line {line_num}: malformed row: {exc}") from None
        if not isinstance(uid, str):
            raise DataError(f"{path}: line {line_num}: user must be a string")
        if len(p) != N_EMOTION_BINS:
            raise DataError(f"{path}: line {line_num}: row must have {N_EMOTION_BINS} entries")
        if any(not math.isfinite(x) or x < 0 for x in p):
            raise DataError(f"{path}: line {line_num}: entries must be finite and non-negative")
        if uid in rows:
            raise DataError(f"{path}: line {line_num}: duplicate user {uid!r}")
        rows[uid] = tuple(p)
    return UserEmotionTable(rows=rows)


def save_emotion_artist_table(table: EmotionArtistTable, path) -> None:
    rows = [
        {"bin": b, "artists": {a: table.rows[b][a] for a in sorted(table.rows[b])}}
        for b in sorted(table.rows)
    ]
    _write_memtab(path, KIND_EMOTION_ARTIST, rows)


def load_emotion_artist_table(path) -> EmotionArtistTable:
    rows: dict[int, dict[str, float]] = {}
    for line_num, row in _read_memtab(path, KIND_EMOTION_ARTIST):
        try:
            b = int(row["bin"])
            artists = {str(a): float(x) for a, x in row["artists"].items()}
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DataError(f"{path}: line {line_num}: malformed row: {exc}") from None
        if not 0 <= b < N_EMOTION_BINS:
            raise DataError(f"{path}: line {line_num}: bin id {b} out of range")
        if any(not math.isfinite(x) or x < 0 for x in artists.values()):
            raise DataError(f"{path}: line {line_num}: entries must be finite and non-negative")
        if b in rows:
            raise DataError(f"{path}: line {line_num}: duplicate bin {b}")
        rows[b] = artists
    return EmotionArtistTable(rows=rows)
