"""Query encoding, candidate filtering, scoring, and top-k ranking.

score = -||q_VA - s_VA||_2 + weight_ue * mem_ue + weight_ea * mem_ea

Both memory terms are evaluated at the query's bin. The candidate pool is
the user's top-artist songs when any exist in the database, otherwise the
full database.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .annotator import AnnotatedSong, SongDatabase
from .embedder import EmbeddingStore
from .errors import DataError
from .features import EmotionBin, VAPoint, VAScaler, va_bin
from .memory import (
    EmotionArtistTable,
    UserEmotionTable,
    UserProfile,
    lookup_mem_ea,
    lookup_mem_ue,
)
from .model import WideDeepHead, predict_va


@dataclass(frozen=True)
class Query:
    body: str
    va: VAPoint
    bin: EmotionBin
    user_id: str | None = None


@dataclass(frozen=True)
class ScoredSong:
    song: AnnotatedSong
    distance: float
    mem_ue: float
    mem_ea: float
    score: float


@dataclass(frozen=True)
class RecommendConfig:
    k: int = 5
    weight_ue: float = 1.0
    weight_ea: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")


def encode_query(user_id: str | None, body: str, head: WideDeepHead,
                 scaler: VAScaler, store: EmbeddingStore) -> Query:
    """Free text to a Query with its predicted VA point and emotion bin."""
    va = predict_va(head, scaler, store, body)
    return Query(body=body, va=va, bin=va_bin(va), user_id=user_id)


def candidate_pool(query: Query, song_db: SongDatabase,
                   profiles: dict[str, UserProfile]) -> list[AnnotatedSong]:
    """Songs by the user's top artist, or the whole database.

    Unknown users, users without a profile, and top artists with no
    annotated songs all fall back to the full pool.
    """
    if not song_db.songs:
        raise DataError("song database is empty")
    profile = profiles.get(query.user_id) if query.user_id is not None else None
    if profile is not None:
        matches = [s for s in song_db.songs if s.artist_norm == profile.top_artist_norm]
        if matches:
            return matches
    return list(song_db.songs)


def score_song(query: Query, song: AnnotatedSong, tables, config: RecommendConfig) -> ScoredSong:
    """Score one candidate; ``tables`` is the (user_emotion, emotion_artist) pair.

    The arithmetic mirrors the batch kernel operation for operation, so the
    scalar and batch paths agree bitwise.
    """
    ue_table, ea_table = tables
    mem_ue = lookup_mem_ue(ue_table, query.user_id, query.bin) if query.user_id else 0.0
    mem_ea = lookup_mem_ea(ea_table, query.bin, song.artist_norm)
    dv = song.valence - query.va.valence
    da = song.arousal - query.va.arousal
    dist = math.sqrt(dv * dv + da * da)
    score = -dist + config.weight_ue * mem_ue + config.weight_ea * mem_ea
    return ScoredSong(song=song, distance=dist, mem_ue=mem_ue, mem_ea=mem_ea, score=score)


def _rank_key(scored: ScoredSong):
    return (-scored.score, scored.song.artist_norm, scored.song.title)


def recommend_top_k(query: Query, song_db: SongDatabase, tables,
                    profiles: dict[str, UserProfile],
                    config: RecommendConfig | None = None) -> list[ScoredSong]:
    """Top-k candidates by score, descending; ties by (artist_norm, title)."""
    if config is None:
        config = RecommendConfig()
    ue_table, ea_table = tables
    pool = candidate_pool(query, song_db, profiles)
    n = len(pool)
    song_va = np.empty((n, 2), dtype=np.float64)
    mem_ea = np.empty(n, dtype=np.float64)
    for i, song in enumerate(pool):
        song_va[i, 0] = song.valence
        song_va[i, 1] = song.arousal
        mem_ea[i] = lookup_mem_ea(ea_table, query.bin, song.artist_norm)
    ue = lookup_mem_ue(ue_table, query.user_id, query.bin) if query.user_id else 0.0
    mem_ue = np.full(n, ue, dtype=np.float64)
    dist, scores = kernels.score_candidates(
        song_va, query.va.valence, query.va.arousal, mem_ea, mem_ue,
        config.weight_ue, config.weight_ea,
    )
    scored = [
        ScoredSong(song=pool[i], distance=float(dist[i]), mem_ue=float(mem_ue[i]),
                   mem_ea=float(mem_ea[i]), score=float(scores[i]))
        for i in range(n)
    ]
    scored.sort(key=_rank_key)
    return scored[:config.k]
