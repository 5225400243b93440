"""Shared fixture builders for the test suite.

Everything here is seeded and deterministic: stores map each text to a
vector derived from its own digest, so any text set yields a reproducible
store without an encoder.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from moodrank.annotator import AnnotatedSong, SongDatabase, chunk_lyrics
from moodrank.corpus import (
    EmotionSentence,
    PlayRecord,
    SongRecord,
    normalize_artist_name,
    write_emotion_corpus,
    write_lyrics_catalog,
    write_play_log,
)
from moodrank.embedder import EmbeddingStore, save_embedding_store, text_key
from moodrank.features import N_LENGTH_BUCKETS, VAScaler
from moodrank.model import (
    ACT_IDENTITY,
    ACT_RELU,
    DEEP_INPUT_DIM,
    DenseLayer,
    WideDeepHead,
)


def vector_for(text: str, dim: int = DEEP_INPUT_DIM) -> np.ndarray:
    """Deterministic pseudo-embedding keyed by the text's digest."""
    seed = int(text_key(text)[:12], 16)
    return np.random.default_rng(seed).standard_normal(dim)


def hash_store(texts, dim: int = DEEP_INPUT_DIM, tag: str = "test-encoder") -> EmbeddingStore:
    entries = {text_key(t): vector_for(t, dim) for t in texts}
    return EmbeddingStore(dim=dim, model_tag=tag, entries=entries)


def synthetic_corpus(n: int = 2000, seed: int = 123, noise: float = 0.1):
    """Corpus whose standardized VA is a noisy linear map of 4 embedding coords.

    The remaining coordinates carry low-amplitude background so the signal
    is recoverable within a short training budget. Returns
    (sentences, store).
    """
    rng = np.random.default_rng(seed)
    w_map = rng.standard_normal((4, 2))
    entries = {}
    sentences = []
    for i in range(n):
        body = f"synthetic corpus sentence {i} " + "pad " * (i % 25)
        emb = rng.standard_normal(DEEP_INPUT_DIM) * 0.1
        emb[:4] = rng.standard_normal(4)
        z = emb[:4] @ w_map / 2.0 + noise * rng.standard_normal(2)
        v = float(np.clip(3.0 + 0.45 * z[0], 1.0, 5.0))
        a = float(np.clip(3.0 + 0.45 * z[1], 1.0, 5.0))
        entries[text_key(body)] = emb
        sentences.append(EmotionSentence(id=str(i), body=body, valence=v, arousal=a))
    return sentences, EmbeddingStore(dim=DEEP_INPUT_DIM, model_tag="synthetic", entries=entries)


def toy_head(seed: int, deep_dims=(6, 5, 4), wide_dims=(3, 4)) -> WideDeepHead:
    """Small random head for gradient and forward checks."""
    rng = np.random.default_rng(seed)

    def layer(n_in, n_out, act):
        return DenseLayer(
            weights=rng.standard_normal((n_out, n_in)) * 0.5,
            bias=rng.standard_normal(n_out) * 0.1,
            activation=act,
        )

    deep = [layer(deep_dims[i], deep_dims[i + 1], ACT_RELU)
            for i in range(len(deep_dims) - 1)]
    wide = [layer(wide_dims[i], wide_dims[i + 1], ACT_RELU)
            for i in range(len(wide_dims) - 1)]
    fusion = layer(deep_dims[-1] + wide_dims[-1], 2, ACT_IDENTITY)
    return WideDeepHead(deep_branch=deep, wide_branch=wide, fusion=fusion)


def constant_head(valence: float, arousal: float) -> WideDeepHead:
    """Head whose output is (valence, arousal) for every input (zero weights)."""
    deep = [DenseLayer(weights=np.zeros((2, DEEP_INPUT_DIM)), bias=np.zeros(2),
                       activation=ACT_RELU)]
    wide = [DenseLayer(weights=np.zeros((2, N_LENGTH_BUCKETS)), bias=np.zeros(2),
                       activation=ACT_RELU)]
    fusion = DenseLayer(weights=np.zeros((2, 4)),
                        bias=np.array([valence, arousal], dtype=np.float64),
                        activation=ACT_IDENTITY)
    return WideDeepHead(deep_branch=deep, wide_branch=wide, fusion=fusion)


def bucket_head(outputs_by_bucket) -> WideDeepHead:
    """Head whose output depends only on the input's length bucket.

    ``outputs_by_bucket`` maps bucket index -> (valence, arousal); unmapped
    buckets produce (0, 0). Lets chunk-level predictions be staged exactly.
    """
    deep = [DenseLayer(weights=np.zeros((1, DEEP_INPUT_DIM)), bias=np.zeros(1),
                       activation=ACT_RELU)]
    wide = [DenseLayer(weights=np.eye(N_LENGTH_BUCKETS), bias=np.zeros(N_LENGTH_BUCKETS),
                       activation=ACT_RELU)]
    fusion_w = np.zeros((2, 1 + N_LENGTH_BUCKETS))
    for bucket, (v, a) in outputs_by_bucket.items():
        fusion_w[0, 1 + bucket] = v
        fusion_w[1, 1 + bucket] = a
    fusion = DenseLayer(weights=fusion_w, bias=np.zeros(2), activation=ACT_IDENTITY)
    return WideDeepHead(deep_branch=deep, wide_branch=wide, fusion=fusion)


def identity_scaler() -> VAScaler:
    return VAScaler(mean=np.zeros(2), std=np.ones(2))


def make_song(artist: str, title: str, valence: float, arousal: float,
              artist_norm: str | None = None, chunk_count: int = 1) -> AnnotatedSong:
    return AnnotatedSong(
        artist=artist,
        artist_norm=artist_norm if artist_norm is not None else artist.lower(),
        title=title,
        valence=valence,
        arousal=arousal,
        chunk_count=chunk_count,
    )


def make_song_db(songs, tag: str = "test-encoder") -> SongDatabase:
    return SongDatabase(songs=tuple(songs), model_tag=tag)


def random_song_db(n: int, seed: int, n_artists: int = 0) -> SongDatabase:
    """Random annotated songs; artist collisions are intentional for ties."""
    rng = np.random.default_rng(seed)
    n_artists = n_artists or max(2, n // 4)
    songs = []
    for i in range(n):
        a = int(rng.integers(n_artists))
        songs.append(make_song(f"Artist {a}", f"song {i:04d}",
                               float(rng.uniform(1, 5)), float(rng.uniform(1, 5)),
                               artist_norm=f"artist {a}"))
    return make_song_db(songs)


QUERY_TEXTS = (
    "feeling calm and happy in the sunshine",
    "sad and slow rainy evening",
    "full of energy and ready to run",
)

WORKSPACE_LYRICS = (
    ("Enya", "Orinoco Flow", 120),
    ("Enya", "Only Time", 40),
    ("Metallica", "Hardwired", 95),
    ("Metallica", "One", 130),
    ("Sigur Rós", "Svefn-g-englar", 60),
    ("Adele", "Hello", 75),
)

WORKSPACE_PLAYS = (
    ("u1", "Enya", 30),
    ("u1", "Metallica", 10),
    ("u2", "Metallica", 25),
    ("u2", "Adele", 5),
    ("u3", "Unknown Band", 12),
    ("u4", "Adele", 3),
)


def _lyric_body(artist: str, title: str, n_words: int) -> str:
    slug = "".join(ch for ch in (artist + title).lower() if ch.isalnum())
    return " ".join(f"{slug}{i}" for i in range(n_words))


def build_workspace(root: Path, n_sentences: int = 60, chunk_words: int = 50,
                    epochs: int = 2, seed: int = 7) -> Path:
    """Write a complete CLI workspace under ``root``; returns the config path.

    The embedding store covers every corpus sentence, every lyric chunk, and
    the canned QUERY_TEXTS, so all commands can run offline.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    sentences, _ = synthetic_corpus(n=n_sentences, seed=seed)
    write_emotion_corpus(sentences, root / "emotion.csv")

    songs = [
        SongRecord(artist_raw=artist, artist_norm=normalize_artist_name(artist),
                   title=title, lyrics=_lyric_body(artist, title, n_words))
        for artist, title, n_words in WORKSPACE_LYRICS
    ]
    write_lyrics_catalog(songs, root / "lyrics.csv")

    plays = [
        PlayRecord(user_id=u, artist_raw=a, artist_norm=normalize_artist_name(a),
                   play_count=c)
        for u, a, c in WORKSPACE_PLAYS
    ]
    write_play_log(plays, root / "plays.tsv")

    texts = [s.body for s in sentences]
    for song in songs:
        texts.extend(chunk_lyrics(song.lyrics, chunk_words))
    texts.extend(QUERY_TEXTS)
    save_embedding_store(hash_store(texts), root / "store.jsonl")

    config = {
        "paths": {
            "emotion_corpus": "emotion.csv",
            "lyrics": "lyrics.csv",
            "play_log": "plays.tsv",
            "embeddings": "store.jsonl",
            "checkpoint": "checkpoint.json",
            "song_db": "songs.jsonl",
            "mem_user_emotion": "mem_ue.jsonl",
            "mem_emotion_artist": "mem_ea.jsonl",
        },
        "train": {"epochs": epochs, "batch_size": 16, "seed": seed},
        "recommend": {"k": 3},
        "chunk_words": chunk_words,
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return config_path
