"""Emotion-adaptive music recommendation over a valence-arousal space.

Pipeline: a wide-and-deep regression head maps sentence embeddings to
valence-arousal points (``model``), lyrics are chunk-averaged into an
annotated song database (``annotator``), play logs become per-user and
per-emotion memory tables (``memory``), and free-text queries are ranked
against the database (``engine``). The ``cli`` module wires these into the
``moodrank`` command.
"""

from .annotator import (
    AnnotatedSong,
    SongDatabase,
    annotate_catalog,
    annotate_song,
    chunk_lyrics,
    load_song_db,
    save_song_db,
)
from .corpus import (
    Catalog,
    EmotionSentence,
    PlayRecord,
    SongRecord,
    join_catalog,
    normalize_artist_name,
    parse_emotion_corpus,
    parse_lyrics_catalog,
    parse_play_log,
)
from .embedder import (
    EmbeddingStore,
    get_embedding,
    load_embedding_store,
    save_embedding_store,
    text_key,
)
from .engine import (
    Query,
    RecommendConfig,
    ScoredSong,
    candidate_pool,
    encode_query,
    recommend_top_k,
    score_song,
)
from .errors import (
    DataError,
    FormatError,
    MissingEmbeddingError,
    MoodRankError,
    UsageError,
)
from .features import (
    EmotionBin,
    VAPoint,
    VAScaler,
    bucket_index,
    destandardize,
    fit_scaler,
    one_hot,
    standardize,
    va_bin,
    wide_feature,
    word_count,
)
from .kernels import active_backend
from .memory import (
    EmotionArtistTable,
    UserEmotionTable,
    UserProfile,
    build_memory_tables,
    build_user_profiles,
    engagement_level,
    load_emotion_artist_table,
    load_user_emotion_table,
    lookup_mem_ea,
    lookup_mem_ue,
    save_emotion_artist_table,
    save_user_emotion_table,
    top_artist,
)
from .model import (
    DenseLayer,
    TrainConfig,
    TrainReport,
    WideDeepHead,
    forward,
    load_checkpoint,
    lr_at_step,
    predict_va,
    r_squared,
    save_checkpoint,
    smooth_l1,
    train,
)

__version__ = "0.1.0"
