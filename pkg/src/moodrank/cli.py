"""Command-line pipeline: train, annotate, build-memory, recommend, stats, eval.

All commands read one JSON run-config; flags override config values. Output
tables are TSV on stdout, notices and diagnostics go to stderr. Exit codes:
0 success, 1 usage, 2 data/validation, 3 internal.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .annotator import annotate_catalog, load_song_db, save_song_db
from .corpus import join_catalog, parse_emotion_corpus, parse_lyrics_catalog, parse_play_log
from .embedder import format_real, load_embedding_store
from .engine import RecommendConfig, encode_query, recommend_top_k
from .errors import DataError, MoodRankError, UsageError
from .features import VA_MAX, VA_MIN
from .memory import (
    build_memory_tables,
    build_user_profiles,
    load_emotion_artist_table,
    load_user_emotion_table,
    save_emotion_artist_table,
    save_user_emotion_table,
)
from .model import (
    TrainConfig,
    build_features,
    evaluate_predictions,
    forward_batch,
    load_checkpoint,
    save_checkpoint,
    split_indices,
    train,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

HIST_BIN_WIDTH = 0.25
EXTREME_LOW = 1.5
EXTREME_HIGH = 4.5

_PATH_KEYS = (
    "emotion_corpus",
    "lyrics",
    "play_log",
    "embeddings",
    "checkpoint",
    "song_db",
    "mem_user_emotion",
    "mem_emotion_artist",
)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    paths: dict[str, Path]
    train: TrainConfig
    recommend: RecommendConfig
    chunk_words: int


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; route through UsageError for exit 1.
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="moodrank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        return p

    p = add("train", "fit the regression head and write a checkpoint")
    p.add_argument("--seed", type=int, help="override the configured training seed")
    add("annotate", "predict VA for every catalog song and write the song DB")
    add("build-memory", "build and write both memory tables")
    p = add("recommend", "rank songs for a mood query")
    p.add_argument("--user", help="user id for personalization")
    p.add_argument("--text", help="mood query text")
    p.add_argument("--k", type=int, help="override the configured result count")
    p.add_argument("--repl", action="store_true",
                   help="read one query per stdin line until end-of-input")
    p = add("stats", "VA histogram and extreme counts")
    p.add_argument("--songdb", action="store_true",
                   help="report on the annotated song DB instead of the emotion corpus")
    p = add("eval", "recompute validation metrics from a checkpoint")
    p.add_argument("--seed", type=int, help="override the configured split seed")
    return parser


def _dataclass_from(mapping, cls, where: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(mapping) - set(fields))
    if unknown:
        raise DataError(f"{where}: unknown keys {unknown}")
    kwargs = {}
    for name, value in mapping.items():
        want = fields[name].type
        if want in ("int", int) and not isinstance(value, int):
            raise DataError(f"{where}: {name} must be an integer")
        if want in ("float", float) and not isinstance(value, (int, float)):
            raise DataError(f"{where}: {name} must be a number")
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise DataError(f"{where}: {exc}") from None


def load_run_config(path: str) -> RunConfig:
    """Parse the JSON run config; relative paths resolve against its directory."""
    config_path = Path(path)
    try:
        with open(config_path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"config file not found: {config_path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{config_path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DataError(f"{config_path}: config must be a JSON object")
    unknown = sorted(set(doc) - {"paths", "train", "recommend", "chunk_words"})
    if unknown:
        raise DataError(f"{config_path}: unknown keys {unknown}")
    raw_paths = doc.get("paths", {})
    if not isinstance(raw_paths, dict):
        raise DataError(f"{config_path}: paths must be an object")
    bad = sorted(set(raw_paths) - set(_PATH_KEYS))
    if bad:
        raise DataError(f"{config_path}: unknown path keys {bad}")
    base = config_path.resolve().parent
    paths = {k: base / str(v) for k, v in raw_paths.items()}
    chunk_words = doc.get("chunk_words", 50)
    if not isinstance(chunk_words, int) or chunk_words < 1:
        raise DataError(f"{config_path}: chunk_words must be a positive integer")
    return RunConfig(
        paths=paths,
        train=_dataclass_from(doc.get("train", {}), TrainConfig, f"{config_path}: train"),
        recommend=_dataclass_from(doc.get("recommend", {}), RecommendConfig,
                                  f"{config_path}: recommend"),
        chunk_words=chunk_words,
    )


def _need_paths(config: RunConfig, keys, output_keys=()) -> None:
    for key in (*keys, *output_keys):
        if key not in config.paths:
            raise DataError(f"run config has no {key!r} path")
    for key in keys:
        if not config.paths[key].exists():
            raise DataError(f"{key} path does not exist: {config.paths[key]}")


def _row(*cells) -> None:
    out = []
    for cell in cells:
        out.append(format_real(cell) if isinstance(cell, float) else str(cell))
    sys.stdout.write("\t".join(out) + "\n")


def _note(message: str) -> None:
    sys.stderr.write(message + "\n")


def cmd_train(args) -> int:
    config = load_run_config(args.config)
    _need_paths(config, ["emotion_corpus", "embeddings"], output_keys=["checkpoint"])
    train_config = config.train
    if args.seed is not None:
        train_config = dataclasses.replace(train_config, seed=args.seed)
    sentences = parse_emotion_corpus(config.paths["emotion_corpus"])
    store = load_embedding_store(config.paths["embeddings"])
    head, scaler, report = train(sentences, store, train_config)
    save_checkpoint(head, scaler, train_config, config.paths["checkpoint"])
    _row("epoch", "train_loss", "val_loss", "val_r2")
    for epoch in range(len(report.train_loss)):
        _row(epoch + 1, report.train_loss[epoch], report.val_loss[epoch],
             report.val_r2[epoch])
    _note(f"checkpoint written to {config.paths['checkpoint']}")
    return EXIT_OK


def cmd_annotate(args) -> int:
    config = load_run_config(args.config)
    _need_paths(config, ["lyrics", "embeddings", "checkpoint"], output_keys=["song_db"])
    songs = parse_lyrics_catalog(config.paths["lyrics"])
    store = load_embedding_store(config.paths["embeddings"])
    head, scaler, _ = load_checkpoint(config.paths["checkpoint"])
    catalog = join_catalog(songs, [])
    db, skipped = annotate_catalog(head, scaler, store, catalog, store.model_tag,
                                   config.chunk_words)
    save_song_db(db, config.paths["song_db"])
    for artist, title, reason in skipped:
        _note(f"skipped {artist!r}/{title!r}: {reason}")
    _row("annotated", len(db.songs))
    _row("skipped", len(skipped))
    return EXIT_OK


def cmd_build_memory(args) -> int:
    config = load_run_config(args.config)
    _need_paths(config, ["lyrics", "play_log", "song_db"],
                output_keys=["mem_user_emotion", "mem_emotion_artist"])
    songs = parse_lyrics_catalog(config.paths["lyrics"])
    plays = parse_play_log(config.paths["play_log"])
    catalog = join_catalog(songs, plays)
    db = load_song_db(config.paths["song_db"])
    ue_table, ea_table = build_memory_tables(catalog, db)
    save_user_emotion_table(ue_table, config.paths["mem_user_emotion"])
    save_emotion_artist_table(ea_table, config.paths["mem_emotion_artist"])
    db_artists = {s.artist_norm for s in db.songs}
    matched = sorted({p.artist_norm for p in plays} & db_artists)
    if not matched:
        _note("warning: no play-log artist matches the song DB; tables are empty")
    _row("matched_artists", len(matched))
    return EXIT_OK


def _print_recommendation(query, results) -> None:
    _row("query", query.va.valence, query.va.arousal, query.bin.id)
    _row("artist", "title", "v_pred", "a_pred", "score")
    for scored in results:
        _row(scored.song.artist, scored.song.title, scored.song.valence,
             scored.song.arousal, scored.score)


def _recommend_once(body: str, user_id, head, scaler, store, db, tables,
                    profiles, rec_config) -> None:
    query = encode_query(user_id, body, head, scaler, store)
    if user_id is not None:
        profile = profiles.get(user_id)
        if profile is None:
            _note(f"note: user {user_id!r} has no play history; using the full pool")
        elif not any(s.artist_norm == profile.top_artist_norm for s in db.songs):
            _note(f"note: top artist {profile.top_artist_norm!r} has no annotated songs; "
                  "using the full pool")
    results = recommend_top_k(query, db, tables, profiles, rec_config)
    _print_recommendation(query, results)


def cmd_recommend(args) -> int:
    if args.repl and args.text is not None:
        raise UsageError("--repl and --text are mutually exclusive")
    if not args.repl and (args.text is None or not args.text.strip()):
        raise UsageError("--text must be a non-empty query (or pass --repl)")
    config = load_run_config(args.config)
    _need_paths(config, ["embeddings", "checkpoint", "song_db", "play_log",
                         "mem_user_emotion", "mem_emotion_artist"])
    store = load_embedding_store(config.paths["embeddings"])
    head, scaler, _ = load_checkpoint(config.paths["checkpoint"])
    db = load_song_db(config.paths["song_db"])
    plays = parse_play_log(config.paths["play_log"])
    profiles = build_user_profiles(plays)
    tables = (
        load_user_emotion_table(config.paths["mem_user_emotion"]),
        load_emotion_artist_table(config.paths["mem_emotion_artist"]),
    )
    rec_config = config.recommend
    if args.k is not None:
        if args.k < 1:
            raise UsageError("--k must be at least 1")
        rec_config = dataclasses.replace(rec_config, k=args.k)
    if args.repl:
        for line in sys.stdin:
            body = line.strip()
            if not body:
                continue
            _recommend_once(body, args.user, head, scaler, store, db, tables,
                            profiles, rec_config)
            sys.stdout.flush()
        return EXIT_OK
    _recommend_once(args.text.strip(), args.user, head, scaler, store, db, tables,
                    profiles, rec_config)
    return EXIT_OK


def _histogram(values) -> list[int]:
    n_bins = round((VA_MAX - VA_MIN) / HIST_BIN_WIDTH)
    counts = [0] * n_bins
    for v in values:
        idx = int((v - VA_MIN) / HIST_BIN_WIDTH)
        counts[min(n_bins - 1, max(0, idx))] += 1
    return counts


def cmd_stats(args) -> int:
    config = load_run_config(args.config)
    if args.songdb:
        _need_paths(config, ["song_db"])
        db = load_song_db(config.paths["song_db"])
        valence = [s.valence for s in db.songs]
        arousal = [s.arousal for s in db.songs]
    else:
        _need_paths(config, ["emotion_corpus"])
        sentences = parse_emotion_corpus(config.paths["emotion_corpus"])
        valence = [s.valence for s in sentences]
        arousal = [s.arousal for s in sentences]
    if not valence:
        raise DataError("no rows to report on")
    _row("rows", len(valence))
    for axis, values in (("valence", valence), ("arousal", arousal)):
        counts = _histogram(values)
        for i, count in enumerate(counts):
            _row("hist", axis, VA_MIN + i * HIST_BIN_WIDTH,
                 VA_MIN + (i + 1) * HIST_BIN_WIDTH, count)
    for axis, values in (("valence", valence), ("arousal", arousal)):
        extreme = sum(1 for v in values if v < EXTREME_LOW or v > EXTREME_HIGH)
        _row("extreme", axis, extreme)
    return EXIT_OK


def cmd_eval(args) -> int:
    config = load_run_config(args.config)
    _need_paths(config, ["emotion_corpus", "embeddings", "checkpoint"])
    sentences = parse_emotion_corpus(config.paths["emotion_corpus"])
    store = load_embedding_store(config.paths["embeddings"])
    head, scaler, echo = load_checkpoint(config.paths["checkpoint"])
    trained = echo.get("train") or {}

    seed = args.seed if args.seed is not None else config.train.seed
    if "seed" in trained and trained["seed"] != seed:
        _note(f"warning: evaluating with seed {seed} but the checkpoint was trained "
              f"with seed {trained['seed']}; the split differs from training")
    val_fraction = trained.get("validation_fraction", config.train.validation_fraction)
    beta = trained.get("smooth_l1_beta", config.train.smooth_l1_beta)

    x_deep, x_wide = build_features(sentences, store)
    _, val_idx = split_indices(len(sentences), val_fraction, seed)
    targets = np.array([[s.valence, s.arousal] for s in sentences], dtype=np.float64)
    targets_std = (targets - scaler.mean) / scaler.std
    preds = forward_batch(head, x_deep[val_idx], x_wide[val_idx])
    val_loss, val_r2 = evaluate_predictions(preds, targets_std[val_idx], beta)
    _row("n_val", len(val_idx))
    _row("val_loss", val_loss)
    _row("val_r2", val_r2)
    return EXIT_OK


_COMMANDS = {
    "train": cmd_train,
    "annotate": cmd_annotate,
    "build-memory": cmd_build_memory,
    "recommend": cmd_recommend,
    "stats": cmd_stats,
    "eval": cmd_eval,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: file not found: {exc.filename}\n")
        return EXIT_DATA
    except (MoodRankError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except BrokenPipeError:
        return EXIT_OK
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
