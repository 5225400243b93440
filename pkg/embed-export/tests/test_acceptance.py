"""Cross-component acceptance gate.

The engine never sees original texts at lookup time, only digests, so the
exporter and the engine must agree on hashing and chunking to the byte.
Each test prints one ``[PASS] name`` / ``[FAIL] name`` verdict line, then
asserts. The engine package is imported here, in tests only; the tool's
own sources stay decoupled from it.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from embed_export import (
    ENCODER_DIM,
    ExportError,
    ExportManifest,
    chunk_text,
    export_embeddings,
)
from embed_export import text_key as export_key

from moodrank.annotator import chunk_lyrics
from moodrank.embedder import get_embedding, load_embedding_store
from moodrank.embedder import text_key as engine_key

SHARED_FIXTURE = Path(__file__).resolve().parents[2] / "fixtures" / "shared_texts.json"

_CAPSYS = None


@pytest.fixture(autouse=True)
def _gate_channel(capsys):
    # Gate verdict lines must reach the terminal even under fd-level capture.
    global _CAPSYS
    _CAPSYS = capsys
    yield
    _CAPSYS = None


def emit(line: str) -> None:
    if _CAPSYS is not None:
        with _CAPSYS.disabled():
            print(line, flush=True)
    else:
        print(line, flush=True)


def report(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail and not ok:
        line += f"  ({detail})"
    emit(line)
    assert ok, f"{name}: {detail}"


def shared_texts():
    rows = json.loads(SHARED_FIXTURE.read_text(encoding="utf-8"))
    assert len(rows) == 10, "shared fixture must hold exactly 10 texts"
    return rows


def test_key_agreement():
    mismatches = []
    for row in shared_texts():
        body, digest = row["text"], row["sha256"]
        if export_key(body) != digest or engine_key(body) != digest:
            mismatches.append(digest)
    # The chunking rule feeds the keys for lyrics, so it must agree too.
    lyric = " ".join(f"word{i}" for i in range(137)) + "  \t trailing   gap"
    for window in (1, 3, 50, 200):
        if chunk_text(lyric, window) != chunk_lyrics(lyric, window):
            mismatches.append(f"chunk_words={window}")
    report("secondary-key-agreement", not mismatches, f"disagreed on {mismatches}")


def test_store_loads_in_engine(tmp_path):
    queries = tmp_path / "queries.txt"
    texts = [row["text"] for row in shared_texts()]
    queries.write_text("".join(t + "\n" for t in texts), encoding="utf-8")
    manifest = ExportManifest(
        inputs=(str(queries),),
        kind="queries",
        chunk_words=50,
        model_tag="hash:fixture",
        out_path=str(tmp_path / "store.jsonl"),
    )
    export_embeddings(manifest)

    store = load_embedding_store(manifest.out_path)
    ok = (
        store.dim == ENCODER_DIM
        and store.model_tag == "hash:fixture"
        and len(store) == 10
        and all(get_embedding(store, t).shape == (ENCODER_DIM,) for t in texts)
    )
    report("secondary-store-loads", ok,
           f"dim={store.dim} tag={store.model_tag!r} rows={len(store)}")


def test_wrong_dim_aborts(tmp_path):
    queries = tmp_path / "queries.txt"
    queries.write_text("any text\n", encoding="utf-8")
    manifest = ExportManifest(
        inputs=(str(queries),),
        kind="queries",
        chunk_words=50,
        model_tag="hash:fixture",
        out_path=str(tmp_path / "store.jsonl"),
    )

    class Narrow:
        tag = "narrow"

        def encode(self, texts):
            return np.zeros((len(texts), 512))

    raised = False
    try:
        export_embeddings(manifest, encoder=Narrow())
    except ExportError:
        raised = True
    report("secondary-dim-abort", raised and not Path(manifest.out_path).exists(),
           "wrong-dim encoder output must abort before writing")
