"""Command-line behavior: flags, outputs, exit codes."""

import csv

import pytest

from embed_export import read_store, text_key


@pytest.fixture
def corpus_csv(tmp_path):
    path = tmp_path / "corpus.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "text", "V", "A"])
        writer.writerows([["1", "warm summer evening", "4.1", "2.2"],
                          ["2", "stuck in traffic again", "1.8", "3.9"],
                          ["3", "warm summer evening", "4.0", "2.5"]])
    return path


def test_corpus_export(tmp_path, corpus_csv, run_cli):
    out = tmp_path / "store.jsonl"
    code, stdout, stderr = run_cli(
        "--in", corpus_csv, "--kind", "corpus", "--out", out, "--model", "hash:test")
    assert code == 0
    assert stdout == "texts\t3\nrows\t2\n"
    assert f"store written to {out}" in stderr
    tag, entries = read_store(out)
    assert tag == "hash:test"
    assert set(entries) == {text_key("warm summer evening"),
                            text_key("stuck in traffic again")}


def test_lyrics_export_with_chunk_override(tmp_path, run_cli):
    path = tmp_path / "songs.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["artist", "song", "text"])
        writer.writerow(["Enya", "Echoes", "one two three four five six seven"])
    out = tmp_path / "store.jsonl"
    code, stdout, _ = run_cli("--in", path, "--kind", "lyrics",
                              "--chunk-words", 3, "--out", out, "--model", "hash:test")
    assert code == 0
    assert stdout == "texts\t3\nrows\t3\n"
    _, entries = read_store(out)
    assert text_key("one two three") in entries


def test_multiple_inputs_and_verify(tmp_path, run_cli):
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    a.write_text("calm morning\n", encoding="utf-8")
    b.write_text("calm morning\nrestless night\n\n", encoding="utf-8")
    out = tmp_path / "store.jsonl"
    code, stdout, _ = run_cli("--in", a, "--in", b, "--kind", "queries",
                              "--out", out, "--model", "hash:test", "--verify")
    assert code == 0
    assert stdout == ("texts\t3\nrows\t2\n"
                      "verified\t2 keys required, 0 missing\n")


def test_update_builds_combined_store(tmp_path, corpus_csv, run_cli):
    out = tmp_path / "store.jsonl"
    queries = tmp_path / "queries.txt"
    queries.write_text("rainy sunday\n", encoding="utf-8")
    assert run_cli("--in", corpus_csv, "--kind", "corpus", "--out", out,
                   "--model", "hash:test")[0] == 0
    code, stdout, _ = run_cli("--in", queries, "--kind", "queries", "--out", out,
                              "--model", "hash:test", "--update", "--verify")
    assert code == 0
    # 2 corpus rows carried over, 1 query row added.
    assert stdout == ("texts\t1\nrows\t3\n"
                      "verified\t1 keys required, 0 missing\n")
    _, entries = read_store(out)
    assert text_key("rainy sunday") in entries
    assert text_key("warm summer evening") in entries


def test_rerun_is_byte_identical(tmp_path, corpus_csv, run_cli):
    out = tmp_path / "store.jsonl"
    argv = ["--in", corpus_csv, "--kind", "corpus", "--out", out,
            "--model", "hash:test"]
    assert run_cli(*argv)[0] == 0
    first = out.read_bytes()
    assert run_cli(*argv)[0] == 0
    assert out.read_bytes() == first


def test_missing_required_flag_is_usage_error(run_cli):
    code, _, stderr = run_cli("--kind", "queries", "--out", "x", "--model", "m")
    assert code == 1
    assert "usage error" in stderr


def test_unknown_kind_is_usage_error(run_cli, tmp_path):
    path = tmp_path / "q.txt"
    path.write_text("x\n", encoding="utf-8")
    code, _, stderr = run_cli("--in", path, "--kind", "mystery",
                              "--out", tmp_path / "s", "--model", "m")
    assert code == 1
    assert "usage error" in stderr


def test_nonpositive_chunk_words_is_usage_error(run_cli, tmp_path):
    path = tmp_path / "q.txt"
    path.write_text("x\n", encoding="utf-8")
    code, _, stderr = run_cli("--in", path, "--kind", "queries", "--chunk-words", 0,
                              "--out", tmp_path / "s", "--model", "hash:test")
    assert code == 1
    assert "chunk_words must be positive" in stderr


def test_missing_input_file_is_data_error(run_cli, tmp_path):
    code, _, stderr = run_cli("--in", tmp_path / "nope.txt", "--kind", "queries",
                              "--out", tmp_path / "s", "--model", "hash:test")
    assert code == 2
    assert "cannot read input" in stderr


def test_bad_corpus_header_is_data_error(run_cli, tmp_path):
    path = tmp_path / "corpus.csv"
    path.write_text("id,body,V,A\n1,x,3,3\n", encoding="utf-8")
    code, _, stderr = run_cli("--in", path, "--kind", "corpus",
                              "--out", tmp_path / "s", "--model", "hash:test")
    assert code == 2
    assert "bad header" in stderr


def test_header_only_corpus_is_data_error(run_cli, tmp_path):
    path = tmp_path / "corpus.csv"
    path.write_text("id,text,V,A\n", encoding="utf-8")
    code, _, stderr = run_cli("--in", path, "--kind", "corpus",
                              "--out", tmp_path / "s", "--model", "hash:test")
    assert code == 2
    assert "no texts found" in stderr
