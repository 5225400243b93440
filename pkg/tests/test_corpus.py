import pytest
from hypothesis import given, strategies as st

from moodrank.corpus import (
    EmotionSentence,
    PlayRecord,
    SongRecord,
    join_catalog,
    normalize_artist_name,
    parse_emotion_corpus,
    parse_lyrics_catalog,
    parse_play_log,
    write_emotion_corpus,
    write_lyrics_catalog,
    write_play_log,
)
from moodrank.errors import DataError


class TestNormalizeArtistName:
    def test_punctuation_and_case(self):
        assert normalize_artist_name("Hank Williams Jr.") == "hank williams jr"

    def test_already_normal(self):
        assert normalize_artist_name("enya") == "enya"

    def test_whitespace_collapse(self):
        assert normalize_artist_name("  The  WHO! ") == "the who"

    def test_unicode_compatibility_form(self):
        # fullwidth latin compatibility-normalizes to ascii
        assert normalize_artist_name("Ｅｎｙａ") == "enya"

    def test_empty_input(self):
        assert normalize_artist_name("") == ""
        assert normalize_artist_name("?!.") == ""

    @given(st.text(max_size=40))
    def test_idempotent(self, raw):
        once = normalize_artist_name(raw)
        assert normalize_artist_name(once) == once

    @given(st.text(max_size=40))
    def test_no_uppercase_no_outer_space(self, raw):
        out = normalize_artist_name(raw)
        assert out == out.strip()
        assert out == out.lower()
        assert "  " not in out


class TestParseEmotionCorpus:
    def test_direct_mapping(self, tmp_path):
        p = tmp_path / "emotion.csv"
        p.write_text('id,text,V,A\ns1,"I feel great",4.2,3.8\n', encoding="utf-8")
        rows = parse_emotion_corpus(p)
        assert len(rows) == 1
        assert rows[0] == EmotionSentence(id="s1", body="I feel great",
                                          valence=4.2, arousal=3.8)

    def test_out_of_range_valence(self, tmp_path):
        p = tmp_path / "emotion.csv"
        p.write_text("id,text,V,A\ns1,hello there,5.7,3.0\n", encoding="utf-8")
        with pytest.raises(DataError, match=":2"):
            parse_emotion_corpus(p)

    def test_header_only(self, tmp_path):
        p = tmp_path / "emotion.csv"
        p.write_text("id,text,V,A\n", encoding="utf-8")
        assert parse_emotion_corpus(p) == []

    def test_bad_header(self, tmp_path):
        p = tmp_path / "emotion.csv"
        p.write_text("id,text,valence,arousal\n", encoding="utf-8")
        with pytest.raises(DataError, match="header"):
            parse_emotion_corpus(p)

    def test_empty_body_rejected(self, tmp_path):
        p = tmp_path / "emotion.csv"
        p.write_text('id,text,V,A\ns1,"   ",3.0,3.0\n', encoding="utf-8")
        with pytest.raises(DataError, match=":2"):
            parse_emotion_corpus(p)

    def test_non_numeric_score(self, tmp_path):
        p = tmp_path / "emotion.csv"
        p.write_text("id,text,V,A\ns1,hello,abc,3.0\n", encoding="utf-8")
        with pytest.raises(DataError, match="not a number"):
            parse_emotion_corpus(p)

    def test_roundtrip(self, tmp_path):
        rows = [
            EmotionSentence(id="a", body="one fine day", valence=1.25, arousal=4.875),
            EmotionSentence(id="b", body='quotes "inside", and commas', valence=3.0,
                            arousal=2.0),
        ]
        p = tmp_path / "emotion.csv"
        write_emotion_corpus(rows, p)
        assert parse_emotion_corpus(p) == rows


class TestParseLyricsCatalog:
    def test_normalization_applied(self, tmp_path):
        p = tmp_path / "lyrics.csv"
        p.write_text("artist,song,text\nEnya,Afer Ventus,sail away with me\n",
                     encoding="utf-8")
        rows = parse_lyrics_catalog(p)
        assert rows[0].artist_norm == "enya"
        assert rows[0].artist_raw == "Enya"

    def test_duplicate_keeps_first(self, tmp_path):
        p = tmp_path / "lyrics.csv"
        p.write_text(
            "artist,song,text\n"
            "Enya,Afer Ventus,first version words\n"
            "ENYA!,Afer Ventus,second version words\n",
            encoding="utf-8",
        )
        rows = parse_lyrics_catalog(p)
        assert len(rows) == 1
        assert rows[0].lyrics == "first version words"

    def test_empty_lyrics_rejected(self, tmp_path):
        p = tmp_path / "lyrics.csv"
        p.write_text("artist,song,text\nEnya,Afer Ventus,\n", encoding="utf-8")
        with pytest.raises(DataError, match=":2"):
            parse_lyrics_catalog(p)

    def test_artist_normalizing_to_empty_rejected(self, tmp_path):
        p = tmp_path / "lyrics.csv"
        p.write_text("artist,song,text\n!!!,Loud,some words here\n", encoding="utf-8")
        with pytest.raises(DataError, match="normalizes to empty"):
            parse_lyrics_catalog(p)

    def test_roundtrip(self, tmp_path):
        rows = [
            SongRecord(artist_raw="Sigur Rós", artist_norm="sigur rós",
                       title="Svefn-g-englar", lyrics="a long dreamy text"),
            SongRecord(artist_raw="AC/DC", artist_norm="acdc",
                       title="T.N.T.", lyrics="oi oi oi"),
        ]
        p = tmp_path / "lyrics.csv"
        write_lyrics_catalog(rows, p)
        assert parse_lyrics_catalog(p) == rows


class TestParsePlayLog:
    def test_same_user_artist_summed(self, tmp_path):
        p = tmp_path / "plays.tsv"
        p.write_text("user_id\tartist_name\tplays\nu1\tEnya\t10\nu1\tEnya\t5\n",
                     encoding="utf-8")
        rows = parse_play_log(p)
        assert rows == [PlayRecord(user_id="u1", artist_raw="Enya",
                                   artist_norm="enya", play_count=15)]

    def test_zero_plays_kept(self, tmp_path):
        p = tmp_path / "plays.tsv"
        p.write_text("user_id\tartist_name\tplays\nu1\tEnya\t0\n", encoding="utf-8")
        assert parse_play_log(p)[0].play_count == 0

    def test_negative_plays_rejected(self, tmp_path):
        p = tmp_path / "plays.tsv"
        p.write_text("user_id\tartist_name\tplays\nu1\tEnya\t-3\n", encoding="utf-8")
        with pytest.raises(DataError, match="negative"):
            parse_play_log(p)

    def test_merge_uses_normalized_artist(self, tmp_path):
        p = tmp_path / "plays.tsv"
        p.write_text(
            "user_id\tartist_name\tplays\nu1\tThe Who\t3\nu1\tthe who!\t4\n",
            encoding="utf-8",
        )
        rows = parse_play_log(p)
        assert len(rows) == 1
        assert rows[0].play_count == 7
        assert rows[0].artist_raw == "The Who"

    def test_roundtrip(self, tmp_path):
        rows = [
            PlayRecord(user_id="u1", artist_raw="Enya", artist_norm="enya",
                       play_count=12),
            PlayRecord(user_id="u2", artist_raw="Opeth", artist_norm="opeth",
                       play_count=0),
        ]
        p = tmp_path / "plays.tsv"
        write_play_log(rows, p)
        assert parse_play_log(p) == rows


class TestJoinCatalog:
    def _songs(self, *artists):
        return [SongRecord(artist_raw=a, artist_norm=normalize_artist_name(a),
                           title=f"t{i}", lyrics="la la la")
                for i, a in enumerate(artists)]

    def _plays(self, *artists):
        return [PlayRecord(user_id="u1", artist_raw=a,
                           artist_norm=normalize_artist_name(a), play_count=1)
                for a in artists]

    def test_intersection(self):
        catalog = join_catalog(self._songs("Enya", "Metallica"),
                               self._plays("Enya", "Opeth"))
        assert catalog.joined_artists == {"enya"}

    def test_disjoint(self):
        catalog = join_catalog(self._songs("Enya"), self._plays("Opeth"))
        assert catalog.joined_artists == frozenset()

    def test_identical_sets(self):
        catalog = join_catalog(self._songs("A", "B", "C"),
                               self._plays("A", "B", "C"))
        assert catalog.joined_artists == {"a", "b", "c"}

    def test_symmetric(self):
        songs = self._songs("Enya", "Opeth")
        plays = self._plays("Opeth", "Metallica")
        left = join_catalog(songs, plays).joined_artists
        swapped = join_catalog(self._songs("Opeth", "Metallica"),
                               self._plays("Enya", "Opeth")).joined_artists
        assert left == swapped == {"opeth"}

    def test_everything_retained(self):
        songs, plays = self._songs("Enya"), self._plays("Opeth", "Enya")
        catalog = join_catalog(songs, plays)
        assert list(catalog.songs) == songs
        assert list(catalog.plays) == plays
