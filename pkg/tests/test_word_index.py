"""Mask-block length selection and padded word-index construction."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from revdict.vocab import SubwordVocab
from revdict.word_index import (WordIndex, WordIndexError, build_index,
                                choose_k)

TOKENS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
          "play", "##ing", "##er", "go", "run", "##ning"]


@pytest.fixture
def vocab():
    return SubwordVocab(TOKENS)


class TestChooseK:
    def test_coverage_90(self):
        assert choose_k([1, 1, 2, 2, 3, 3, 3, 4, 5, 9], coverage=0.9) == 5

    def test_all_ones(self):
        assert choose_k([1] * 7, coverage=0.99) == 1

    def test_exact_full_coverage(self):
        assert choose_k([2, 2, 2], coverage=1.0) == 2

    def test_accepts_token_sequences(self):
        assert choose_k([[5, 6], [5], [5, 6, 7]], coverage=1.0) == 3

    def test_empty_errors(self):
        with pytest.raises(WordIndexError, match="empty"):
            choose_k([])

    def test_bad_coverage(self):
        with pytest.raises(WordIndexError):
            choose_k([1, 2], coverage=0.0)

    def test_exhaustive_scan_agreement(self):
        # independent oracle: try k = 1.. and take the first satisfying one
        rng = np.random.default_rng(7)
        for _ in range(50):
            counts = rng.integers(1, 12, size=rng.integers(1, 40)).tolist()
            coverage = float(rng.uniform(0.05, 1.0))
            expected = next(
                k for k in range(1, max(counts) + 1)
                if sum(c <= k for c in counts) / len(counts) >= coverage)
            assert choose_k(counts, coverage) == expected

    @given(st.lists(st.integers(1, 9), min_size=1, max_size=30),
           st.floats(0.05, 1.0))
    def test_monotone_in_coverage(self, counts, coverage):
        lower = max(0.05, coverage - 0.3)
        assert choose_k(counts, lower) <= choose_k(counts, coverage)


class TestBuildIndex:
    def test_padding_with_mask(self, vocab):
        idx = build_index(vocab, {"en": ["playing"]}, k=3)
        entry = idx.entries_for("en")[0]
        assert entry.pieces == (5, 6)
        assert entry.padded == (5, 6, 4)

    def test_word_over_k_excluded(self, vocab):
        idx = build_index(vocab, {"en": ["playing", "go"]}, k=1)
        assert [e.surface for e in idx.entries_for("en")] == ["go"]
        assert [(x.surface, x.reason) for x in idx.exclusions] == [("playing", "exceeds k")]

    def test_unknown_piece_excluded(self, vocab):
        idx = build_index(vocab, {"en": ["xyz", "go"]}, k=2)
        assert [(x.surface, x.reason) for x in idx.exclusions] == [("xyz", "unknown piece")]

    def test_duplicate_surface_collapses(self, vocab):
        idx = build_index(vocab, {"en": ["go", "go", "play"]}, k=2)
        assert idx.size("en") == 2
        assert any(x.reason == "duplicate surface" for x in idx.exclusions)

    def test_empty_language_errors(self, vocab):
        with pytest.raises(WordIndexError, match="no indexable words"):
            build_index(vocab, {"en": ["xyz"]}, k=2)

    def test_dense_ids_and_lookup(self, vocab):
        idx = build_index(vocab, {"en": ["go", "play", "running"]}, k=2)
        assert [e.word_id for e in idx.entries_for("en")] == [0, 1, 2]
        assert idx.word_id("en", "play") == 1
        assert idx.word_id("en", "absent") is None
        assert idx.surface("en", 2) == "running"

    def test_retokenization_reproduces_pieces(self, vocab):
        idx = build_index(vocab, {"en": ["go", "play", "running", "player"]}, k=3)
        for e in idx.entries_for("en"):
            assert tuple(vocab.tokenize_word(e.surface)) == e.pieces

    def test_exclusions_plus_retained_match_input(self, vocab):
        words = ["go", "playing", "xyz", "running", "player", "qqq"]
        idx = build_index(vocab, {"en": words}, k=2)
        per_lang_excluded = [x for x in idx.exclusions if x.language == "en"]
        assert idx.size("en") + len(per_lang_excluded) == len(words)

    def test_padded_matrix(self, vocab):
        idx = build_index(vocab, {"en": ["playing", "go"]}, k=3)
        mat = idx.padded_matrix("en")
        assert mat.dtype == np.int32
        np.testing.assert_array_equal(mat, [[5, 6, 4], [8, 4, 4]])

    def test_json_round_trip(self, vocab, tmp_path):
        idx = build_index(vocab, {"en": ["playing", "go"], "xx": ["run"]}, k=3)
        path = str(tmp_path / "index.json")
        idx.save(path)
        loaded = WordIndex.load(path, vocab.mask_id)
        assert loaded.k == idx.k
        assert loaded.languages == idx.languages
        for lang in idx.languages:
            assert [(e.surface, e.pieces, e.padded) for e in loaded.entries_for(lang)] == \
                   [(e.surface, e.pieces, e.padded) for e in idx.entries_for(lang)]

    def test_k_below_one_rejected(self, vocab):
        with pytest.raises(WordIndexError):
            build_index(vocab, {"en": ["go"]}, k=0)
