"""Corpus ingestion, split discipline, and the synthetic generator."""

import json

import pytest

from revdict.corpus import (CorpusError, DictionaryEntry, SplitSizes,
                            TrainingCorpus, load_corpus, make_splits)
from revdict.synth import SynthSpec, synth_generate
from revdict.word_index import build_index, choose_k


def entry_line(word="alpha", wl="en", definition="some words", dl="en", **kw):
    obj = {"word": word, "word_language": wl, "definition": definition,
           "definition_language": dl}
    obj.update(kw)
    return json.dumps(obj)


class TestLoadCorpus:
    def test_valid_lines(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("\n".join([
            entry_line(), entry_line(word="beta"),
            entry_line(word="gamma", dl="xx"),
        ]) + "\n", encoding="utf-8")
        corpus, rejected = load_corpus(str(path))
        assert len(corpus) == 3
        assert rejected == []
        assert corpus.languages == ["en", "xx"]

    def test_missing_field_reported_with_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        bad = json.dumps({"word_language": "en", "definition": "d",
                          "definition_language": "en"})
        path.write_text(entry_line() + "\n" + bad + "\n", encoding="utf-8")
        corpus, rejected = load_corpus(str(path))
        assert len(corpus) == 1
        assert rejected == [(2, "missing fields: word")]

    def test_invalid_json_reported(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(entry_line() + "\n{oops\n", encoding="utf-8")
        _, rejected = load_corpus(str(path))
        assert rejected[0][0] == 2

    def test_zero_valid_raises(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("{}\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="no valid entries"):
            load_corpus(str(path))

    def test_unknown_language_tag(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(entry_line() + "\n" + entry_line(wl="zz", dl="zz") + "\n",
                        encoding="utf-8")
        corpus, rejected = load_corpus(str(path), allowed_languages=["en"])
        assert len(corpus) == 1
        assert "unknown language tag" in rejected[0][1]

    def test_aligned_entries_grouped_by_pair(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(entry_line(dl="xx") + "\n", encoding="utf-8")
        corpus, _ = load_corpus(str(path))
        assert corpus.pairs() == [("xx", "en")]
        assert corpus.select(pair=("xx", "en"))[0].word == "alpha"


def multi_def_corpus(n_words=30, defs=4):
    entries = []
    for i in range(n_words):
        for j in range(defs):
            entries.append(DictionaryEntry(
                word=f"w{i}", word_language="en",
                definition=f"definition {j} of word {i}",
                definition_language="en"))
    return TrainingCorpus(entries)


class TestMakeSplits:
    def test_seen_entries_are_verbatim_training_copies(self):
        corpus = multi_def_corpus()
        split, _ = make_splits(corpus, seed=0,
                               monolingual=SplitSizes(dev=5, seen=6, unseen=4))
        train = {(e.word, e.definition) for e in split.select("train")}
        for e in split.select("seen"):
            assert (e.word, e.definition) in train

    def test_unseen_words_have_no_training_definitions(self):
        corpus = multi_def_corpus()
        split, report = make_splits(corpus, seed=0,
                                    monolingual=SplitSizes(dev=5, seen=6, unseen=4))
        train_words = {e.word for e in split.select("train")}
        dev_words = {e.word for e in split.select("dev")}
        unseen = split.select("unseen")
        assert len(unseen) == 4
        for e in unseen:
            assert e.word not in train_words
            assert e.word not in dev_words
        assert report["en->en"]["unseen_definitions_dropped"] == 4 * 3

    def test_dev_words_keep_a_training_definition(self):
        corpus = multi_def_corpus()
        split, _ = make_splits(corpus, seed=1,
                               monolingual=SplitSizes(dev=8, seen=0, unseen=0))
        train_words = {e.word for e in split.select("train")}
        for e in split.select("dev"):
            assert e.word in train_words

    def test_deterministic(self):
        corpus = multi_def_corpus()
        sizes = SplitSizes(dev=5, seen=6, unseen=4)
        a, _ = make_splits(corpus, seed=7, monolingual=sizes)
        b, _ = make_splits(corpus, seed=7, monolingual=sizes)
        assert a.to_jsonl() == b.to_jsonl()

    def test_insufficient_data_raises(self):
        corpus = multi_def_corpus(n_words=5)
        with pytest.raises(CorpusError, match="unseen"):
            make_splits(corpus, seed=0,
                        monolingual=SplitSizes(dev=0, seen=0, unseen=10))

    def test_counts_partition(self):
        corpus = multi_def_corpus(n_words=30, defs=4)
        split, report = make_splits(
            corpus, seed=3, monolingual=SplitSizes(dev=5, seen=6, unseen=4))
        r = report["en->en"]
        # unseen words consume 4 defs each (1 kept as test + 3 dropped)
        assert r["train"] == 120 - 4 * 4 - 5
        assert r["dev"] == 5
        assert len(split.select("train")) == r["train"]
        assert len(split.select("seen")) == 6


class TestSynthGenerate:
    def test_entry_and_lexicon_counts(self):
        spec = SynthSpec(languages=("aa", "bb"), word_count=60,
                         defs_per_word=2, sharing=0.5)
        result = synth_generate(spec, seed=0)
        assert len(result.corpus) >= 2 * 60
        for pair, lex in result.lexicons.items():
            assert len(lex) == 60
        assert set(result.word_lists) == {"aa", "bb"}
        assert len(result.word_lists["aa"]) == 60

    def test_lexicon_is_bijection(self):
        spec = SynthSpec(languages=("aa", "bb"), word_count=50, sharing=0.3)
        result = synth_generate(spec, seed=1)
        lex = result.lexicons[("aa", "bb")]
        sources = [s for s, _ in lex]
        targets = [t for _, t in lex]
        assert len(set(sources)) == len(sources)
        assert len(set(targets)) == len(targets)

    def test_sharing_zero_disjoint_inventories(self):
        spec = SynthSpec(languages=("aa", "bb"), word_count=40, sharing=0.0)
        result = synth_generate(spec, seed=2)
        vocab = result.vocab

        def piece_strings(lang):
            used = set()
            for word in result.word_lists[lang]:
                for i in vocab.tokenize_word(word):
                    used.add(vocab.tokens[i])
            for e in result.corpus.entries:
                if e.definition_language == lang:
                    for i in vocab.tokenize_text(e.definition):
                        used.add(vocab.tokens[i])
            return used

        assert piece_strings("aa").isdisjoint(piece_strings("bb"))

    def test_deterministic_bytes(self):
        spec = SynthSpec(languages=("aa", "bb"), word_count=40, sharing=0.5)
        a = synth_generate(spec, seed=5)
        b = synth_generate(spec, seed=5)
        assert a.corpus.to_jsonl() == b.corpus.to_jsonl()
        assert a.vocab.tokens == b.vocab.tokens

    def test_words_tokenize_within_k(self):
        spec = SynthSpec(languages=("aa",), word_count=50)
        result = synth_generate(spec, seed=3)
        seqs = [result.vocab.tokenize_word(w) for w in result.word_lists["aa"]]
        assert all(result.vocab.unk_id not in s for s in seqs)
        k = choose_k(seqs, coverage=1.0)
        assert k <= 3
        index = build_index(result.vocab, result.word_lists, k)
        assert index.size("aa") == 50
        assert not index.exclusions

    def test_definitions_tokenize_cleanly(self):
        spec = SynthSpec(languages=("aa", "bb"), word_count=30, sharing=0.4)
        result = synth_generate(spec, seed=4)
        for e in result.corpus.entries:
            ids = result.vocab.tokenize_text(e.definition)
            assert result.vocab.unk_id not in ids

    def test_description_split_emitted(self):
        spec = SynthSpec(languages=("aa",), word_count=30, description_count=5)
        result = synth_generate(spec, seed=6)
        desc = result.corpus.select("description")
        assert len(desc) == 5
        train_defs = {e.definition for e in result.corpus.select("train")}
        for e in desc:
            assert e.definition not in train_defs

    def test_annotations_cover_words(self):
        spec = SynthSpec(languages=("aa",), word_count=30)
        result = synth_generate(spec, seed=7)
        assert set(result.annotations["aa"]) == set(result.word_lists["aa"])
        assert set(result.annotations["aa"].values()) <= {"simple", "compound", "extended"}

    def test_aligned_entries_present_for_two_languages(self):
        spec = SynthSpec(languages=("aa", "bb"), word_count=30,
                         aligned_defs_per_word=1)
        result = synth_generate(spec, seed=8)
        aligned = [e for e in result.corpus.entries if not e.is_monolingual]
        assert len(aligned) == 2 * 30

    def test_bad_spec_rejected(self):
        with pytest.raises(CorpusError):
            SynthSpec(languages=("aa", "bb", "cc"))
        with pytest.raises(CorpusError):
            SynthSpec(sharing=1.5)
        with pytest.raises(CorpusError):
            synth_generate(SynthSpec(word_count=50, vocab_budget=10), seed=0)
