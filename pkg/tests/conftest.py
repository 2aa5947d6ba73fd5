"""Shared fixtures: a small closed world (vocab, words, index) and batch
builders used across encoder, scoring and training tests."""

import numpy as np
import pytest

from revdict.encoder import ModelConfig, build_input, pack_batch
from revdict.vocab import SubwordVocab
from revdict.word_index import build_index

TOY_TOKENS = (["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
              + [f"t{i}" for i in range(20)]
              + [f"##c{i}" for i in range(10)])

TOY_WORDS = {
    "en": ["t0c0", "t1c1", "t2c2", "t3", "t4c0", "t5c3"],
    "xx": ["t6c4", "t7", "t8c5"],
}


@pytest.fixture(scope="session")
def toy_vocab():
    return SubwordVocab(list(TOY_TOKENS))


@pytest.fixture(scope="session")
def toy_index(toy_vocab):
    return build_index(toy_vocab, TOY_WORDS, k=2)


def tiny_config(head_mode="mlm_head", num_languages=0, num_layers=2,
                dropout=0.0):
    return ModelConfig(num_layers=num_layers, d_model=16, num_heads=4,
                       ffn_dim=24, vocab_size=len(TOY_TOKENS), max_seq_len=32,
                       num_languages=num_languages, dropout=dropout,
                       head_mode=head_mode)


def random_batch(vocab, index, batch_size=4, k=2, seed=0, languages=None):
    """Random definition batches plus aligned (language, target) pairs."""
    rng = np.random.default_rng(seed)
    langs = languages or ["en"]
    samples, targets = [], []
    for b in range(batch_size):
        lang = langs[b % len(langs)]
        def_ids = list(rng.integers(5, len(vocab), size=int(rng.integers(2, 6))))
        lang_id = None if languages is None else langs.index(lang)
        samples.append(build_input(vocab, k, def_ids, language_id=lang_id,
                                   max_seq_len=32))
        targets.append((lang, int(rng.integers(index.size(lang)))))
    return pack_batch(samples, vocab.pad_id), targets
