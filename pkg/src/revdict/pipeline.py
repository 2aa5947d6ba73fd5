"""End-to-end inference helpers: text in, ranked candidate words out.

A ModelBundle packages the trained parameters with the vocabulary, word
index, language inventory and training mode.  Both the evaluation harness
and the query service go through ``rank_definition`` /
``scores_for_definitions`` so that every consumer sees the identical
ranking.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import checkpoint as ckpt
from .corpus import DictionaryEntry
from .encoder import EncoderParams, InputSample, build_input, forward_scores, pack_batch
from .evaluation import EvalResult, compute_metrics, rank_of_target
from .scoring import RankedWord, WordScores, aggregate_batch, rank
from .vocab import SubwordVocab, load_vocab
from .word_index import WordIndex

EVAL_BATCH_SIZE = 64

CHECKPOINT_FILE = "checkpoint.zip"
VOCAB_FILE = "vocab.txt"
INDEX_FILE = "index.json"


class PipelineError(RuntimeError):
    pass


@dataclass
class ModelBundle:
    params: EncoderParams
    vocab: SubwordVocab
    index: WordIndex
    languages: list[str]          # language-embedding id = position here
    mode: str                     # training mode the checkpoint came from
    model_id: str = "uninitialized"

    @property
    def k(self) -> int:
        return self.index.k

    @property
    def cross_lingual(self) -> bool:
        return self.mode in ("bilingual_aligned", "unaligned_multilingual")

    def language_id(self, language: str) -> int | None:
        """Embedding row for a language, or None when the model has none."""
        if self.params.config.num_languages == 0:
            return None
        try:
            return self.languages.index(language)
        except ValueError:
            raise PipelineError(f"language {language!r} not in model inventory") from None

    def supports(self, definition_language: str, target_language: str) -> bool:
        if definition_language not in self.languages:
            return False
        if target_language not in self.index.languages:
            return False
        if definition_language != target_language and not self.cross_lingual:
            return False
        return True


def load_bundle(model_dir: str) -> ModelBundle:
    """Load checkpoint.zip + vocab.txt + index.json from a directory."""
    path = os.path.join(model_dir, CHECKPOINT_FILE)
    params, header, model_id = ckpt.load_checkpoint(path)
    vocab = load_vocab(os.path.join(model_dir, VOCAB_FILE),
                       lowercase=header.get("lowercase", True))
    index = WordIndex.load(os.path.join(model_dir, INDEX_FILE), vocab.mask_id)
    if index.k != header.get("k", index.k):
        raise PipelineError(
            f"index k = {index.k} disagrees with checkpoint k = {header['k']}")
    return ModelBundle(params=params, vocab=vocab, index=index,
                       languages=list(header.get("languages", index.languages)),
                       mode=header.get("mode", "monolingual"),
                       model_id=model_id)


def save_bundle(bundle: ModelBundle, model_dir: str) -> None:
    os.makedirs(model_dir, exist_ok=True)
    ckpt.save_checkpoint(
        os.path.join(model_dir, CHECKPOINT_FILE), bundle.params,
        meta={"k": bundle.k, "languages": bundle.languages, "mode": bundle.mode,
              "lowercase": bundle.vocab.lowercase})
    bundle.vocab.save(os.path.join(model_dir, VOCAB_FILE))
    bundle.index.save(os.path.join(model_dir, INDEX_FILE))


def _input_for(bundle: ModelBundle, definition: str,
               target_language: str) -> InputSample:
    lang_id = bundle.language_id(target_language)
    def_ids = bundle.vocab.tokenize_text(definition)
    return build_input(bundle.vocab, bundle.k, def_ids, language_id=lang_id,
                       max_seq_len=bundle.params.config.max_seq_len)


def scores_for_definitions(bundle: ModelBundle, definitions: list[str],
                           target_language: str) -> np.ndarray:
    """(B, k, |V|) subword scores for a batch of definition texts."""
    samples = [_input_for(bundle, d, target_language) for d in definitions]
    batch = pack_batch(samples, bundle.vocab.pad_id)
    return forward_scores(bundle.params, batch)


def rank_definition(bundle: ModelBundle, definition: str,
                    definition_language: str, target_language: str,
                    top_n: int | None = None) -> list[RankedWord]:
    """The service/query entry point: returns the tie-broken ranking."""
    if not bundle.supports(definition_language, target_language):
        raise PipelineError(
            f"model does not support {definition_language}->{target_language}")
    scores = scores_for_definitions(bundle, [definition], target_language)[0]
    word_scores = WordScores(target_language,
                             aggregate_batch(scores[None], bundle.index,
                                             target_language)[0])
    return rank(word_scores, bundle.index, top_n=top_n)


@dataclass
class SampleOutcome:
    entry: DictionaryEntry
    rank: int
    excluded: bool
    piece_count: int | None


def evaluate_entries(bundle: ModelBundle, entries: list[DictionaryEntry],
                     batch_size: int = EVAL_BATCH_SIZE
                     ) -> tuple[EvalResult, list[SampleOutcome]]:
    """Rank every entry's gold word among its language's candidates.

    Gold words missing from the index score the worst possible rank (the
    index size for their language) and are counted as excluded.
    """
    if not entries:
        raise PipelineError("no entries to evaluate")
    outcomes: list[SampleOutcome] = [None] * len(entries)  # type: ignore[list-item]
    by_lang: dict[str, list[int]] = {}
    for i, e in enumerate(entries):
        by_lang.setdefault(e.word_language, []).append(i)
    for lang, idxs in sorted(by_lang.items()):
        padded = bundle.index.padded_matrix(lang)
        size = padded.shape[0]
        for start in range(0, len(idxs), batch_size):
            chunk = idxs[start:start + batch_size]
            texts = [entries[i].definition for i in chunk]
            sub = scores_for_definitions(bundle, texts, lang)
            word_scores = aggregate_batch(sub, bundle.index, lang)
            for row, i in enumerate(chunk):
                entry = entries[i]
                target = bundle.index.word_id(lang, entry.word)
                if target is None:
                    outcomes[i] = SampleOutcome(entry, rank=size, excluded=True,
                                                piece_count=None)
                else:
                    r = rank_of_target(word_scores[row], target)
                    pieces = len(bundle.index.entries_for(lang)[target].pieces)
                    outcomes[i] = SampleOutcome(entry, rank=r, excluded=False,
                                                piece_count=pieces)
    result = compute_metrics([o.rank for o in outcomes],
                             n_excluded=sum(o.excluded for o in outcomes))
    return result, outcomes
