"""Reverse-dictionary engine.

Given a word description, rank every candidate word of a target language by
summing masked-language-model subword scores at k masked placeholder
positions.  Supports monolingual retrieval, cross-lingual retrieval trained
on aligned definition/word pairs, and unaligned cross-lingual retrieval
trained on monolingual data only (language embedding + token-embedding
scoring).
"""

from .vocab import SubwordVocab, VocabError, load_vocab
from .word_index import (Exclusion, WordIndex, WordIndexEntry, WordIndexError,
                         build_index, choose_k)
from .encoder import (EncoderError, EncoderParams, HiddenStates, InputBatch,
                      InputSample, ModelConfig, build_input, forward,
                      forward_scores, init_params, pack_batch, subword_scores)
from .scoring import (RankedWord, ScoringError, WordScores, aggregate,
                      aggregate_batch, multilingual_loss, rank,
                      read_score_matrix, word_loss, write_score_matrix)
from .corpus import (CorpusError, DictionaryEntry, SplitSizes, TrainingCorpus,
                     load_corpus, make_splits)
from .synth import SynthResult, SynthSpec, save_lexicon, synth_generate
from .evaluation import (BilingualLexicon, EvalResult, EvaluationError,
                         ablation_filter, compute_metrics, grouped_metrics,
                         metrics_report, pivot_baseline, rank_of_target,
                         target_rank)
from .training import (GradCheckReport, Schedule, TrainConfig, TrainResult,
                       TrainState, TrainingError, adam_step, backward,
                       grad_check, train, word_level_loss)
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .pipeline import (ModelBundle, PipelineError, evaluate_entries,
                       load_bundle, rank_definition, save_bundle,
                       scores_for_definitions)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
