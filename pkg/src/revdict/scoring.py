"""Word scores from subword score matrices, ranking, and word-level losses.

A word's score is the sum over its k padded positions of the subword score
assigned to its piece at that position (padding positions gather the [MASK]
column).  Scores are raw unnormalized sums by default; a per-position
log-softmax can be switched on for ablation.  Ranking sorts descending with
ties broken by ascending word id.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax, logsumexp

from .word_index import WordIndex


class ScoringError(ValueError):
    pass


@dataclass
class WordScores:
    """One real score per indexed word of one language."""
    language: str
    scores: np.ndarray  # (count,) float


@dataclass(frozen=True)
class RankedWord:
    word_id: int
    surface: str
    score: float
    rank: int


def aggregate(subword: np.ndarray, index: WordIndex, language: str,
              per_position_log_softmax: bool = False) -> WordScores:
    """Gather a (k, |V|) subword score matrix into per-word scores.

    score(w) = sum_i subword[i, padded_i(w)].  Only the requested language's
    words are scored.  ``per_position_log_softmax`` normalizes each position's
    row before gathering (ablation switch, default off).
    """
    subword = np.asarray(subword)
    if subword.ndim != 2:
        raise ScoringError(f"expected (k, |V|) matrix, got shape {subword.shape}")
    padded = index.padded_matrix(language)
    k = padded.shape[1]
    if subword.shape[0] != k:
        raise ScoringError(
            f"score matrix has {subword.shape[0]} rows but index k = {k}")
    if not np.all(np.isfinite(subword)):
        raise ScoringError("non-finite subword scores")
    if per_position_log_softmax:
        subword = log_softmax(subword, axis=-1)
    scores = subword[np.arange(k), padded].sum(axis=-1)
    return WordScores(language=language, scores=scores)


def aggregate_batch(subword: np.ndarray, index: WordIndex,
                    language: str) -> np.ndarray:
    """(B, k, |V|) -> (B, count) word scores for one language."""
    subword = np.asarray(subword)
    padded = index.padded_matrix(language)
    k = padded.shape[1]
    if subword.shape[1] != k:
        raise ScoringError(
            f"score matrix has {subword.shape[1]} rows but index k = {k}")
    out = np.zeros((subword.shape[0], padded.shape[0]), dtype=subword.dtype)
    for i in range(k):
        out += subword[:, i, padded[:, i]]
    return out


def rank(word_scores: WordScores, index: WordIndex,
         top_n: int | None = None) -> list[RankedWord]:
    """Stable descending sort; ties ordered by ascending word_id."""
    scores = word_scores.scores
    if scores.size == 0:
        raise ScoringError("cannot rank empty scores")
    entries = index.entries_for(word_scores.language)
    if len(entries) != scores.size:
        raise ScoringError("score vector length does not match index size")
    order = np.argsort(-scores, kind="stable")
    if top_n is not None:
        if top_n < 1:
            raise ScoringError(f"top_n must be >= 1, got {top_n}")
        order = order[:top_n]
    return [RankedWord(word_id=int(w), surface=entries[w].surface,
                       score=float(scores[w]), rank=r)
            for r, w in enumerate(order)]


def word_loss(word_scores: WordScores | np.ndarray, target: int) -> float:
    """Negative log-softmax of the target word's score (one sample)."""
    scores = word_scores.scores if isinstance(word_scores, WordScores) else np.asarray(word_scores)
    if not 0 <= target < scores.size:
        raise ScoringError(f"target {target} out of range for {scores.size} words")
    return float(logsumexp(scores) - scores[target])


def multilingual_loss(pairs) -> float:
    """Sum of per-sample word losses, each normalized within its own
    language's word list; ``pairs`` iterates (WordScores, target_id)."""
    return float(sum(word_loss(ws, t) for ws, t in pairs))


# ---------------------------------------------------------------------------
# score-matrix interchange file
# ---------------------------------------------------------------------------
# Layout: two little-endian uint32 (k, |V|) followed by k*|V| row-major
# little-endian float32 values.  Lets externally produced masked-LM logits
# drive the ranking pipeline.

_HEADER = struct.Struct("<II")


def write_score_matrix(path: str, scores: np.ndarray) -> None:
    scores = np.asarray(scores)
    if scores.ndim != 2:
        raise ScoringError(f"expected (k, |V|) matrix, got shape {scores.shape}")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(scores.shape[0], scores.shape[1]))
        f.write(np.ascontiguousarray(scores, dtype="<f4").tobytes())


def read_score_matrix(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ScoringError(f"{path}: truncated header")
        k, v = _HEADER.unpack(head)
        data = np.frombuffer(f.read(), dtype="<f4")
    if data.size != k * v:
        raise ScoringError(
            f"{path}: expected {k * v} values for k={k}, |V|={v}, got {data.size}")
    return data.reshape(k, v).astype(np.float32)
