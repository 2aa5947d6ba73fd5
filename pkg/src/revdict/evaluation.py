"""Rank-based retrieval metrics, grouped analyses, the lexicon-pivot
baseline, and the definition-deletion ablation filter.

Ranks are 0-based everywhere (best possible rank is 0).  Reported metrics:
median rank (lower median for even counts), Acc@{1,10,100} (fraction of
samples ranked strictly below the cutoff), population variance of ranks, and
MRR, the mean of 1/(rank+1).  Targets missing from the candidate index are
scored at the worst possible rank (the index size) and counted separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import DictionaryEntry, TrainingCorpus
from .scoring import RankedWord

ACC_CUTOFFS = (1, 10, 100)


class EvaluationError(ValueError):
    pass


@dataclass
class EvalResult:
    median_rank: float
    acc_at: dict[int, float]
    rank_variance: float
    mrr: float
    n_samples: int
    n_excluded_targets: int = 0

    def to_json(self) -> dict:
        return {
            "median_rank": self.median_rank,
            "acc_at": {str(n): v for n, v in self.acc_at.items()},
            "rank_variance": self.rank_variance,
            "mrr": self.mrr,
            "n_samples": self.n_samples,
            "n_excluded_targets": self.n_excluded_targets,
        }


def target_rank(ranking: list[RankedWord], target: int) -> int:
    """0-based position of the target word id in a ranking list."""
    for rw in ranking:
        if rw.word_id == target:
            return rw.rank
    raise EvaluationError(f"target word id {target} not present in ranking")


def rank_of_target(scores: np.ndarray, target: int) -> int:
    """Rank under the tie rule (descending score, ascending word id) computed
    directly from the score vector, without materializing the full list."""
    s = scores[target]
    higher = int(np.sum(scores > s))
    tied_before = int(np.sum(scores[:target] == s))
    return higher + tied_before


def compute_metrics(ranks, n_excluded: int = 0) -> EvalResult:
    ranks = np.asarray(list(ranks), dtype=np.int64)
    if ranks.size == 0:
        raise EvaluationError("no ranks to aggregate")
    if np.any(ranks < 0):
        raise EvaluationError("ranks must be non-negative")
    ordered = np.sort(ranks)
    median = float(ordered[(ranks.size - 1) // 2])  # lower median
    acc = {n: float(np.mean(ranks < n)) for n in ACC_CUTOFFS}
    variance = float(np.var(ranks))  # population variance
    mrr = float(np.mean(1.0 / (ranks + 1.0)))
    return EvalResult(median_rank=median, acc_at=acc, rank_variance=variance,
                      mrr=mrr, n_samples=int(ranks.size),
                      n_excluded_targets=n_excluded)


def grouped_metrics(ranks, group_keys) -> dict[str, EvalResult]:
    """Per-group metrics; samples whose key is None fall into "unannotated"."""
    ranks = list(ranks)
    group_keys = list(group_keys)
    if len(ranks) != len(group_keys):
        raise EvaluationError("ranks and group keys must align")
    buckets: dict[str, list[int]] = {}
    for r, key in zip(ranks, group_keys):
        buckets.setdefault("unannotated" if key is None else str(key), []).append(r)
    return {key: compute_metrics(rs) for key, rs in sorted(buckets.items())}


# ---------------------------------------------------------------------------
# bilingual lexicon + pivot baseline
# ---------------------------------------------------------------------------

class BilingualLexicon:
    """source surface -> first listed target surface."""

    def __init__(self, pairs):
        self.mapping: dict[str, str] = {}
        for src, tgt in pairs:
            self.mapping.setdefault(src, tgt)  # duplicates: first kept
        if not self.mapping:
            raise EvaluationError("empty lexicon")

    def __len__(self) -> int:
        return len(self.mapping)

    def translate(self, surface: str) -> str | None:
        return self.mapping.get(surface)

    @classmethod
    def load(cls, path: str) -> "BilingualLexicon":
        pairs = []
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    raise EvaluationError(
                        f"{path}:{lineno}: expected 'source<TAB>target'")
                pairs.append((parts[0], parts[1]))
        return cls(pairs)


def pivot_baseline(mono_ranking: list[RankedWord], lexicon: BilingualLexicon,
                   m: int, target_index=None,
                   target_language: str | None = None) -> list[RankedWord]:
    """Translate the top-m words of a monolingual ranking through a lexicon.

    Keeps the first translation of each word, drops unmapped words,
    deduplicates preserving first occurrence, and re-ranks from 0.  When a
    target index is supplied, translated surfaces resolve to its word ids
    (unresolvable surfaces get id -1).
    """
    if m < 1:
        raise EvaluationError(f"m must be >= 1, got {m}")
    out: list[RankedWord] = []
    seen: set[str] = set()
    for rw in mono_ranking[:m]:
        translated = lexicon.translate(rw.surface)
        if translated is None or translated in seen:
            continue
        seen.add(translated)
        word_id = -1
        if target_index is not None and target_language is not None:
            resolved = target_index.word_id(target_language, translated)
            if resolved is not None:
                word_id = resolved
        out.append(RankedWord(word_id=word_id, surface=translated,
                              score=rw.score, rank=len(out)))
    return out


# ---------------------------------------------------------------------------
# definition-deletion ablation
# ---------------------------------------------------------------------------

def ablation_filter(corpus: TrainingCorpus, target_words, fraction: float,
                    seed: int) -> tuple[TrainingCorpus, list[DictionaryEntry]]:
    """Remove the monolingual training definitions of a seeded
    ``fraction``-sample of ``target_words``.

    ``target_words`` holds (language, surface) pairs.  Only entries with
    split "train" and matching word language are touched; removed entries are
    returned for reporting.  fraction=0 is the identity, fraction=1 removes
    every listed word's training definitions.
    """
    if not 0.0 <= fraction <= 1.0:
        raise EvaluationError(f"fraction must be in [0, 1]: {fraction}")
    targets = sorted(set(target_words))
    n_remove = int(round(fraction * len(targets)))
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(targets))
    removed_words = {targets[int(i)] for i in order[:n_remove]}
    kept: list[DictionaryEntry] = []
    removed: list[DictionaryEntry] = []
    for e in corpus.entries:
        if (e.split == "train" and e.is_monolingual
                and (e.word_language, e.word) in removed_words):
            removed.append(e)
        else:
            kept.append(e)
    return TrainingCorpus(kept), removed


def metrics_report(split: str, language_pair: tuple[str, str],
                   result: EvalResult,
                   groups: dict[str, EvalResult] | None = None) -> dict:
    """The JSON structure written by the evaluation commands."""
    report = {
        "split": split,
        "language_pair": {"definition": language_pair[0], "word": language_pair[1]},
        "metrics": result.to_json(),
        "excluded": result.n_excluded_targets,
    }
    if groups is not None:
        report["groups"] = {k: v.to_json() for k, v in groups.items()}
    return report
