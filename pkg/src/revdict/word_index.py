"""Per-language candidate word lists with fixed-length padded subword sequences.

Every indexed word is segmented into at most ``k`` subword pieces and padded
to exactly ``k`` ids with the mask id, so that a k x |V| score matrix can be
gathered into one score per word.  Words that do not fit (more than k pieces,
or containing an unknown piece) are excluded and reported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .vocab import SubwordVocab


class WordIndexError(ValueError):
    """Raised for unusable index inputs (empty language, bad k)."""


@dataclass(frozen=True)
class WordIndexEntry:
    word_id: int
    surface: str
    language: str
    pieces: tuple[int, ...]
    padded: tuple[int, ...]


@dataclass(frozen=True)
class Exclusion:
    surface: str
    language: str
    reason: str  # "exceeds k" | "unknown piece" | "duplicate surface"


def choose_k(piece_counts, coverage: float = 0.99) -> int:
    """Smallest k such that at least ``coverage`` of the words have <= k pieces.

    ``piece_counts`` is an iterable of per-word piece counts, or of the
    tokenized sequences themselves (their lengths are used).
    """
    counts = [c if isinstance(c, int) else len(c) for c in piece_counts]
    if not counts:
        raise WordIndexError("choose_k: empty word list")
    if not 0.0 < coverage <= 1.0:
        raise WordIndexError(f"choose_k: coverage must be in (0, 1], got {coverage}")
    counts.sort()
    n = len(counts)
    covered = 0
    for k in range(1, counts[-1] + 1):
        while covered < n and counts[covered] <= k:
            covered += 1
        if covered / n >= coverage:
            return k
    return counts[-1]


class WordIndex:
    """Candidate words per language, each with its length-k padded sequence.

    word_ids are dense 0..count-1 within each language, assigned in input
    order after dropping exclusions.  Immutable after build.
    """

    def __init__(self, k: int, entries: dict[str, list[WordIndexEntry]],
                 exclusions: list[Exclusion]):
        self.k = k
        self.entries = entries
        self.exclusions = exclusions
        self._id_of = {
            lang: {e.surface: e.word_id for e in lang_entries}
            for lang, lang_entries in entries.items()
        }
        self._padded: dict[str, np.ndarray] = {}

    @property
    def languages(self) -> list[str]:
        return list(self.entries)

    def size(self, language: str) -> int:
        return len(self.entries_for(language))

    def entries_for(self, language: str) -> list[WordIndexEntry]:
        if language not in self.entries:
            raise WordIndexError(f"language not in index: {language!r}")
        return self.entries[language]

    def word_id(self, language: str, surface: str) -> int | None:
        """Dense id of a surface in a language, or None if excluded/absent."""
        if language not in self._id_of:
            raise WordIndexError(f"language not in index: {language!r}")
        return self._id_of[language].get(surface)

    def surface(self, language: str, word_id: int) -> str:
        return self.entries_for(language)[word_id].surface

    def padded_matrix(self, language: str) -> np.ndarray:
        """(count, k) int32 matrix of padded subword ids for a language."""
        if language not in self._padded:
            rows = [e.padded for e in self.entries_for(language)]
            self._padded[language] = np.asarray(rows, dtype=np.int32)
        return self._padded[language]

    def piece_counts(self, language: str) -> np.ndarray:
        return np.asarray([len(e.pieces) for e in self.entries_for(language)],
                          dtype=np.int32)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "languages": {
                lang: [{"word": e.surface, "pieces": list(e.pieces)}
                       for e in lang_entries]
                for lang, lang_entries in self.entries.items()
            },
            "exclusions": [
                {"word": x.surface, "language": x.language, "reason": x.reason}
                for x in self.exclusions
            ],
        }

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, ensure_ascii=False, indent=1)

    @classmethod
    def from_json(cls, data: dict, mask_id: int) -> "WordIndex":
        k = int(data["k"])
        entries: dict[str, list[WordIndexEntry]] = {}
        for lang, rows in data["languages"].items():
            lang_entries = []
            for wid, row in enumerate(rows):
                pieces = tuple(int(p) for p in row["pieces"])
                padded = pieces + (mask_id,) * (k - len(pieces))
                lang_entries.append(WordIndexEntry(wid, row["word"], lang, pieces, padded))
            entries[lang] = lang_entries
        exclusions = [Exclusion(x["word"], x["language"], x["reason"])
                      for x in data.get("exclusions", [])]
        return cls(k, entries, exclusions)

    @classmethod
    def load(cls, path: str, mask_id: int) -> "WordIndex":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f), mask_id)


def build_index(vocab: SubwordVocab, words_by_language: dict[str, list[str]],
                k: int) -> WordIndex:
    """Tokenize and pad every candidate word; drop and report misfits.

    Homograph surfaces within a language collapse to the first occurrence.
    Raises if any declared language ends up with zero retained words.
    """
    if k < 1:
        raise WordIndexError(f"k must be >= 1, got {k}")
    entries: dict[str, list[WordIndexEntry]] = {}
    exclusions: list[Exclusion] = []
    for lang, words in words_by_language.items():
        lang_entries: list[WordIndexEntry] = []
        seen: set[str] = set()
        for surface in words:
            if surface in seen:
                exclusions.append(Exclusion(surface, lang, "duplicate surface"))
                continue
            seen.add(surface)
            pieces = vocab.tokenize_word(surface)
            if vocab.unk_id in pieces:
                exclusions.append(Exclusion(surface, lang, "unknown piece"))
                continue
            if len(pieces) > k:
                exclusions.append(Exclusion(surface, lang, "exceeds k"))
                continue
            padded = tuple(pieces) + (vocab.mask_id,) * (k - len(pieces))
            lang_entries.append(WordIndexEntry(
                word_id=len(lang_entries), surface=surface, language=lang,
                pieces=tuple(pieces), padded=padded))
        if not lang_entries:
            raise WordIndexError(f"no indexable words for language {lang!r}")
        entries[lang] = lang_entries
    return WordIndex(k, entries, exclusions)
