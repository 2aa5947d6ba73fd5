"""Dictionary-entry corpora: JSON-lines ingestion, grouping, and splits.

Corpus file format: UTF-8 JSON-lines, one object per line with keys
``word``, ``word_language``, ``definition``, ``definition_language`` and an
optional ``split`` (default "train").  Entries are grouped by
(definition_language, word_language); monolingual entries have equal tags,
aligned entries differ.

Split semantics: "seen" test entries are verbatim copies of training
entries; "unseen" test words have every definition removed from their
group's training data; "dev" entries are held out for checkpoint selection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace, asdict

import numpy as np

SPLITS = ("train", "dev", "seen", "unseen", "description", "question")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class DictionaryEntry:
    word: str
    word_language: str
    definition: str
    definition_language: str
    split: str = "train"

    def __post_init__(self):
        if not self.word or not self.definition:
            raise CorpusError("entry needs a non-empty word and definition")
        if self.split not in SPLITS:
            raise CorpusError(f"unknown split tag: {self.split!r}")

    @property
    def pair(self) -> tuple[str, str]:
        return (self.definition_language, self.word_language)

    @property
    def is_monolingual(self) -> bool:
        return self.definition_language == self.word_language


class TrainingCorpus:
    """Immutable list of entries with language-pair and split views."""

    def __init__(self, entries: list[DictionaryEntry]):
        if not entries:
            raise CorpusError("corpus has no entries")
        self.entries = list(entries)
        langs: set[str] = set()
        for e in self.entries:
            langs.add(e.word_language)
            langs.add(e.definition_language)
        self.languages = sorted(langs)

    def __len__(self) -> int:
        return len(self.entries)

    def pairs(self) -> list[tuple[str, str]]:
        seen: dict[tuple[str, str], None] = {}
        for e in self.entries:
            seen.setdefault(e.pair, None)
        return list(seen)

    def select(self, split: str | None = None,
               pair: tuple[str, str] | None = None,
               monolingual_only: bool = False) -> list[DictionaryEntry]:
        out = []
        for e in self.entries:
            if split is not None and e.split != split:
                continue
            if pair is not None and e.pair != pair:
                continue
            if monolingual_only and not e.is_monolingual:
                continue
            out.append(e)
        return out

    def train_view(self, mode: str) -> tuple[list[DictionaryEntry], list[DictionaryEntry]]:
        """(train, dev) entries visible to a training mode.

        ``unaligned_multilingual`` sees monolingual entries only — aligned
        pairs are unreachable through this view.  ``monolingual`` requires a
        single-language corpus view.  ``bilingual_aligned`` sees everything.
        """
        if mode == "unaligned_multilingual":
            return (self.select("train", monolingual_only=True),
                    self.select("dev", monolingual_only=True))
        if mode == "monolingual":
            train = self.select("train", monolingual_only=True)
            dev = self.select("dev", monolingual_only=True)
            langs = {e.word_language for e in train}
            if len(langs) > 1:
                raise CorpusError(
                    f"monolingual mode needs one language, found {sorted(langs)}; "
                    "use unaligned_multilingual for joint monolingual training")
            return train, dev
        if mode == "bilingual_aligned":
            return self.select("train"), self.select("dev")
        raise CorpusError(f"unknown training mode: {mode!r}")

    def words_for(self, pair: tuple[str, str],
                  split: str | None = None) -> list[str]:
        seen: dict[str, None] = {}
        for e in self.select(split=split, pair=pair):
            seen.setdefault(e.word, None)
        return list(seen)

    def counts(self) -> dict:
        out: dict[str, dict[str, int]] = {}
        for e in self.entries:
            key = f"{e.definition_language}->{e.word_language}"
            out.setdefault(key, {})
            out[key][e.split] = out[key].get(e.split, 0) + 1
        return out

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(asdict(e), ensure_ascii=False, sort_keys=True) + "\n"
            for e in self.entries)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_jsonl())


REQUIRED_FIELDS = ("word", "word_language", "definition", "definition_language")


def load_corpus(path: str, allowed_languages: list[str] | None = None
                ) -> tuple[TrainingCorpus, list[tuple[int, str]]]:
    """Read a JSON-lines corpus; returns (corpus, rejected-line report).

    Malformed lines are reported as (line_number, reason) and skipped; a file
    with zero valid entries raises.  With ``allowed_languages``, entries using
    other language tags are rejected.
    """
    entries: list[DictionaryEntry] = []
    rejected: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                rejected.append((lineno, f"invalid JSON: {exc.msg}"))
                continue
            missing = [k for k in REQUIRED_FIELDS if k not in obj]
            if missing:
                rejected.append((lineno, f"missing fields: {', '.join(missing)}"))
                continue
            if allowed_languages is not None:
                bad = {obj["word_language"], obj["definition_language"]} - set(allowed_languages)
                if bad:
                    rejected.append((lineno, f"unknown language tag: {sorted(bad)}"))
                    continue
            try:
                entries.append(DictionaryEntry(
                    word=obj["word"], word_language=obj["word_language"],
                    definition=obj["definition"],
                    definition_language=obj["definition_language"],
                    split=obj.get("split", "train")))
            except CorpusError as exc:
                rejected.append((lineno, str(exc)))
    if not entries:
        raise CorpusError(f"{path}: no valid entries ({len(rejected)} rejected)")
    return TrainingCorpus(entries), rejected


# ---------------------------------------------------------------------------
# splits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSizes:
    dev: int = 50
    seen: int = 50
    unseen: int = 40


def make_splits(corpus: TrainingCorpus, seed: int,
                monolingual: SplitSizes = SplitSizes(),
                aligned: SplitSizes | None = SplitSizes(dev=0, seen=0, unseen=50),
                ) -> tuple[TrainingCorpus, dict]:
    """Assign dev/seen/unseen splits within each language-pair group.

    Per group: unseen words are sampled first and all their group entries
    removed from training (one kept as the test entry); dev entries are held
    out from words that keep at least one training definition; seen entries
    are verbatim copies of surviving training entries.
    """
    rng = np.random.default_rng(seed)
    out: list[DictionaryEntry] = []
    report: dict = {}
    for pair in sorted(corpus.pairs()):
        group = corpus.select(pair=pair)
        pre_split = [e for e in group if e.split != "train"]
        pool = [e for e in group if e.split == "train"]
        sizes = monolingual if pair[0] == pair[1] else (aligned or monolingual)
        words = []
        seen_words: set[str] = set()
        for e in pool:
            if e.word not in seen_words:
                seen_words.add(e.word)
                words.append(e.word)
        if sizes.unseen > len(words):
            raise CorpusError(
                f"group {pair}: {len(words)} words cannot supply "
                f"{sizes.unseen} unseen test words")

        unseen_words = {
            words[int(i)]
            for i in rng.choice(len(words), size=sizes.unseen, replace=False)
        } if sizes.unseen else set()
        dropped = 0
        kept_pool: list[DictionaryEntry] = []
        unseen_entries: list[DictionaryEntry] = []
        by_word: dict[str, list[DictionaryEntry]] = {}
        for e in pool:
            if e.word in unseen_words:
                by_word.setdefault(e.word, []).append(e)
            else:
                kept_pool.append(e)
        for word in sorted(by_word):
            defs = by_word[word]
            pick = int(rng.integers(len(defs)))
            unseen_entries.append(replace(defs[pick], split="unseen"))
            dropped += len(defs) - 1

        # dev: hold out definitions of words that keep another one in train
        word_counts: dict[str, int] = {}
        for e in kept_pool:
            word_counts[e.word] = word_counts.get(e.word, 0) + 1
        dev_entries: list[DictionaryEntry] = []
        if sizes.dev:
            order = rng.permutation(len(kept_pool))
            chosen: set[int] = set()
            for idx in order:
                if len(dev_entries) == sizes.dev:
                    break
                e = kept_pool[idx]
                if word_counts[e.word] >= 2:
                    word_counts[e.word] -= 1
                    chosen.add(int(idx))
                    dev_entries.append(replace(e, split="dev"))
            if len(dev_entries) < sizes.dev:
                raise CorpusError(
                    f"group {pair}: not enough multi-definition words for "
                    f"{sizes.dev} dev entries")
            kept_pool = [e for i, e in enumerate(kept_pool) if i not in chosen]

        seen_entries: list[DictionaryEntry] = []
        if sizes.seen:
            if sizes.seen > len(kept_pool):
                raise CorpusError(
                    f"group {pair}: {len(kept_pool)} training entries cannot "
                    f"supply {sizes.seen} seen test entries")
            picks = rng.choice(len(kept_pool), size=sizes.seen, replace=False)
            seen_entries = [replace(kept_pool[int(i)], split="seen") for i in picks]

        out.extend(kept_pool)
        out.extend(dev_entries)
        out.extend(seen_entries)
        out.extend(unseen_entries)
        out.extend(pre_split)
        report["->".join(pair)] = {
            "train": len(kept_pool), "dev": len(dev_entries),
            "seen": len(seen_entries), "unseen": len(unseen_entries),
            "unseen_definitions_dropped": dropped,
        }
    return TrainingCorpus(out), report
