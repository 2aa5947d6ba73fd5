"""Synthetic toy-language generator for desk-scale experiments.

Builds one or two artificial languages over a shared concept grid.  Each
concept is an (attribute, category) pair; its word in a language is composed
from subword pieces that mirror the concept structure, and its definitions
are short descriptor phrases naming the attribute and category (plus a form
marker for three-piece words).  Because definitions identify words
compositionally and unambiguously, a small model can generalize to words
whose definitions were never trained on.

Word classes per language:

* ``simple``    one opaque piece (must be memorized),
* ``compound``  attribute piece + category piece,
* ``extended``  attribute + category + form piece, with the form named in
  every definition by its own descriptor word.

A ``sharing`` ratio in [0, 1] controls the probability that any given piece
or descriptor word is the same string in both languages — the mechanism that
lets a model trained on two monolingual corpora relate them.  The generator
also emits aligned (cross-lingual) entries, per-language word lists, and a
gold translation lexicon (a bijection over the concept set).

String classes use disjoint leading-letter pools and fixed lengths so that
greedy longest-match segmentation of every word recovers exactly the intended
pieces; the generator asserts this against the emitted vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .corpus import CorpusError, DictionaryEntry, TrainingCorpus
from .vocab import SPECIAL_TOKENS, SubwordVocab


class SynthError(CorpusError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    languages: tuple[str, ...] = ("aa",)
    word_count: int = 300
    defs_per_word: int = 3
    sharing: float = 0.0
    aligned_defs_per_word: int = 1
    description_count: int = 0
    synonyms_per_sense: int = 2
    filler_count: int = 4
    simple_fraction: float = 0.12
    extended_fraction: float = 0.15
    vocab_budget: int | None = None

    def __post_init__(self):
        if not 1 <= len(self.languages) <= 2:
            raise SynthError("languages must name one or two toy languages")
        if len(set(self.languages)) != len(self.languages):
            raise SynthError("duplicate language tag")
        if not 0.0 <= self.sharing <= 1.0:
            raise SynthError(f"sharing must be in [0, 1]: {self.sharing}")
        if self.word_count < 10:
            raise SynthError("word_count must be at least 10")
        if self.defs_per_word < 1:
            raise SynthError("defs_per_word must be at least 1")
        if self.simple_fraction + self.extended_fraction >= 1.0:
            raise SynthError("simple and extended fractions must leave room for compounds")


@dataclass
class SynthResult:
    corpus: TrainingCorpus
    vocab: SubwordVocab
    word_lists: dict[str, list[str]]
    lexicons: dict[tuple[str, str], list[tuple[str, str]]]
    annotations: dict[str, dict[str, str]]  # language -> surface -> word class
    spec: SynthSpec = field(repr=False)


# leading-letter pools per string class; keeping them disjoint (and lengths
# fixed per class) guarantees greedy longest-match segmentation
_ATTR_INITIALS = "bdfg"
_CAT_INITIALS = "lmnr"
_FORM_INITIALS = "st"
_SIMPLE_INITIALS = "jk"
_DESC_INITIALS = "pq"
_FILLER_INITIALS = "vw"
_TAIL = "abcdefghijklmnopqrstuvwxyz"

_TEMPLATES = (
    ("FIL", "A", "C"),
    ("C", "FIL", "A"),
    ("A", "C", "FIL"),
    ("FIL", "A", "FIL", "C"),
)


class _StringFactory:
    """Unique random strings with a class-specific initial and length."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.used: set[str] = set()

    def make(self, initials: str, length: int) -> str:
        for _ in range(10000):
            first = initials[self.rng.integers(len(initials))]
            tail = "".join(_TAIL[i] for i in self.rng.integers(len(_TAIL), size=length - 1))
            s = first + tail
            if s not in self.used:
                self.used.add(s)
                return s
        raise SynthError(f"string space exhausted for length {length}")


class _SharedInventory:
    """A list of strings per language, shared across languages per slot with
    probability ``sharing``."""

    def __init__(self, factory: _StringFactory, rng: np.random.Generator,
                 languages: tuple[str, ...], sharing: float,
                 initials: str, length: int):
        self.per_lang: dict[str, list[str]] = {lang: [] for lang in languages}
        self.factory = factory
        self.rng = rng
        self.languages = languages
        self.sharing = sharing
        self.initials = initials
        self.length = length

    def add_slot(self) -> None:
        share = len(self.languages) == 2 and self.rng.random() < self.sharing
        if share:
            s = self.factory.make(self.initials, self.length)
            for lang in self.languages:
                self.per_lang[lang].append(s)
        else:
            for lang in self.languages:
                self.per_lang[lang].append(self.factory.make(self.initials, self.length))

    def get(self, lang: str, slot: int) -> str:
        return self.per_lang[lang][slot]


def _grid_dims(word_count: int) -> tuple[int, int]:
    n_cat = max(3, round(math.sqrt(word_count / 2)))
    n_attr = math.ceil(word_count / n_cat) + 2
    return n_attr, n_cat


def synth_generate(spec: SynthSpec, seed: int) -> SynthResult:
    """Generate corpus + vocabulary + word lists + gold lexicon.

    Deterministic in (spec, seed): repeated calls produce byte-identical
    corpora.
    """
    rng = np.random.default_rng(seed)
    factory = _StringFactory(rng)
    langs = spec.languages
    n_attr, n_cat = _grid_dims(spec.word_count)
    n_form = 3

    attrs = _SharedInventory(factory, rng, langs, spec.sharing, _ATTR_INITIALS, 3)
    cats = _SharedInventory(factory, rng, langs, spec.sharing, _CAT_INITIALS, 3)
    forms = _SharedInventory(factory, rng, langs, spec.sharing, _FORM_INITIALS, 2)
    for _ in range(n_attr):
        attrs.add_slot()
    for _ in range(n_cat):
        cats.add_slot()
    for _ in range(n_form):
        forms.add_slot()

    # descriptor synonyms per attribute/category/form, and fillers
    def desc_inventory(n_slots: int, n_syn: int) -> list[_SharedInventory]:
        groups = []
        for _ in range(n_slots):
            inv = _SharedInventory(factory, rng, langs, spec.sharing,
                                   _DESC_INITIALS, 5)
            for _ in range(n_syn):
                inv.add_slot()
            groups.append(inv)
        return groups

    attr_desc = desc_inventory(n_attr, spec.synonyms_per_sense)
    cat_desc = desc_inventory(n_cat, spec.synonyms_per_sense)
    form_desc = desc_inventory(n_form, spec.synonyms_per_sense)
    fillers = _SharedInventory(factory, rng, langs, spec.sharing, _FILLER_INITIALS, 3)
    for _ in range(spec.filler_count):
        fillers.add_slot()

    # concepts: sample (attribute, category) cells without replacement
    cells = rng.choice(n_attr * n_cat, size=spec.word_count, replace=False)
    concepts = [(int(c) // n_cat, int(c) % n_cat) for c in cells]
    n_simple = round(spec.simple_fraction * spec.word_count)
    n_extended = round(spec.extended_fraction * spec.word_count)
    classes = ["simple"] * n_simple + ["extended"] * n_extended
    classes += ["compound"] * (spec.word_count - len(classes))
    rng.shuffle(classes)
    form_of = [int(rng.integers(n_form)) for _ in range(spec.word_count)]

    simple_pieces = _SharedInventory(factory, rng, langs, spec.sharing,
                                     _SIMPLE_INITIALS, 5)
    for _ in range(n_simple):
        simple_pieces.add_slot()

    surfaces: dict[str, list[str]] = {lang: [] for lang in langs}
    intended_pieces: dict[str, list[list[str]]] = {lang: [] for lang in langs}
    simple_slot = 0
    for ci, (a, c) in enumerate(concepts):
        cls = classes[ci]
        for lang in langs:
            if cls == "simple":
                word = simple_pieces.get(lang, simple_slot)
                pieces = [word]
            elif cls == "compound":
                word = attrs.get(lang, a) + cats.get(lang, c)
                pieces = [attrs.get(lang, a), "##" + cats.get(lang, c)]
            else:
                word = attrs.get(lang, a) + cats.get(lang, c) + forms.get(lang, form_of[ci])
                pieces = [attrs.get(lang, a), "##" + cats.get(lang, c),
                          "##" + forms.get(lang, form_of[ci])]
            surfaces[lang].append(word)
            intended_pieces[lang].append(pieces)
        if cls == "simple":
            simple_slot += 1

    for lang in langs:
        if len(set(surfaces[lang])) != spec.word_count:
            raise SynthError("surface collision in generated words")

    # vocabulary: specials + every piece and descriptor string, stable order
    tokens: list[str] = list(SPECIAL_TOKENS)
    token_set = set(tokens)

    def add_token(tok: str) -> None:
        if tok not in token_set:
            token_set.add(tok)
            tokens.append(tok)

    for lang in langs:
        for s in attrs.per_lang[lang]:
            add_token(s)
        for s in cats.per_lang[lang]:
            add_token("##" + s)
        for s in forms.per_lang[lang]:
            add_token("##" + s)
        for s in simple_pieces.per_lang[lang]:
            add_token(s)
        for group in (attr_desc, cat_desc, form_desc):
            for inv in group:
                for s in inv.per_lang[lang]:
                    add_token(s)
        for s in fillers.per_lang[lang]:
            add_token(s)
    if spec.vocab_budget is not None and len(tokens) > spec.vocab_budget:
        raise SynthError(
            f"generated vocabulary needs {len(tokens)} tokens, over the "
            f"budget of {spec.vocab_budget}; raise the budget or shrink the world")
    vocab = SubwordVocab(tokens)

    # the whole construction stands on exact segmentation; verify it
    for lang in langs:
        for word, pieces in zip(surfaces[lang], intended_pieces[lang]):
            got = [vocab.tokens[i] for i in vocab.tokenize_word(word)]
            if got != pieces:
                raise SynthError(
                    f"{word!r} segments to {got}, intended {pieces}")

    def make_definition(lang: str, ci: int, taken: set[str]) -> str:
        a, c = concepts[ci]
        for _ in range(64):
            parts = []
            template = _TEMPLATES[rng.integers(len(_TEMPLATES))]
            for slot in template:
                if slot == "A":
                    parts.append(attr_desc[a].get(lang, int(rng.integers(spec.synonyms_per_sense))))
                elif slot == "C":
                    parts.append(cat_desc[c].get(lang, int(rng.integers(spec.synonyms_per_sense))))
                else:
                    parts.append(fillers.get(lang, int(rng.integers(spec.filler_count))))
            if classes[ci] == "extended":
                parts.append(form_desc[form_of[ci]].get(
                    lang, int(rng.integers(spec.synonyms_per_sense))))
            text = " ".join(parts)
            if text not in taken:
                taken.add(text)
                return text
        raise SynthError(
            "definition space exhausted; lower defs_per_word or raise synonyms")

    entries: list[DictionaryEntry] = []
    taken_defs: dict[tuple[str, int], set[str]] = {}
    for lang in langs:
        for ci in range(spec.word_count):
            taken = taken_defs.setdefault((lang, ci), set())
            for _ in range(spec.defs_per_word):
                entries.append(DictionaryEntry(
                    word=surfaces[lang][ci], word_language=lang,
                    definition=make_definition(lang, ci, taken),
                    definition_language=lang))

    if len(langs) == 2 and spec.aligned_defs_per_word > 0:
        for def_lang in langs:
            for word_lang in langs:
                if def_lang == word_lang:
                    continue
                for ci in range(spec.word_count):
                    taken = taken_defs[(def_lang, ci)]
                    for _ in range(spec.aligned_defs_per_word):
                        entries.append(DictionaryEntry(
                            word=surfaces[word_lang][ci], word_language=word_lang,
                            definition=make_definition(def_lang, ci, taken),
                            definition_language=def_lang))

    if spec.description_count:
        if spec.description_count > spec.word_count:
            raise SynthError("description_count exceeds word_count")
        for lang in langs:
            picks = rng.choice(spec.word_count, size=spec.description_count,
                               replace=False)
            for ci in sorted(int(i) for i in picks):
                entries.append(DictionaryEntry(
                    word=surfaces[lang][ci], word_language=lang,
                    definition=make_definition(lang, ci, taken_defs[(lang, ci)]),
                    definition_language=lang, split="description"))

    lexicons: dict[tuple[str, str], list[tuple[str, str]]] = {}
    if len(langs) == 2:
        l1, l2 = langs
        lexicons[(l1, l2)] = list(zip(surfaces[l1], surfaces[l2]))
        lexicons[(l2, l1)] = list(zip(surfaces[l2], surfaces[l1]))

    annotations = {
        lang: {surfaces[lang][ci]: classes[ci] for ci in range(spec.word_count)}
        for lang in langs
    }
    return SynthResult(
        corpus=TrainingCorpus(entries),
        vocab=vocab,
        word_lists={lang: list(surfaces[lang]) for lang in langs},
        lexicons=lexicons,
        annotations=annotations,
        spec=spec,
    )


def save_lexicon(pairs: list[tuple[str, str]], path: str) -> None:
    """Write tab-separated source/target pairs."""
    with open(path, "w", encoding="utf-8") as f:
        for src, tgt in pairs:
            f.write(f"{src}\t{tgt}\n")
