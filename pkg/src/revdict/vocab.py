"""Subword vocabulary and greedy longest-match-first word segmentation.

Vocabulary file format: UTF-8 text, one token per line, token id = zero-based
line index.  Five special tokens must be present: [PAD], [UNK], [CLS], [SEP],
[MASK].  Non-initial word pieces carry a continuation marker prefix ("##").
"""

from __future__ import annotations

import re


PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
MASK_TOKEN = "[MASK]"
SPECIAL_TOKENS = (PAD_TOKEN, UNK_TOKEN, CLS_TOKEN, SEP_TOKEN, MASK_TOKEN)

CONTINUATION_MARKER = "##"

# words longer than this are not segmented (guards the O(len^2) greedy scan)
MAX_WORD_CHARS = 200

_WORD_SPLIT_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


class VocabError(ValueError):
    """Raised when a vocabulary file violates the format contract."""


class SubwordVocab:
    """Immutable token-string <-> id table with special-token ids.

    Ids are dense integers ``0..len(tokens)-1``.  Instances are safe for
    unrestricted concurrent reads; nothing is mutated after construction.
    """

    def __init__(self, tokens: list[str], lowercase: bool = True):
        seen: dict[str, int] = {}
        for i, tok in enumerate(tokens):
            if tok == "":
                raise VocabError(f"empty token at line {i + 1}")
            if tok in seen:
                raise VocabError(
                    f"duplicate token {tok!r} at line {i + 1} "
                    f"(first seen at line {seen[tok] + 1})"
                )
            seen[tok] = i
        for special in SPECIAL_TOKENS:
            if special not in seen:
                raise VocabError(f"special token absent: {special}")
        self.tokens: tuple[str, ...] = tuple(tokens)
        self.id_of: dict[str, int] = seen
        self.lowercase = lowercase
        self.continuation_marker = CONTINUATION_MARKER
        self.pad_id = seen[PAD_TOKEN]
        self.unk_id = seen[UNK_TOKEN]
        self.cls_id = seen[CLS_TOKEN]
        self.sep_id = seen[SEP_TOKEN]
        self.mask_id = seen[MASK_TOKEN]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.id_of

    def normalize(self, surface: str) -> str:
        return surface.lower() if self.lowercase else surface

    def tokenize_word(self, surface: str) -> list[int]:
        """Segment one surface word into subword ids.

        Greedy longest-match-first: at each position the longest vocabulary
        token matching the remainder is taken; non-initial candidates carry
        the continuation marker.  Unsegmentable words map to ``[unk_id]``.
        """
        if not surface or any(c.isspace() for c in surface):
            raise ValueError(f"surface must be non-empty and whitespace-free: {surface!r}")
        word = self.normalize(surface)
        if len(word) > MAX_WORD_CHARS:
            return [self.unk_id]
        ids: list[int] = []
        start = 0
        while start < len(word):
            end = len(word)
            match = None
            while end > start:
                piece = word[start:end]
                if start > 0:
                    piece = self.continuation_marker + piece
                if piece in self.id_of:
                    match = piece
                    break
                end -= 1
            if match is None:
                return [self.unk_id]
            ids.append(self.id_of[match])
            start = end
        return ids

    def tokenize_text(self, text: str) -> list[int]:
        """Tokenize free text: whitespace/punctuation word split, then
        :meth:`tokenize_word` per word, ids concatenated in order."""
        ids: list[int] = []
        for word in _WORD_SPLIT_RE.findall(text):
            ids.extend(self.tokenize_word(word))
        return ids

    def detokenize(self, ids: list[int]) -> str:
        """Inverse of tokenize_word for non-UNK sequences: concatenates
        pieces with continuation markers stripped."""
        out = []
        for i in ids:
            tok = self.tokens[i]
            if tok.startswith(self.continuation_marker):
                tok = tok[len(self.continuation_marker):]
            out.append(tok)
        return "".join(out)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for tok in self.tokens:
                f.write(tok + "\n")


def load_vocab(path: str, lowercase: bool = True) -> SubwordVocab:
    """Load a vocabulary file (one token per line, line number = id)."""
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    tokens = [line.strip() for line in lines if line.strip() != ""]
    if not tokens:
        raise VocabError(f"empty vocabulary file: {path}")
    return SubwordVocab(tokens, lowercase=lowercase)
