"""Subword segmentation and the padded word index.

Walks through the two data structures everything else stands on: a
vocabulary with greedy longest-match segmentation, and the per-language word
index that fixes every candidate word as a length-k id sequence padded with
[MASK].
"""

from revdict import SubwordVocab, build_index, choose_k

vocab = SubwordVocab([
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "play", "run", "jump", "##ing", "##er", "##s", "kitchen",
])

print("A word splits into an initial piece plus ## continuations:")
for word in ("playing", "player", "runs", "kitchen", "jumping", "quartz"):
    ids = vocab.tokenize_word(word)
    pieces = [vocab.tokens[i] for i in ids]
    print(f"  {word:10s} -> {pieces}")

print("\nDefinitions tokenize word by word:")
ids = vocab.tokenize_text("playing running")
print(f"  'playing running' -> {ids} = {[vocab.tokens[i] for i in ids]}")

words = ["play", "playing", "player", "running", "jumps", "jumping",
         "kitchen", "quartz"]
counts = [len(vocab.tokenize_word(w)) for w in words]
print(f"\nPiece counts for the candidate list: {dict(zip(words, counts))}")

k = choose_k(counts, coverage=0.99)
print(f"choose_k(coverage=0.99) -> k = {k} "
      f"(smallest k covering 99% of candidate words)")

index = build_index(vocab, {"en": words}, k=k)
print(f"\nIndex holds {index.size('en')} words; each padded to k={index.k} "
      f"ids with [MASK]:")
for entry in index.entries_for("en")[:4]:
    print(f"  {entry.surface:10s} pieces={entry.pieces} padded={entry.padded}")
print("Excluded (with reasons):",
      [(x.surface, x.reason) for x in index.exclusions])
