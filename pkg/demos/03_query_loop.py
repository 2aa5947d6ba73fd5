"""The tip-of-the-tongue loop: describe a word, inspect ranked candidates.

Trains a quick model, then plays both sides of the query interaction the
HTTP service exposes, including ranking from an externally supplied score
matrix.
"""

from revdict import (SynthSpec, TrainConfig, aggregate, build_index, rank,
                     rank_definition, read_score_matrix,
                     scores_for_definitions, synth_generate, train,
                     write_score_matrix)

world = synth_generate(
    SynthSpec(languages=("toy",), word_count=120, defs_per_word=4), seed=3)
index = build_index(world.vocab, world.word_lists, 3)
result = train(world.corpus, index, world.vocab,
               TrainConfig(mode="monolingual", epochs=40), seed=3)
bundle = result.to_bundle(world.vocab, index)

entry = world.corpus.entries[0]
print(f"Gold word: {entry.word!r}")
print(f"Description: {entry.definition!r}\n")

print("Top candidates:")
for r in rank_definition(bundle, entry.definition, "toy", "toy", top_n=5):
    marker = " <-- gold" if r.surface == entry.word else ""
    print(f"  #{r.rank}  {r.surface:12s} score={r.score:8.3f}{marker}")

partial = " ".join(entry.definition.split()[:2])
print(f"\nA vaguer description ({partial!r}) still narrows the field:")
for r in rank_definition(bundle, partial, "toy", "toy", top_n=5):
    marker = " <-- gold" if r.surface == entry.word else ""
    print(f"  #{r.rank}  {r.surface:12s} score={r.score:8.3f}{marker}")

# the raw (k, |V|) score matrix is an interchange format: export it, load it
# back, and the ranking pipeline runs without the model
S = scores_for_definitions(bundle, [entry.definition], "toy")[0]
write_score_matrix("/tmp/demo_scores.bin", S)
S2 = read_score_matrix("/tmp/demo_scores.bin")
standalone = rank(aggregate(S2, index, "toy"), index, top_n=3)
print("\nStandalone ranking from the exported score matrix:")
for r in standalone:
    print(f"  #{r.rank}  {r.surface:12s} score={r.score:8.3f}")
