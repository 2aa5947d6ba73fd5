"""Cross-lingual retrieval without a single aligned training pair.

Two toy languages share half their subword inventory. Training sees only
monolingual definition->word data (language embedding + token-embedding
scoring); at query time the model retrieves words of the *other* language.
Compared against the classic pivot baseline (monolingual retrieval, then
lexicon translation of the top words) and against a model trained with
aligned pairs.

Note the pivot baseline here gets the *gold* one-to-one lexicon, which makes
it close to an oracle on this toy world; real bilingual lexicons are
ambiguous and incomplete, which is exactly what direct cross-lingual
retrieval avoids.
"""

from revdict import (BilingualLexicon, SplitSizes, SynthSpec, TrainConfig,
                     build_index, choose_k, compute_metrics, evaluate_entries,
                     make_splits, pivot_baseline, rank_definition,
                     synth_generate, train)

spec = SynthSpec(languages=("aa", "bb"), word_count=200, defs_per_word=4,
                 sharing=0.5, aligned_defs_per_word=1, simple_fraction=0.2)
world = synth_generate(spec, seed=0)
corpus, _ = make_splits(world.corpus, seed=0,
                        monolingual=SplitSizes(dev=40, seen=40, unseen=25),
                        aligned=SplitSizes(dev=0, seen=0, unseen=50))
k = choose_k([world.vocab.tokenize_word(e.word)
              for e in corpus.select("train")], coverage=0.99)
index = build_index(world.vocab, world.word_lists, k)

test = [e for e in corpus.select("unseen") if not e.is_monolingual]
print(f"{len(test)} bilingual test queries (definition in one language, "
      f"gold word in the other).\n")

config = TrainConfig(mode="unaligned_multilingual", epochs=30)
unaligned = train(corpus, index, world.vocab, config, seed=0)
bundle = unaligned.to_bundle(world.vocab, index)
metrics, _ = evaluate_entries(bundle, test)
print(f"Unaligned model (monolingual data only): "
      f"cross-lingual Acc@1/10 = {metrics.acc_at[1]:.2f}/{metrics.acc_at[10]:.2f}, "
      f"MRR = {metrics.mrr:.3f}")

# pivot baseline: retrieve in the definition's language, translate top-10
lexicons = {pair: BilingualLexicon(pairs)
            for pair, pairs in world.lexicons.items()}
ranks = []
for e in test:
    mono = rank_definition(bundle, e.definition, e.definition_language,
                           e.definition_language)
    translated = pivot_baseline(mono, lexicons[(e.definition_language,
                                                e.word_language)], m=10,
                                target_index=index,
                                target_language=e.word_language)
    hit = next((r.rank for r in translated if r.surface == e.word), None)
    ranks.append(hit if hit is not None else index.size(e.word_language))
pivot_metrics = compute_metrics(ranks)
print(f"Pivot baseline (top-10 + gold lexicon):       "
      f"cross-lingual Acc@1/10 = {pivot_metrics.acc_at[1]:.2f}/"
      f"{pivot_metrics.acc_at[10]:.2f}, MRR = {pivot_metrics.mrr:.3f}")

aligned = train(corpus, index, world.vocab,
                TrainConfig(mode="bilingual_aligned", epochs=30), seed=0)
metrics_al, _ = evaluate_entries(aligned.to_bundle(world.vocab, index), test)
print(f"Aligned model (sees definition->word pairs):  "
      f"cross-lingual Acc@1/10 = {metrics_al.acc_at[1]:.2f}/"
      f"{metrics_al.acc_at[10]:.2f}, MRR = {metrics_al.mrr:.3f}")

e = test[0]
print(f"\nExample: {e.definition_language!r} description "
      f"{e.definition!r} -> {e.word_language!r} candidates:")
for r in rank_definition(bundle, e.definition, e.definition_language,
                         e.word_language, top_n=5):
    marker = " <-- gold" if r.surface == e.word else ""
    print(f"  #{r.rank}  {r.surface:12s} score={r.score:8.3f}{marker}")
