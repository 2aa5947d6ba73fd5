"""Train a toy monolingual reverse dictionary end to end.

Generates a compositional synthetic language, splits it into train/dev plus
seen/unseen test sets, trains the small transformer, and reports the rank
metrics on every split — including the grouped-by-piece-count view.

Runs in well under a minute on a laptop core.
"""

import time

from revdict import (SplitSizes, SynthSpec, TrainConfig, build_index,
                     choose_k, evaluate_entries, grouped_metrics, make_splits,
                     synth_generate, train)

t0 = time.time()
spec = SynthSpec(languages=("toy",), word_count=200, defs_per_word=4)
world = synth_generate(spec, seed=1)
print(f"Generated {len(world.corpus)} definitions over "
      f"{len(world.word_lists['toy'])} words; vocabulary of {len(world.vocab)} pieces.")
print("Sample entries:")
for e in world.corpus.entries[:3]:
    print(f"  {e.word:12s} <- '{e.definition}'")

corpus, report = make_splits(world.corpus, seed=1,
                             monolingual=SplitSizes(dev=40, seen=40, unseen=25))
print("\nSplit sizes:", report["toy->toy"])

k = choose_k([world.vocab.tokenize_word(e.word)
              for e in corpus.select("train")], coverage=0.99)
index = build_index(world.vocab, world.word_lists, k)
print(f"k = {k}; ranking over {index.size('toy')} candidates.")

config = TrainConfig(mode="monolingual", epochs=30, batch_size=32)
result = train(corpus, index, world.vocab, config, seed=1)
print(f"\nTrained {len(result.history)} epochs in {time.time() - t0:.0f}s; "
      f"best dev Acc@10 = {result.best_dev_acc10:.2f} at epoch {result.best_epoch}.")

bundle = result.to_bundle(world.vocab, index)
for split in ("seen", "unseen"):
    metrics, outcomes = evaluate_entries(bundle, corpus.select(split))
    print(f"\n{split}: median rank {metrics.median_rank:.0f}, "
          f"Acc@1/10/100 = {metrics.acc_at[1]:.2f}/{metrics.acc_at[10]:.2f}/"
          f"{metrics.acc_at[100]:.2f}, MRR {metrics.mrr:.3f}")
    groups = grouped_metrics([o.rank for o in outcomes],
                             [o.piece_count for o in outcomes])
    for key, g in groups.items():
        print(f"  words with {key} piece(s): Acc@10 = {g.acc_at[10]:.2f} "
              f"({g.n_samples} samples)")
print("\nSingle-piece words have no shared subwords to lean on, so their")
print("unseen-definition accuracy collapses while compound words transfer.")
