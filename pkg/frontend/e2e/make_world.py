"""Build the toy model directory + test cases for the UI end-to-end run.

Usage: python3 make_world.py OUT_DIR
Writes OUT_DIR/model/* (servable artifacts) and OUT_DIR/cases.json with 20
seen-split (definition, gold word) pairs.
"""

import json
import os
import sys

from revdict import (SplitSizes, SynthSpec, TrainConfig, build_index,
                     choose_k, make_splits, save_bundle, synth_generate,
                     train)


def main(out_dir: str) -> None:
    world = synth_generate(
        SynthSpec(languages=("aa",), word_count=200, defs_per_word=4), seed=6)
    corpus, _ = make_splits(world.corpus, seed=6,
                            monolingual=SplitSizes(dev=40, seen=20, unseen=20))
    k = choose_k([world.vocab.tokenize_word(e.word)
                  for e in corpus.select("train")], coverage=0.99)
    index = build_index(world.vocab, world.word_lists, k)
    result = train(corpus, index, world.vocab,
                   TrainConfig(mode="monolingual", epochs=35), seed=6)
    model_dir = os.path.join(out_dir, "model")
    save_bundle(result.to_bundle(world.vocab, index), model_dir)

    cases = [{"definition": e.definition, "definition_language": "aa",
              "target_language": "aa", "word": e.word}
             for e in corpus.select("seen")[:20]]
    with open(os.path.join(out_dir, "cases.json"), "w", encoding="utf-8") as f:
        json.dump(cases, f, indent=1)
    print(json.dumps({"model_dir": model_dir, "cases": len(cases),
                      "dev_acc10": result.best_dev_acc10}))


if __name__ == "__main__":
    main(sys.argv[1])
