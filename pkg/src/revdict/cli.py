"""Command-line entry points for the full pipeline.

Commands: synth, build-index, train, eval, query, serve, export-scores,
grad-check.  Every command accepts ``--config FILE`` (JSON) whose keys are
the long option names with dashes replaced by underscores; explicit flags
override config-file values.  ``REVDICT_MODEL_DIR`` supplies the default
model directory for commands that read a trained checkpoint.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import synth as synth_mod
from .corpus import CorpusError, SplitSizes, load_corpus, make_splits
from .encoder import ModelConfig, build_input, pack_batch
from .evaluation import grouped_metrics, metrics_report
from .pipeline import (PipelineError, evaluate_entries, load_bundle,
                       rank_definition, save_bundle, scores_for_definitions)
from .scoring import write_score_matrix
from .training import (TrainConfig, grad_check, random_params_for_check,
                       train)
from .vocab import load_vocab
from .word_index import WordIndex, build_index, choose_k

MODEL_DIR_ENV = "REVDICT_MODEL_DIR"


class CliError(Exception):
    pass


def _load_config_defaults(argv: list[str]) -> dict:
    """Pull --config FILE out of argv and return its JSON contents."""
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            with open(argv[i + 1], encoding="utf-8") as f:
                return json.load(f)
        if arg.startswith("--config="):
            with open(arg.split("=", 1)[1], encoding="utf-8") as f:
                return json.load(f)
    return {}


def _model_dir(args) -> str:
    model_dir = args.model_dir or os.environ.get(MODEL_DIR_ENV)
    if not model_dir:
        raise CliError(
            f"no model directory: pass --model-dir or set {MODEL_DIR_ENV}")
    return model_dir


def _add_model_dir(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model-dir", default=None,
                   help=f"directory with checkpoint.zip/vocab.txt/index.json "
                        f"(default: ${MODEL_DIR_ENV})")


def _add_config(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, metavar="FILE",
                   help="JSON file with defaults for this command's options")


def cmd_synth(args) -> int:
    spec = synth_mod.SynthSpec(
        languages=tuple(args.languages.split(",")),
        word_count=args.words, defs_per_word=args.defs_per_word,
        sharing=args.sharing, aligned_defs_per_word=args.aligned_defs,
        description_count=args.descriptions,
        simple_fraction=args.simple_fraction)
    result = synth_mod.synth_generate(spec, seed=args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    corpus = result.corpus
    split_report = None
    if args.split:
        corpus, split_report = make_splits(
            corpus, seed=args.seed,
            monolingual=SplitSizes(dev=args.n_dev, seen=args.n_seen,
                                   unseen=args.n_unseen),
            aligned=SplitSizes(dev=0, seen=0, unseen=args.n_unseen_aligned))
    corpus.save(os.path.join(args.out_dir, "corpus.jsonl"))
    result.vocab.save(os.path.join(args.out_dir, "vocab.txt"))
    for lang, words in result.word_lists.items():
        with open(os.path.join(args.out_dir, f"words.{lang}.txt"), "w",
                  encoding="utf-8") as f:
            f.write("\n".join(words) + "\n")
    for (src, tgt), pairs in result.lexicons.items():
        synth_mod.save_lexicon(
            pairs, os.path.join(args.out_dir, f"lexicon.{src}-{tgt}.tsv"))
    for lang, annotation in result.annotations.items():
        with open(os.path.join(args.out_dir, f"classes.{lang}.tsv"), "w",
                  encoding="utf-8") as f:
            for word, cls in annotation.items():
                f.write(f"{word}\t{cls}\n")
    summary = {"languages": list(spec.languages), "entries": len(corpus),
               "vocab_size": len(result.vocab), "out_dir": args.out_dir}
    if split_report:
        summary["splits"] = split_report
    print(json.dumps(summary, indent=1, sort_keys=True))
    return 0


def cmd_build_index(args) -> int:
    vocab = load_vocab(args.vocab)
    words_by_language = {}
    for item in args.words:
        if "=" not in item:
            raise CliError(f"--words expects LANG=FILE, got {item!r}")
        lang, path = item.split("=", 1)
        with open(path, encoding="utf-8") as f:
            words_by_language[lang] = [w.strip() for w in f if w.strip()]
    if args.k is not None:
        k = args.k
    else:
        counts = [len(vocab.tokenize_word(w))
                  for words in words_by_language.values() for w in words]
        k = choose_k(counts, coverage=args.coverage)
    index = build_index(vocab, words_by_language, k)
    index.save(args.out)
    print(json.dumps({"k": k, "out": args.out,
                      "sizes": {lang: index.size(lang) for lang in index.languages},
                      "excluded": len(index.exclusions)}, indent=1, sort_keys=True))
    return 0


def cmd_train(args) -> int:
    vocab = load_vocab(args.vocab)
    corpus, rejected = load_corpus(args.corpus)
    if rejected:
        print(f"warning: {len(rejected)} malformed corpus lines skipped",
              file=sys.stderr)
    if args.index:
        index = WordIndex.load(args.index, vocab.mask_id)
    else:
        words = {lang: sorted({e.word for e in corpus.entries
                               if e.word_language == lang})
                 for lang in corpus.languages}
        counts = [len(vocab.tokenize_word(e.word))
                  for e in corpus.select("train")]
        index = build_index(vocab, words, choose_k(counts, coverage=0.99))
    config = TrainConfig(
        mode=args.mode, epochs=args.epochs, batch_size=args.batch_size,
        learning_rate=args.learning_rate, dropout=args.dropout,
        num_layers=args.layers, d_model=args.d_model, num_heads=args.heads,
        ffn_dim=args.ffn_dim, max_seq_len=args.max_seq_len,
        head_mode=args.head_mode)
    os.makedirs(args.out_dir, exist_ok=True)
    result = train(corpus, index, vocab, config, seed=args.seed,
                   log_path=os.path.join(args.out_dir, "train_log.jsonl"))
    bundle = result.to_bundle(vocab, index)
    save_bundle(bundle, args.out_dir)
    print(json.dumps({
        "out_dir": args.out_dir, "epochs": len(result.history),
        "best_epoch": result.best_epoch,
        "best_dev_acc10": result.best_dev_acc10,
        "skipped_targets": result.skipped_targets,
    }, indent=1, sort_keys=True))
    return 0


def cmd_eval(args) -> int:
    bundle = load_bundle(_model_dir(args))
    corpus, _ = load_corpus(args.corpus)
    entries = corpus.select(args.split)
    if args.def_lang and args.word_lang:
        entries = [e for e in entries if e.pair == (args.def_lang, args.word_lang)]
    if not entries:
        raise CliError(f"no entries for split {args.split!r}")
    result, outcomes = evaluate_entries(bundle, entries)
    pair = (args.def_lang or "*", args.word_lang or "*")
    groups = None
    if args.group_by == "pieces":
        groups = grouped_metrics([o.rank for o in outcomes],
                                 [o.piece_count for o in outcomes])
    elif args.group_by == "annotation":
        if not args.annotation:
            raise CliError("--group-by annotation needs --annotation FILE")
        mapping = {}
        with open(args.annotation, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    word, _, group = line.rstrip("\n").partition("\t")
                    mapping[word] = group
        groups = grouped_metrics([o.rank for o in outcomes],
                                 [mapping.get(o.entry.word) for o in outcomes])
    report = metrics_report(args.split, pair, result, groups)
    print(json.dumps(report, indent=1, sort_keys=True))
    return 0


def cmd_query(args) -> int:
    bundle = load_bundle(_model_dir(args))
    target = args.target_lang or args.def_lang
    ranking = rank_definition(bundle, args.definition, args.def_lang, target,
                              top_n=args.top_n)
    print(json.dumps({
        "definition": args.definition,
        "definition_language": args.def_lang,
        "target_language": target,
        "model_id": bundle.model_id,
        "candidates": [{"surface": r.surface, "score": r.score, "rank": r.rank}
                       for r in ranking],
    }, indent=1, sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    bundle = load_bundle(_model_dir(args))
    app = create_app(bundle, cors_origins=args.cors_origin)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_export_scores(args) -> int:
    bundle = load_bundle(_model_dir(args))
    target = args.target_lang or args.def_lang
    if not bundle.supports(args.def_lang, target):
        raise CliError(f"model does not support {args.def_lang}->{target}")
    scores = scores_for_definitions(bundle, [args.definition], target)[0]
    write_score_matrix(args.out, scores)
    print(json.dumps({"out": args.out, "k": int(scores.shape[0]),
                      "vocab_size": int(scores.shape[1])}, sort_keys=True))
    return 0


def cmd_grad_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    from .vocab import SubwordVocab
    tokens = (["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
              + [f"w{i}" for i in range(40)]
              + [f"##p{i}" for i in range(19)])
    vocab = SubwordVocab(tokens)
    words = {"aa": [f"w{i}p{i % 19}" if i % 3 else f"w{i}" for i in range(0, 30)],
             "bb": [f"w{i}p{i % 19}" if i % 3 else f"w{i}" for i in range(30, 40)]}
    index = build_index(vocab, words, k=2)
    config = ModelConfig(
        num_layers=args.layers, d_model=args.d_model, num_heads=args.heads,
        ffn_dim=args.ffn_dim, vocab_size=len(vocab), max_seq_len=32,
        num_languages=2, dropout=0.0, head_mode=args.head_mode)
    params = random_params_for_check(config, seed=args.seed)
    samples, targets = [], []
    for b in range(args.batch_size):
        lang = "aa" if b % 2 == 0 else "bb"
        def_ids = list(rng.integers(5, len(vocab), size=int(rng.integers(3, 8))))
        samples.append(build_input(vocab, 2, def_ids,
                                   language_id=0 if lang == "aa" else 1,
                                   max_seq_len=32))
        targets.append((lang, int(rng.integers(index.size(lang)))))
    batch = pack_batch(samples, vocab.pad_id)
    report = grad_check(params, batch, targets, index,
                        tolerance=args.tolerance,
                        coords_per_tensor=args.coords, seed=args.seed)
    print(report.table())
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="revdict",
        description="Reverse-dictionary engine: describe a word, get ranked candidates.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic toy corpus")
    _add_config(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--languages", default="aa")
    p.add_argument("--words", type=int, default=300)
    p.add_argument("--defs-per-word", type=int, default=4)
    p.add_argument("--sharing", type=float, default=0.0)
    p.add_argument("--aligned-defs", type=int, default=1)
    p.add_argument("--descriptions", type=int, default=0)
    p.add_argument("--simple-fraction", type=float, default=0.12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", action="store_true",
                   help="also assign dev/seen/unseen splits")
    p.add_argument("--n-dev", type=int, default=50)
    p.add_argument("--n-seen", type=int, default=50)
    p.add_argument("--n-unseen", type=int, default=40)
    p.add_argument("--n-unseen-aligned", type=int, default=50)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build-index", help="tokenize word lists into a padded index")
    _add_config(p)
    p.add_argument("--vocab", required=True)
    p.add_argument("--words", nargs="+", required=True, metavar="LANG=FILE")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--coverage", type=float, default=0.99,
                   help="pick smallest k covering this fraction of words")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("train", help="train a model and save a checkpoint")
    _add_config(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--index", default=None,
                   help="index JSON (default: build from corpus words)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mode", default="monolingual",
                   choices=["monolingual", "bilingual_aligned",
                            "unaligned_multilingual"])
    p.add_argument("--head-mode", default=None,
                   choices=["mlm_head", "embedding_dot"])
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--d-model", type=int, default=32)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--ffn-dim", type=int, default=64)
    p.add_argument("--max-seq-len", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="metrics for a corpus split")
    _add_config(p)
    _add_model_dir(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default="unseen",
                   choices=["train", "dev", "seen", "unseen", "description",
                            "question"])
    p.add_argument("--def-lang", default=None)
    p.add_argument("--word-lang", default=None)
    p.add_argument("--group-by", default=None,
                   choices=["pieces", "annotation"])
    p.add_argument("--annotation", default=None,
                   help="TSV word<TAB>group file for --group-by annotation")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("query", help="rank candidates for one definition")
    _add_config(p)
    _add_model_dir(p)
    p.add_argument("--definition", "--def", dest="definition", required=True)
    p.add_argument("--def-lang", required=True)
    p.add_argument("--target-lang", default=None)
    p.add_argument("--top-n", type=int, default=10)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("serve", help="run the HTTP query service")
    _add_config(p)
    _add_model_dir(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--cors-origin", action="append", default=None,
                   help="origin allowed for cross-origin requests (repeatable)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export-scores",
                       help="write the raw (k, |V|) score matrix for a definition")
    _add_config(p)
    _add_model_dir(p)
    p.add_argument("--definition", "--def", dest="definition", required=True)
    p.add_argument("--def-lang", required=True)
    p.add_argument("--target-lang", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_scores)

    p = sub.add_parser("grad-check",
                       help="verify analytic gradients against finite differences")
    _add_config(p)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--d-model", type=int, default=16)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--ffn-dim", type=int, default=24)
    p.add_argument("--head-mode", default="mlm_head",
                   choices=["mlm_head", "embedding_dot"])
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--coords", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_grad_check)

    return parser


def _merge_config_into_argv(argv: list[str], defaults: dict) -> list[str]:
    """Splice config-file values in right after the subcommand so that
    explicit flags (which come later) win, and required options can be
    satisfied from the file."""
    injected: list[str] = []
    for key, value in defaults.items():
        if key == "config":
            continue
        flag = "--" + key.replace("_", "-")
        if flag in argv or any(a.startswith(flag + "=") for a in argv):
            continue
        if isinstance(value, bool):
            if value:
                injected.append(flag)
        elif isinstance(value, list):
            injected.append(flag)
            injected.extend(str(v) for v in value)
        else:
            injected.extend([flag, str(value)])
    return argv[:1] + injected + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        defaults = _load_config_defaults(argv)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config file: {exc}", file=sys.stderr)
        return 1
    if defaults and argv:
        argv = _merge_config_into_argv(argv, defaults)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, CorpusError, PipelineError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
