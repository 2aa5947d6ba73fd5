"""Acceptance suite: one test per release criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one [PASS]/[FAIL]
line per criterion.  The desk-scale learning criteria train real models and
take a few minutes in total.
"""

import json
import time

import numpy as np
import pytest

from revdict.corpus import SplitSizes, make_splits
from revdict.encoder import ModelConfig, build_input, pack_batch
from revdict.evaluation import ablation_filter, compute_metrics, metrics_report
from revdict.pipeline import evaluate_entries
from revdict.scoring import aggregate, multilingual_loss, rank, word_loss
from revdict.synth import SynthSpec, synth_generate
from revdict.training import TrainConfig, grad_check, random_params_for_check, train
from revdict.vocab import SubwordVocab
from revdict.word_index import WordIndex, WordIndexEntry, build_index, choose_k


def criterion(name: str, ok: bool, detail: str = "") -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}" + (f" — {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# shared worlds
# ---------------------------------------------------------------------------

MONO_SPEC = SynthSpec(languages=("aa",), word_count=300, defs_per_word=4)
BI_SPEC = SynthSpec(languages=("aa", "bb"), word_count=300, defs_per_word=4,
                    sharing=0.5, aligned_defs_per_word=1, simple_fraction=0.25)
BI_SEEDS = (0, 1, 2)
ABLATION_FRACTIONS = (0.0, 0.5, 1.0)


def build_world(spec, seed, aligned_unseen=70):
    result = synth_generate(spec, seed=seed)
    corpus, _ = make_splits(
        result.corpus, seed=seed,
        monolingual=SplitSizes(dev=50, seen=50, unseen=40),
        aligned=SplitSizes(dev=0, seen=0, unseen=aligned_unseen))
    k = choose_k([result.vocab.tokenize_word(e.word)
                  for e in corpus.select("train")], coverage=0.99)
    index = build_index(result.vocab, result.word_lists, k)
    return result, corpus, index


@pytest.fixture(scope="module")
def bilingual_worlds():
    return {seed: build_world(BI_SPEC, seed) for seed in BI_SEEDS}


@pytest.fixture(scope="module")
def ablation_matrix(bilingual_worlds):
    """Cross-lingual Acc@10 for every (seed, deletion fraction)."""
    acc: dict[tuple[int, float], float] = {}
    for seed, (result, corpus, index) in bilingual_worlds.items():
        bilingual_test = [e for e in corpus.select("unseen")
                          if not e.is_monolingual]
        targets = {(e.word_language, e.word) for e in bilingual_test}
        for p in ABLATION_FRACTIONS:
            filtered, _ = ablation_filter(corpus, targets, p, seed=seed)
            cfg = TrainConfig(mode="unaligned_multilingual", epochs=30,
                              batch_size=32)
            res = train(filtered, index, result.vocab, cfg, seed=seed)
            metrics, _ = evaluate_entries(res.to_bundle(result.vocab, index),
                                          bilingual_test)
            acc[(seed, p)] = metrics.acc_at[10]
    return acc


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

class TestGradientCorrectness:
    def test_grad_check_small_model(self):
        t0 = time.time()
        tokens = (["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
                  + [f"w{i}" for i in range(40)] + [f"##p{i}" for i in range(19)])
        vocab = SubwordVocab(tokens)
        assert len(vocab) == 64
        words = {"aa": [f"w{i}p{i % 19}" if i % 3 else f"w{i}" for i in range(30)],
                 "bb": [f"w{i}p{i % 19}" if i % 3 else f"w{i}" for i in range(30, 40)]}
        index = build_index(vocab, words, k=2)
        rng = np.random.default_rng(0)
        worst_overall = 0.0
        for head_mode in ("mlm_head", "embedding_dot"):
            config = ModelConfig(num_layers=2, d_model=16, num_heads=4,
                                 ffn_dim=24, vocab_size=64, max_seq_len=32,
                                 num_languages=2, dropout=0.0,
                                 head_mode=head_mode)
            params = random_params_for_check(config, seed=0)
            samples, targets = [], []
            for b in range(6):
                lang = "aa" if b % 2 == 0 else "bb"
                ids = list(rng.integers(5, 64, size=int(rng.integers(3, 8))))
                samples.append(build_input(vocab, 2, ids,
                                           language_id=0 if lang == "aa" else 1,
                                           max_seq_len=32))
                targets.append((lang, int(rng.integers(index.size(lang)))))
            batch = pack_batch(samples, vocab.pad_id)
            report = grad_check(params, batch, targets, index,
                                tolerance=1e-4, coords_per_tensor=8, seed=1)
            worst = max(t.max_rel_error for t in report.tensors.values())
            worst_overall = max(worst_overall, worst)
            assert report.passed, report.table()
        elapsed = time.time() - t0
        criterion("gradient correctness (d16 L2 |V|=64, both heads)",
                  elapsed < 60.0,
                  f"max rel err {worst_overall:.2e} < 1e-4, {elapsed:.1f}s < 60s")


def random_index(rng) -> tuple[WordIndex, int]:
    vocab_size = int(rng.integers(8, 50))
    k = int(rng.integers(1, 6))
    mask_id = int(rng.integers(vocab_size))
    n_words = int(rng.integers(1, 40))
    entries = []
    for wid in range(n_words):
        m = int(rng.integers(1, k + 1))
        pieces = tuple(int(x) for x in rng.integers(0, vocab_size, size=m))
        padded = pieces + (mask_id,) * (k - m)
        entries.append(WordIndexEntry(wid, f"word{wid}", "zz", pieces, padded))
    return WordIndex(k, {"zz": entries}, []), vocab_size


class TestScoringOracleEquivalence:
    def test_thousand_random_instances(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(1000):
            index, vocab_size = random_index(rng)
            S = rng.normal(scale=float(rng.uniform(0.1, 10.0)),
                           size=(index.k, vocab_size))
            fast = aggregate(S, index, "zz").scores
            slow = np.array([sum(float(S[i][p]) for i, p in enumerate(e.padded))
                             for e in index.entries_for("zz")])
            worst = max(worst, float(np.max(np.abs(fast - slow))))
            assert np.allclose(fast, slow, atol=1e-6)
        criterion("scoring oracle equivalence (1000 instances)", worst <= 1e-6,
                  f"max |vectorized - scalar loop| = {worst:.2e}")


class TestShiftInvariance:
    def test_hundred_random_shifts(self):
        rng = np.random.default_rng(77)
        max_loss_delta = 0.0
        for _ in range(100):
            index, vocab_size = random_index(rng)
            S = rng.normal(size=(index.k, vocab_size))
            c = float(rng.uniform(-50, 50))
            ws_a = aggregate(S, index, "zz")
            ws_b = aggregate(S + c, index, "zz")
            order_a = [r.word_id for r in rank(ws_a, index)]
            order_b = [r.word_id for r in rank(ws_b, index)]
            assert order_a == order_b
            target = int(rng.integers(index.size("zz")))
            delta = abs(word_loss(ws_a, target) - word_loss(ws_b, target))
            pair_delta = abs(
                multilingual_loss([(ws_a, target)])
                - multilingual_loss([(ws_b, target)]))
            max_loss_delta = max(max_loss_delta, delta, pair_delta)
        criterion("shift invariance (100 trials)", max_loss_delta <= 1e-6,
                  f"max loss delta {max_loss_delta:.2e}")


class TestMetricUnitSuite:
    def test_worked_and_degenerate_cases(self):
        r = compute_metrics([0, 3, 9, 150])
        ok = (r.acc_at[1] == 0.25 and r.acc_at[10] == 0.75
              and r.acc_at[100] == 0.75 and abs(r.mrr - 0.3392) <= 1e-4
              and r.median_rank == 3)
        perfect = compute_metrics([0, 0, 0])
        ok &= (perfect.median_rank == 0 and perfect.acc_at[1] == 1.0
               and perfect.rank_variance == 0.0 and perfect.mrr == 1.0)
        single = compute_metrics([5])
        ok &= (single.median_rank == 5 and single.acc_at[1] == 0.0
               and single.acc_at[10] == 1.0 and single.mrr == pytest.approx(1 / 6))
        criterion("metric unit suite", ok,
                  f"ranks [0,3,9,150]: acc@1={r.acc_at[1]} acc@10={r.acc_at[10]} "
                  f"mrr={r.mrr:.4f} median={r.median_rank}")


class TestKSelection:
    def test_exhaustive_scan_oracle(self):
        rng = np.random.default_rng(5)
        checked = 0
        for _ in range(300):
            counts = rng.integers(1, 15, size=int(rng.integers(1, 80))).tolist()
            got = choose_k(counts, coverage=0.99)
            expected = next(
                k for k in range(1, max(counts) + 1)
                if sum(c <= k for c in counts) / len(counts) >= 0.99)
            assert got == expected
            checked += 1
        result = synth_generate(MONO_SPEC, seed=0)
        counts = [len(result.vocab.tokenize_word(w))
                  for w in result.word_lists["aa"]]
        got = choose_k(counts, coverage=0.99)
        expected = next(k for k in range(1, max(counts) + 1)
                        if sum(c <= k for c in counts) / len(counts) >= 0.99)
        assert got == expected
        criterion("k-selection vs exhaustive scan", True,
                  f"{checked} random corpora + synthetic corpus (k={got})")


class TestMonolingualLearning:
    def test_desk_scale_run(self):
        t0 = time.time()
        result, corpus, index = build_world(MONO_SPEC, seed=0)
        cfg = TrainConfig(mode="monolingual", epochs=40, batch_size=32,
                          num_layers=2, d_model=32)
        res = train(corpus, index, result.vocab, cfg, seed=0)
        bundle = res.to_bundle(result.vocab, index)
        seen, _ = evaluate_entries(bundle, corpus.select("seen"))
        unseen, _ = evaluate_entries(bundle, corpus.select("unseen"))
        elapsed = time.time() - t0
        chance = 10 / index.size("aa")
        ok = (elapsed < 300.0 and seen.acc_at[10] >= 0.9
              and unseen.acc_at[10] >= 5 * chance)
        criterion("monolingual desk-scale learning", ok,
                  f"seen acc@10={seen.acc_at[10]:.3f} (>=0.9), "
                  f"unseen acc@10={unseen.acc_at[10]:.3f} "
                  f"(>={5 * chance:.3f}), {elapsed:.0f}s < 300s")


class TestUnalignedCrossLingualTrend:
    def test_unaligned_beats_chance_and_aligned_bounds_it(
            self, bilingual_worlds, ablation_matrix):
        result, corpus, index = bilingual_worlds[0]
        bilingual_test = [e for e in corpus.select("unseen")
                          if not e.is_monolingual]
        unaligned_acc = ablation_matrix[(0, 0.0)]
        cfg = TrainConfig(mode="bilingual_aligned", epochs=30, batch_size=32)
        res = train(corpus, index, result.vocab, cfg, seed=0)
        metrics, _ = evaluate_entries(res.to_bundle(result.vocab, index),
                                      bilingual_test)
        aligned_acc = metrics.acc_at[10]
        chance = 10 / index.size("aa")
        ok = unaligned_acc >= 3 * chance and aligned_acc >= unaligned_acc
        criterion("unaligned cross-lingual trend", ok,
                  f"unaligned acc@10={unaligned_acc:.3f} >= {3 * chance:.3f} "
                  f"(3x chance); aligned {aligned_acc:.3f} >= unaligned")


class TestAblationTrend:
    def test_definition_deletion_non_increasing(self, ablation_matrix):
        means = {p: float(np.mean([ablation_matrix[(s, p)] for s in BI_SEEDS]))
                 for p in ABLATION_FRACTIONS}
        ok = means[0.0] >= means[0.5] >= means[1.0]
        criterion("ablation trend (definition deletion)", ok,
                  "mean cross-lingual acc@10: "
                  + " >= ".join(f"p={p}: {means[p]:.3f}"
                                for p in ABLATION_FRACTIONS))


class TestDeterminism:
    def run_once(self, seed):
        spec = SynthSpec(languages=("aa",), word_count=80, defs_per_word=3)
        result, corpus, index = build_world_small(spec, seed)
        cfg = TrainConfig(mode="monolingual", epochs=6, batch_size=32)
        res = train(corpus, index, result.vocab, cfg, seed=seed)
        bundle = res.to_bundle(result.vocab, index)
        reports = {}
        for split in ("seen", "unseen"):
            metrics, _ = evaluate_entries(bundle, corpus.select(split))
            reports[split] = metrics_report(split, ("aa", "aa"), metrics)
        return json.dumps({"history": res.history, "metrics": reports},
                          sort_keys=True)

    def test_identical_seeds_identical_metrics_json(self):
        a = self.run_once(seed=123)
        b = self.run_once(seed=123)
        criterion("determinism (train+eval twice, same seed)", a == b,
                  f"{len(a)} bytes of metrics JSON identical")


def build_world_small(spec, seed):
    result = synth_generate(spec, seed=seed)
    corpus, _ = make_splits(result.corpus, seed=seed,
                            monolingual=SplitSizes(dev=20, seen=20, unseen=10))
    k = choose_k([result.vocab.tokenize_word(e.word)
                  for e in corpus.select("train")], coverage=0.99)
    index = build_index(result.vocab, result.word_lists, k)
    return result, corpus, index
