"""Training: exact gradients, Adam with warmup/decay, and the epoch loop.

The loss is word-level cross entropy: subword scores at the k mask positions
are gathered into one score per candidate word of the sample's target
language, soft-maxed within that language's word list, and the target's
negative log-probability is summed over samples (mean reduction is a config
flag that only rescales the learning rate).

Gradients flow from the per-word loss through the gather into the subword
score matrix and back through the encoder; ``grad_check`` verifies every
parameter tensor against a central finite-difference oracle computed from
the forward pass alone.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .corpus import TrainingCorpus
from .encoder import (EncoderParams, InputBatch, ModelConfig, build_input,
                      forward_scores, init_params, pack_batch)
from .pipeline import ModelBundle, evaluate_entries
from .vocab import SubwordVocab
from .word_index import WordIndex

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

TRAIN_MODES = ("monolingual", "bilingual_aligned", "unaligned_multilingual")


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    mode: str = "monolingual"
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 1e-3
    warmup_fraction: float = 0.1
    clip_norm: float | None = 1.0
    loss_reduction: str = "sum"
    head_mode: str | None = None  # None: mlm_head, or embedding_dot when unaligned
    num_layers: int = 2
    d_model: int = 32
    num_heads: int = 4
    ffn_dim: int = 64
    max_seq_len: int = 64
    dropout: float = 0.1

    def __post_init__(self):
        if self.mode not in TRAIN_MODES:
            raise TrainingError(f"mode must be one of {TRAIN_MODES}")
        if self.batch_size < 1:
            raise TrainingError("batch_size must be positive")
        if not 0.0 <= self.warmup_fraction <= 1.0:
            raise TrainingError("warmup_fraction must be in [0, 1]")
        if self.loss_reduction not in ("sum", "mean"):
            raise TrainingError("loss_reduction must be 'sum' or 'mean'")

    def resolved_head_mode(self) -> str:
        if self.head_mode is not None:
            return self.head_mode
        return "embedding_dot" if self.mode == "unaligned_multilingual" else "mlm_head"


@dataclass
class Schedule:
    peak_lr: float
    warmup_steps: int
    total_steps: int

    def lr_at(self, step: int) -> float:
        """Linear warmup to peak, then linear decay to zero."""
        if self.total_steps <= 0:
            return self.peak_lr
        if step < self.warmup_steps:
            return self.peak_lr * (step + 1) / max(1, self.warmup_steps)
        remaining = self.total_steps - self.warmup_steps
        if remaining <= 0:
            return self.peak_lr
        return self.peak_lr * max(0.0, (self.total_steps - step) / remaining)


@dataclass
class TrainState:
    params: EncoderParams
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int
    seed: int
    schedule: Schedule

    @classmethod
    def fresh(cls, params: EncoderParams, seed: int, schedule: Schedule) -> "TrainState":
        return cls(params=params, m=params.zeros_like(), v=params.zeros_like(),
                   step=0, seed=seed, schedule=schedule)


# ---------------------------------------------------------------------------
# loss + gradients
# ---------------------------------------------------------------------------

def word_level_loss(scores: np.ndarray, targets: list[tuple[str, int]],
                    index: WordIndex, reduction: str = "sum",
                    want_grad: bool = True):
    """Loss over a (B, k, |V|) score batch; returns (loss, d_scores | None).

    Each sample's scores are gathered over its own target language's padded
    word matrix and normalized within that language only.
    """
    B, k, _ = scores.shape
    if len(targets) != B:
        raise TrainingError("targets must align with the batch")
    d_scores = np.zeros_like(scores) if want_grad else None
    loss = 0.0
    by_lang: dict[str, list[int]] = {}
    for i, (lang, _) in enumerate(targets):
        by_lang.setdefault(lang, []).append(i)
    for lang in sorted(by_lang):
        rows = np.asarray(by_lang[lang], dtype=np.int64)
        padded = index.padded_matrix(lang)
        if padded.shape[1] != k:
            raise TrainingError(
                f"index k = {padded.shape[1]} does not match scores k = {k}")
        sub = scores[rows]                       # (b, k, |V|)
        ws = np.zeros((rows.size, padded.shape[0]), dtype=np.float64)
        for i in range(k):
            ws += sub[:, i, padded[:, i]]
        tgt = np.asarray([targets[r][1] for r in rows], dtype=np.int64)
        if np.any(tgt < 0) or np.any(tgt >= padded.shape[0]):
            raise TrainingError(f"target word id out of range for {lang!r}")
        mx = ws.max(axis=1, keepdims=True)
        lse = (mx[:, 0] + np.log(np.exp(ws - mx).sum(axis=1)))
        arange = np.arange(rows.size)
        loss += float(np.sum(lse - ws[arange, tgt]))
        if want_grad:
            p = np.exp(ws - lse[:, None])
            p[arange, tgt] -= 1.0
            d_sub = np.zeros_like(sub)
            grid_rows = np.broadcast_to(arange[:, None], p.shape)
            for i in range(k):
                cols = np.broadcast_to(padded[:, i], p.shape)
                np.add.at(d_sub[:, i, :], (grid_rows, cols),
                          p.astype(sub.dtype))
            d_scores[rows] = d_sub
    if reduction == "mean":
        loss /= B
        if want_grad:
            d_scores /= B
    if not math.isfinite(loss):
        raise TrainingError(f"non-finite loss: {loss}")
    return loss, d_scores


def backward(params: EncoderParams, batch: InputBatch,
             targets: list[tuple[str, int]], index: WordIndex, *,
             reduction: str = "sum", training: bool = False,
             rng: np.random.Generator | None = None):
    """Exact gradients of the word-level loss w.r.t. every parameter tensor.

    Returns (grads, loss).  Aborts with the offending tensor name if any
    gradient comes back non-finite.
    """
    from .encoder import backward_scores
    scores, cache = forward_scores(params, batch, training=training, rng=rng,
                                   return_cache=True)
    loss, d_scores = word_level_loss(scores, targets, index, reduction)
    grads = backward_scores(params, cache, d_scores)
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient in tensor {name}")
    return grads, loss


def loss_only(params: EncoderParams, batch: InputBatch,
              targets: list[tuple[str, int]], index: WordIndex,
              reduction: str = "sum") -> float:
    scores = forward_scores(params, batch)
    loss, _ = word_level_loss(scores, targets, index, reduction, want_grad=False)
    return loss


# ---------------------------------------------------------------------------
# gradient checking
# ---------------------------------------------------------------------------

@dataclass
class TensorCheck:
    max_rel_error: float
    passed: bool
    coords_checked: int


@dataclass
class GradCheckReport:
    tolerance: float
    tensors: dict[str, TensorCheck]
    elapsed_s: float

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.tensors.values())

    def table(self) -> str:
        width = max(len(n) for n in self.tensors)
        lines = [f"{'tensor':<{width}}  max_rel_err  result"]
        for name, check in self.tensors.items():
            status = "pass" if check.passed else "FAIL"
            lines.append(f"{name:<{width}}  {check.max_rel_error:11.3e}  {status}")
        lines.append(f"overall: {'pass' if self.passed else 'FAIL'} "
                     f"(tolerance {self.tolerance:g}, {self.elapsed_s:.1f}s)")
        return "\n".join(lines)


# Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
# The floor absorbs float64 cancellation noise (~1e-12 absolute here) on
# coordinates whose true gradient is negligible; it sits two orders above
# that noise and two below the tolerance.
REL_ERROR_FLOOR = 1e-6


def compare_with_finite_differences(
        params: EncoderParams, batch: InputBatch,
        targets: list[tuple[str, int]], index: WordIndex,
        grads: dict[str, np.ndarray], *, tolerance: float = 1e-4,
        coords_per_tensor: int = 6, step: float = 1e-4,
        seed: int = 0, reduction: str = "sum") -> GradCheckReport:
    """Central-difference check of supplied gradients on sampled coordinates."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    report: dict[str, TensorCheck] = {}
    for name in params.names():
        tensor = params[name]
        n = min(coords_per_tensor, tensor.size)
        coords = rng.choice(tensor.size, size=n, replace=False)
        worst = 0.0
        for c in coords:
            c = int(c)
            orig = tensor.flat[c]
            tensor.flat[c] = orig + step
            up = loss_only(params, batch, targets, index, reduction)
            tensor.flat[c] = orig - step
            down = loss_only(params, batch, targets, index, reduction)
            tensor.flat[c] = orig
            numeric = (up - down) / (2.0 * step)
            analytic = float(grads[name].flat[c])
            denom = max(abs(analytic), abs(numeric), REL_ERROR_FLOOR)
            worst = max(worst, abs(analytic - numeric) / denom)
        report[name] = TensorCheck(max_rel_error=worst,
                                   passed=worst < tolerance,
                                   coords_checked=n)
    return GradCheckReport(tolerance=tolerance, tensors=report,
                           elapsed_s=time.perf_counter() - t0)


def grad_check(params: EncoderParams, batch: InputBatch,
               targets: list[tuple[str, int]], index: WordIndex, *,
               tolerance: float = 1e-4, coords_per_tensor: int = 6,
               step: float = 1e-4, seed: int = 0,
               reduction: str = "sum") -> GradCheckReport:
    """Analytic-vs-numeric gradient report; 64-bit params recommended."""
    params64 = params if params.dtype == np.float64 else params.astype(np.float64)
    grads, _ = backward(params64, batch, targets, index, reduction=reduction)
    return compare_with_finite_differences(
        params64, batch, targets, index, grads, tolerance=tolerance,
        coords_per_tensor=coords_per_tensor, step=step, seed=seed,
        reduction=reduction)


def random_params_for_check(config: ModelConfig, seed: int,
                            std: float = 0.1) -> EncoderParams:
    """A generic random parameter point for gradient checking.

    Every tensor gets non-degenerate values (biases included, gains jittered
    around one) so that no gradient path is structurally near zero the way it
    is at the training initialization.
    """
    rng = np.random.default_rng(seed)
    params = init_params(config, seed=seed, dtype=np.float64)
    for name in params.names():
        shape = params[name].shape
        if name.endswith(".g"):
            params[name] = 1.0 + rng.normal(0.0, std, size=shape)
        else:
            params[name] = rng.normal(0.0, std, size=shape)
    return params


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------

def global_norm(grads: dict[str, np.ndarray]) -> float:
    total = 0.0
    for g in grads.values():
        total += float(np.sum(np.square(g, dtype=np.float64)))
    return math.sqrt(total)


def adam_step(state: TrainState, grads: dict[str, np.ndarray],
              clip_norm: float | None = None) -> TrainState:
    """In-place adaptive-moment update with bias correction.

    Applies global-norm clipping first, then the scheduled learning rate for
    the current step.  Returns the same state for chaining.
    """
    scale = 1.0
    if clip_norm is not None:
        norm = global_norm(grads)
        if norm > clip_norm:
            scale = clip_norm / norm
    lr = state.schedule.lr_at(state.step)
    t = state.step + 1
    bc1 = 1.0 - ADAM_BETA1 ** t
    bc2 = 1.0 - ADAM_BETA2 ** t
    for name in state.params.names():
        g = grads[name] * scale if scale != 1.0 else grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * np.square(g)
        update = (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
        state.params[name] -= (lr * update).astype(state.params.dtype)
    state.step = t
    return state


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------

@dataclass
class TrainSample:
    sample: object           # encoder.InputSample
    language: str
    word_id: int


@dataclass
class TrainResult:
    history: list[dict]
    best_params: EncoderParams
    best_epoch: int
    best_dev_acc10: float
    state: TrainState
    languages: list[str]
    mode: str
    skipped_targets: int
    truncated_definitions: int

    def to_bundle(self, vocab: SubwordVocab, index: WordIndex) -> ModelBundle:
        return ModelBundle(params=self.best_params, vocab=vocab, index=index,
                           languages=self.languages, mode=self.mode,
                           model_id="unsaved")


def prepare_samples(corpus_entries, vocab: SubwordVocab, index: WordIndex,
                    languages: list[str], use_language_ids: bool,
                    max_seq_len: int) -> tuple[list[TrainSample], int, int]:
    """Tokenize entries into model inputs; drops entries whose gold word is
    not indexable.  Returns (samples, skipped, truncated)."""
    samples: list[TrainSample] = []
    skipped = truncated = 0
    for e in corpus_entries:
        word_id = index.word_id(e.word_language, e.word)
        if word_id is None:
            skipped += 1
            continue
        lang_id = languages.index(e.word_language) if use_language_ids else None
        s = build_input(vocab, index.k, vocab.tokenize_text(e.definition),
                        language_id=lang_id, max_seq_len=max_seq_len)
        truncated += s.truncated
        samples.append(TrainSample(sample=s, language=e.word_language,
                                   word_id=word_id))
    return samples, skipped, truncated


def train(corpus: TrainingCorpus, index: WordIndex, vocab: SubwordVocab,
          config: TrainConfig, seed: int,
          log_path: str | None = None) -> TrainResult:
    """Run the full loop and keep the checkpoint with the best dev Acc@10.

    Deterministic in (corpus, config, seed): shuffling, dropout and
    initialization all derive from the seed.  The unaligned mode draws
    training and dev data through the monolingual-only corpus view.
    """
    train_entries, dev_entries = corpus.train_view(config.mode)
    if not train_entries:
        raise TrainingError("empty training split")
    languages = list(corpus.languages)
    unaligned = config.mode == "unaligned_multilingual"
    model_config = ModelConfig(
        num_layers=config.num_layers, d_model=config.d_model,
        num_heads=config.num_heads, ffn_dim=config.ffn_dim,
        vocab_size=len(vocab), max_seq_len=config.max_seq_len,
        num_languages=len(languages) if unaligned else 0,
        dropout=config.dropout, head_mode=config.resolved_head_mode())

    seeds = np.random.SeedSequence(seed).spawn(3)
    params = init_params(model_config, seed=seeds[0], dtype=np.float32)
    shuffle_rng = np.random.default_rng(seeds[1])
    dropout_rng = np.random.default_rng(seeds[2])

    samples, skipped, truncated = prepare_samples(
        train_entries, vocab, index, languages, unaligned, config.max_seq_len)
    if not samples:
        raise TrainingError("no trainable samples (all gold words unindexed?)")

    n = len(samples)
    steps_per_epoch = math.ceil(n / config.batch_size)
    schedule = Schedule(
        peak_lr=config.learning_rate,
        warmup_steps=int(round(config.warmup_fraction * config.epochs * steps_per_epoch)),
        total_steps=config.epochs * steps_per_epoch)
    state = TrainState.fresh(params, seed, schedule)

    def dev_acc10() -> float:
        if not dev_entries:
            return float("nan")
        bundle = ModelBundle(params=state.params, vocab=vocab, index=index,
                             languages=languages, mode=config.mode)
        result, _ = evaluate_entries(bundle, dev_entries)
        return result.acc_at[10]

    history: list[dict] = []
    best_params = state.params.copy()
    best_epoch = 0
    best_acc = dev_acc10() if dev_entries else float("-inf")
    log_file = open(log_path, "w", encoding="utf-8") if log_path else None
    try:
        for epoch in range(1, config.epochs + 1):
            order = shuffle_rng.permutation(n)
            total_loss = 0.0
            lr = 0.0
            for start in range(0, n, config.batch_size):
                chosen = [samples[int(i)] for i in order[start:start + config.batch_size]]
                batch = pack_batch([c.sample for c in chosen], vocab.pad_id)
                targets = [(c.language, c.word_id) for c in chosen]
                lr = state.schedule.lr_at(state.step)
                grads, loss = backward(
                    state.params, batch, targets, index,
                    reduction=config.loss_reduction, training=True,
                    rng=dropout_rng)
                if config.loss_reduction == "mean":
                    loss *= len(chosen)
                total_loss += loss
                adam_step(state, grads, clip_norm=config.clip_norm)
            acc = dev_acc10()
            record = {"epoch": epoch, "train_loss": total_loss / n,
                      "dev_acc10": acc, "lr": lr}
            history.append(record)
            if log_file:
                log_file.write(json.dumps(record, sort_keys=True) + "\n")
                log_file.flush()
            # ties go to the later epoch: dev accuracy quantizes coarsely on
            # small dev sets while the fit keeps improving
            if dev_entries and acc >= best_acc:
                best_acc = acc
                best_epoch = epoch
                best_params = state.params.copy()
    finally:
        if log_file:
            log_file.close()
    if not dev_entries:
        best_params = state.params.copy()
        best_epoch = config.epochs
        best_acc = float("nan")
    return TrainResult(history=history, best_params=best_params,
                       best_epoch=best_epoch, best_dev_acc10=best_acc,
                       state=state, languages=languages, mode=config.mode,
                       skipped_targets=skipped,
                       truncated_definitions=truncated)
