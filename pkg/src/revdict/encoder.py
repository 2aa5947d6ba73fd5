"""Transformer encoder with post-norm residual layers and two scoring heads.

The input sequence is ``[CLS] + [MASK]*k + [SEP] + definition + [SEP]``; the
encoder produces hidden states whose rows at the k masked positions are turned
into a (k, |V|) subword score matrix either by an MLM head
(dense -> GELU -> layer norm -> decoder tied to the token embedding + bias)
or by a plain dot product with the token embedding table.

Forward and backward passes are written out by hand over numpy arrays; the
backward pass is verified against central finite differences in the test
suite.  All computation runs in the dtype of the parameter tensors (float32
for training, float64 for gradient checking).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.special import erf

from .vocab import SubwordVocab

LN_EPS = 1e-12
NEG_INF = -1e9

HEAD_MODES = ("mlm_head", "embedding_dot")


class EncoderError(RuntimeError):
    """Raised on shape violations or non-finite activations."""


@dataclass
class ModelConfig:
    num_layers: int
    d_model: int
    num_heads: int
    ffn_dim: int
    vocab_size: int
    max_seq_len: int = 128
    num_segments: int = 2
    num_languages: int = 0  # 0 disables the language embedding
    dropout: float = 0.1
    head_mode: str = "mlm_head"

    def __post_init__(self):
        if self.d_model % self.num_heads != 0:
            raise ValueError(
                f"d_model ({self.d_model}) must be divisible by "
                f"num_heads ({self.num_heads})")
        if self.head_mode not in HEAD_MODES:
            raise ValueError(f"head_mode must be one of {HEAD_MODES}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1): {self.dropout}")

    @property
    def head_dim(self) -> int:
        return self.d_model // self.num_heads

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "ModelConfig":
        return cls(**data)


class EncoderParams:
    """All learnable tensors, keyed by name, plus the model config.

    Weight initialization: normal(0, 0.02) for embeddings and linear maps,
    zeros for biases, ones for layer-norm gains.  The MLM decoder weight is
    the token embedding itself (weight tying), so it has no tensor here.
    """

    def __init__(self, config: ModelConfig, tensors: dict[str, np.ndarray]):
        self.config = config
        self.tensors = tensors

    @property
    def dtype(self):
        return self.tensors["tok_emb"].dtype

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        self.tensors[name] = value

    def names(self) -> list[str]:
        return list(self.tensors)

    def num_parameters(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def copy(self) -> "EncoderParams":
        return EncoderParams(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def astype(self, dtype) -> "EncoderParams":
        return EncoderParams(self.config,
                             {k: v.astype(dtype) for k, v in self.tensors.items()})

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.tensors.items()}

    def check_finite(self) -> None:
        for name, t in self.tensors.items():
            if not np.all(np.isfinite(t)):
                raise EncoderError(f"non-finite values in parameter {name}")


def tensor_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Name -> shape map for every tensor the config calls for."""
    d, f, v = config.d_model, config.ffn_dim, config.vocab_size
    shapes: dict[str, tuple[int, ...]] = {
        "tok_emb": (v, d),
        "pos_emb": (config.max_seq_len, d),
        "seg_emb": (config.num_segments, d),
    }
    if config.num_languages > 0:
        shapes["lang_emb"] = (config.num_languages, d)
    for i in range(config.num_layers):
        p = f"enc.{i}"
        for proj in ("wq", "wk", "wv", "wo"):
            shapes[f"{p}.attn.{proj}"] = (d, d)
        for b in ("bq", "bk", "bv", "bo"):
            shapes[f"{p}.attn.{b}"] = (d,)
        shapes[f"{p}.ln1.g"] = (d,)
        shapes[f"{p}.ln1.b"] = (d,)
        shapes[f"{p}.ffn.w1"] = (d, f)
        shapes[f"{p}.ffn.b1"] = (f,)
        shapes[f"{p}.ffn.w2"] = (f, d)
        shapes[f"{p}.ffn.b2"] = (d,)
        shapes[f"{p}.ln2.g"] = (d,)
        shapes[f"{p}.ln2.b"] = (d,)
    if config.head_mode == "mlm_head":
        shapes["mlm.w"] = (d, d)
        shapes["mlm.b"] = (d,)
        shapes["mlm.ln.g"] = (d,)
        shapes["mlm.ln.b"] = (d,)
        shapes["mlm.out_b"] = (v,)
    return shapes


def init_params(config: ModelConfig, seed: int = 0,
                dtype=np.float32) -> EncoderParams:
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for name, shape in tensor_shapes(config).items():
        leaf = name.rsplit(".", 1)[-1]
        if leaf == "g":
            t = np.ones(shape)
        elif leaf in ("b", "bq", "bk", "bv", "bo", "b1", "b2", "out_b"):
            t = np.zeros(shape)
        else:
            t = rng.normal(0.0, 0.02, size=shape)
        tensors[name] = t.astype(dtype)
    return EncoderParams(config, tensors)


# ---------------------------------------------------------------------------
# input construction
# ---------------------------------------------------------------------------

@dataclass
class InputSample:
    token_ids: list[int]
    segment_ids: list[int]
    mask_positions: list[int]
    language_id: int | None = None
    truncated: bool = False


@dataclass
class InputBatch:
    token_ids: np.ndarray      # (B, T) int32
    segment_ids: np.ndarray    # (B, T) int32
    attention_mask: np.ndarray  # (B, T) float, 1 = real token
    mask_positions: np.ndarray  # (B, k) int32
    language_ids: np.ndarray | None = None  # (B,) int32
    truncated_count: int = 0

    @property
    def batch_size(self) -> int:
        return self.token_ids.shape[0]

    @property
    def seq_len(self) -> int:
        return self.token_ids.shape[1]

    @property
    def k(self) -> int:
        return self.mask_positions.shape[1]


def build_input(vocab: SubwordVocab, k: int, definition_ids: list[int],
                language_id: int | None = None,
                max_seq_len: int = 128) -> InputSample:
    """One model input: ``[CLS] [MASK]*k [SEP] definition [SEP]``.

    Segment 0 runs through the first [SEP] inclusive, segment 1 after.
    Definitions longer than ``max_seq_len - k - 3`` are tail-truncated;
    truncation is flagged on the sample, never raised.
    """
    budget = max_seq_len - k - 3
    if budget < 0:
        raise EncoderError(
            f"max_seq_len {max_seq_len} cannot hold k={k} masks plus specials")
    truncated = len(definition_ids) > budget
    definition_ids = list(definition_ids[:budget])
    tokens = [vocab.cls_id] + [vocab.mask_id] * k + [vocab.sep_id] \
        + definition_ids + [vocab.sep_id]
    head_len = k + 2  # CLS + masks + first SEP
    segments = [0] * head_len + [1] * (len(definition_ids) + 1)
    return InputSample(
        token_ids=tokens,
        segment_ids=segments,
        mask_positions=list(range(1, k + 1)),
        language_id=language_id,
        truncated=truncated,
    )


def pack_batch(samples: list[InputSample], pad_id: int) -> InputBatch:
    """Pad samples to a common length and stack into arrays."""
    if not samples:
        raise EncoderError("empty batch")
    k = len(samples[0].mask_positions)
    if any(len(s.mask_positions) != k for s in samples):
        raise EncoderError("inconsistent mask-block length within batch")
    T = max(len(s.token_ids) for s in samples)
    B = len(samples)
    ids = np.full((B, T), pad_id, dtype=np.int32)
    seg = np.zeros((B, T), dtype=np.int32)
    mask = np.zeros((B, T), dtype=np.float64)
    for i, s in enumerate(samples):
        n = len(s.token_ids)
        ids[i, :n] = s.token_ids
        seg[i, :n] = s.segment_ids
        mask[i, :n] = 1.0
    mask_pos = np.asarray([s.mask_positions for s in samples], dtype=np.int32)
    with_lang = sum(s.language_id is not None for s in samples)
    if with_lang not in (0, B):
        raise EncoderError("language ids must be set on all samples or none")
    lang = None
    if with_lang:
        lang = np.asarray([s.language_id for s in samples], dtype=np.int32)
    return InputBatch(ids, seg, mask, mask_pos, lang,
                      truncated_count=sum(s.truncated for s in samples))


# ---------------------------------------------------------------------------
# math helpers
# ---------------------------------------------------------------------------

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x * _INV_SQRT2))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + erf(x * _INV_SQRT2)) + x * np.exp(-0.5 * x * x) * _INV_SQRT2PI


def layer_norm(x: np.ndarray, g: np.ndarray, b: np.ndarray):
    """Per-position normalization over the feature axis.

    Returns (y, xhat, inv_std); the latter two feed the backward pass.
    """
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = np.mean(xc * xc, axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return g * xhat + b, xhat, inv


def layer_norm_backward(dy: np.ndarray, xhat: np.ndarray, inv: np.ndarray,
                        g: np.ndarray):
    """Gradients through layer_norm: returns (dx, dg, db)."""
    axes = tuple(range(dy.ndim - 1))
    dg = np.sum(dy * xhat, axis=axes)
    db = np.sum(dy, axis=axes)
    dxhat = dy * g
    dx = inv * (dxhat
                - dxhat.mean(axis=-1, keepdims=True)
                - xhat * np.mean(dxhat * xhat, axis=-1, keepdims=True))
    return dx, dg, db


def softmax(x: np.ndarray) -> np.ndarray:
    m = x.max(axis=-1, keepdims=True)
    e = np.exp(x - m)
    return e / e.sum(axis=-1, keepdims=True)


def _split_heads(x: np.ndarray, num_heads: int) -> np.ndarray:
    B, T, D = x.shape
    return x.reshape(B, T, num_heads, D // num_heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    B, H, T, Dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(B, T, H * Dh)


def _linear_grads(x: np.ndarray, dy: np.ndarray):
    """(dW, db) for y = x @ W + b, summing over all leading axes."""
    x2 = x.reshape(-1, x.shape[-1])
    dy2 = dy.reshape(-1, dy.shape[-1])
    return x2.T @ dy2, dy2.sum(axis=0)


def _dropout_mask(rng: np.random.Generator, shape, rate: float, dtype):
    keep = 1.0 - rate
    return (rng.random(shape) < keep).astype(dtype) / dtype.type(keep)


# ---------------------------------------------------------------------------
# forward
# ---------------------------------------------------------------------------

@dataclass
class HiddenStates:
    """Per-layer hidden states; ``masked`` restricts the last layer to the
    k mask positions."""
    layers: list[np.ndarray]       # L+1 arrays of (B, T, d_model), layers[0] = h^0
    masked: np.ndarray             # (B, k, d_model)

    @property
    def last(self) -> np.ndarray:
        return self.layers[-1]


def _check_batch(config: ModelConfig, batch: InputBatch) -> None:
    if batch.seq_len > config.max_seq_len:
        raise EncoderError(
            f"sequence length {batch.seq_len} exceeds max_seq_len {config.max_seq_len}")
    if batch.token_ids.max() >= config.vocab_size:
        raise EncoderError("token id out of vocabulary range")
    if batch.segment_ids.max() >= config.num_segments:
        raise EncoderError("segment id out of range")
    if batch.language_ids is not None and config.num_languages == 0:
        raise EncoderError("batch carries language ids but model has no language embedding")
    if batch.language_ids is None and config.num_languages > 0:
        raise EncoderError("model expects language ids but batch has none")


def forward(params: EncoderParams, batch: InputBatch, *, training: bool = False,
            rng: np.random.Generator | None = None, return_cache: bool = False):
    """Run the encoder stack; returns HiddenStates (and a cache if asked).

    Dropout is applied only when ``training`` is true and the config rate is
    positive, in which case ``rng`` must be supplied.  Attention never attends
    to padding positions.
    """
    cfg = params.config
    _check_batch(cfg, batch)
    dtype = params.dtype
    use_dropout = training and cfg.dropout > 0.0
    if use_dropout and rng is None:
        raise EncoderError("training-mode forward with dropout needs an rng")

    ids, seg = batch.token_ids, batch.segment_ids
    B, T = ids.shape
    mask = batch.attention_mask.astype(dtype)

    h = params["tok_emb"][ids] + params["pos_emb"][:T][None, :, :] \
        + params["seg_emb"][seg]
    if batch.language_ids is not None:
        h = h + params["lang_emb"][batch.language_ids][:, None, :]
    h = h.astype(dtype)

    scale = dtype.type(1.0 / math.sqrt(cfg.head_dim))
    attn_bias = ((1.0 - mask) * NEG_INF).astype(dtype)[:, None, None, :]

    layers = [h]
    cache = {"ids": ids, "seg": seg, "lang_ids": batch.language_ids,
             "mask_positions": batch.mask_positions, "layers": []} if return_cache else None

    for i in range(cfg.num_layers):
        p = f"enc.{i}"
        q = _split_heads(h @ params[f"{p}.attn.wq"] + params[f"{p}.attn.bq"], cfg.num_heads)
        kk = _split_heads(h @ params[f"{p}.attn.wk"] + params[f"{p}.attn.bk"], cfg.num_heads)
        v = _split_heads(h @ params[f"{p}.attn.wv"] + params[f"{p}.attn.bv"], cfg.num_heads)
        logits = q @ kk.transpose(0, 1, 3, 2) * scale + attn_bias
        attn = softmax(logits)
        ctx = _merge_heads(attn @ v)
        attn_out = ctx @ params[f"{p}.attn.wo"] + params[f"{p}.attn.bo"]
        drop1 = None
        if use_dropout:
            drop1 = _dropout_mask(rng, attn_out.shape, cfg.dropout, np.dtype(dtype))
            attn_out = attn_out * drop1
        h_mid, xhat1, inv1 = layer_norm(h + attn_out,
                                        params[f"{p}.ln1.g"], params[f"{p}.ln1.b"])
        f1 = h_mid @ params[f"{p}.ffn.w1"] + params[f"{p}.ffn.b1"]
        a1 = gelu(f1)
        f2 = a1 @ params[f"{p}.ffn.w2"] + params[f"{p}.ffn.b2"]
        drop2 = None
        if use_dropout:
            drop2 = _dropout_mask(rng, f2.shape, cfg.dropout, np.dtype(dtype))
            f2 = f2 * drop2
        h_out, xhat2, inv2 = layer_norm(h_mid + f2,
                                        params[f"{p}.ln2.g"], params[f"{p}.ln2.b"])
        if not np.all(np.isfinite(h_out)):
            raise EncoderError(f"non-finite activations in encoder layer {i}")
        if cache is not None:
            cache["layers"].append({
                "h_in": h, "q": q, "k": kk, "v": v, "attn": attn, "ctx": ctx,
                "drop1": drop1, "xhat1": xhat1, "inv1": inv1, "h_mid": h_mid,
                "f1": f1, "a1": a1, "drop2": drop2, "xhat2": xhat2, "inv2": inv2,
            })
        h = h_out
        layers.append(h)

    h_mask = np.take_along_axis(
        h, batch.mask_positions[:, :, None].astype(np.int64), axis=1)
    states = HiddenStates(layers=layers, masked=h_mask)
    if return_cache:
        cache["h_mask"] = h_mask
        return states, cache
    return states


def subword_scores(params: EncoderParams, h_mask: np.ndarray,
                   head_mode: str | None = None,
                   cache: dict | None = None) -> np.ndarray:
    """(B, k, |V|) scores at the masked positions.

    ``mlm_head``: dense -> GELU -> layer norm -> decoder tied to tok_emb plus
    an output bias.  ``embedding_dot``: plain dot product with tok_emb; uses
    no head parameters.
    """
    mode = head_mode or params.config.head_mode
    if mode == "embedding_dot":
        scores = h_mask @ params["tok_emb"].T
        if cache is not None:
            cache["head"] = {"mode": mode, "h_in": h_mask}
        return scores
    if mode != "mlm_head":
        raise EncoderError(f"unknown head mode: {mode}")
    t1 = h_mask @ params["mlm.w"] + params["mlm.b"]
    t2 = gelu(t1)
    t3, xhat, inv = layer_norm(t2, params["mlm.ln.g"], params["mlm.ln.b"])
    scores = t3 @ params["tok_emb"].T + params["mlm.out_b"]
    if cache is not None:
        cache["head"] = {"mode": mode, "h_in": h_mask, "t1": t1,
                         "t3": t3, "xhat": xhat, "inv": inv}
    return scores


def forward_scores(params: EncoderParams, batch: InputBatch, *,
                   training: bool = False,
                   rng: np.random.Generator | None = None,
                   return_cache: bool = False):
    """Convenience: forward + subword_scores. Returns scores (and cache)."""
    if return_cache:
        states, cache = forward(params, batch, training=training, rng=rng,
                                return_cache=True)
        scores = subword_scores(params, states.masked, cache=cache)
        return scores, cache
    states = forward(params, batch, training=training, rng=rng)
    return subword_scores(params, states.masked)


# ---------------------------------------------------------------------------
# backward
# ---------------------------------------------------------------------------

def backward_scores(params: EncoderParams, cache: dict,
                    d_scores: np.ndarray) -> dict[str, np.ndarray]:
    """Exact gradients of every parameter tensor given d(loss)/d(scores).

    Mirrors the forward pass in reverse using the cached intermediates.
    Tensors off the compute path (e.g. unused language embedding rows) come
    back exactly zero.
    """
    cfg = params.config
    grads = params.zeros_like()

    head = cache["head"]
    h_mask = head["h_in"]
    if head["mode"] == "embedding_dot":
        d_hmask = d_scores @ params["tok_emb"]
        grads["tok_emb"] += np.einsum("bkv,bkd->vd", d_scores, h_mask)
    else:
        grads["tok_emb"] += np.einsum("bkv,bkd->vd", d_scores, head["t3"])
        grads["mlm.out_b"] += d_scores.sum(axis=(0, 1))
        d_t3 = d_scores @ params["tok_emb"]
        d_t2, dg, db = layer_norm_backward(d_t3, head["xhat"], head["inv"],
                                           params["mlm.ln.g"])
        grads["mlm.ln.g"] += dg
        grads["mlm.ln.b"] += db
        d_t1 = d_t2 * gelu_grad(head["t1"])
        dw, dbias = _linear_grads(h_mask, d_t1)
        grads["mlm.w"] += dw
        grads["mlm.b"] += dbias
        d_hmask = d_t1 @ params["mlm.w"].T

    ids, seg = cache["ids"], cache["seg"]
    B, T = ids.shape
    d_h = np.zeros((B, T, cfg.d_model), dtype=params.dtype)
    rows = np.arange(B)[:, None]
    np.add.at(d_h, (rows, cache["mask_positions"].astype(np.int64)), d_hmask)

    scale = params.dtype.type(1.0 / math.sqrt(cfg.head_dim))
    for i in reversed(range(cfg.num_layers)):
        p = f"enc.{i}"
        c = cache["layers"][i]
        # h_out = LN2(h_mid + dropout(f2))
        d_x2, dg, db = layer_norm_backward(d_h, c["xhat2"], c["inv2"],
                                           params[f"{p}.ln2.g"])
        grads[f"{p}.ln2.g"] += dg
        grads[f"{p}.ln2.b"] += db
        d_h_mid = d_x2.copy()
        d_f2 = d_x2 if c["drop2"] is None else d_x2 * c["drop2"]
        dw, dbias = _linear_grads(c["a1"], d_f2)
        grads[f"{p}.ffn.w2"] += dw
        grads[f"{p}.ffn.b2"] += dbias
        d_a1 = d_f2 @ params[f"{p}.ffn.w2"].T
        d_f1 = d_a1 * gelu_grad(c["f1"])
        dw, dbias = _linear_grads(c["h_mid"], d_f1)
        grads[f"{p}.ffn.w1"] += dw
        grads[f"{p}.ffn.b1"] += dbias
        d_h_mid += d_f1 @ params[f"{p}.ffn.w1"].T
        # h_mid = LN1(h_in + dropout(attn_out))
        d_x1, dg, db = layer_norm_backward(d_h_mid, c["xhat1"], c["inv1"],
                                           params[f"{p}.ln1.g"])
        grads[f"{p}.ln1.g"] += dg
        grads[f"{p}.ln1.b"] += db
        d_h_in = d_x1.copy()
        d_attn_out = d_x1 if c["drop1"] is None else d_x1 * c["drop1"]
        dw, dbias = _linear_grads(c["ctx"], d_attn_out)
        grads[f"{p}.attn.wo"] += dw
        grads[f"{p}.attn.bo"] += dbias
        d_ctx = _split_heads(d_attn_out @ params[f"{p}.attn.wo"].T, cfg.num_heads)
        attn, q, kk, v = c["attn"], c["q"], c["k"], c["v"]
        d_attn = d_ctx @ v.transpose(0, 1, 3, 2)
        d_v = attn.transpose(0, 1, 3, 2) @ d_ctx
        d_logits = attn * (d_attn - np.sum(d_attn * attn, axis=-1, keepdims=True))
        d_q = (d_logits @ kk) * scale
        d_k = (d_logits.transpose(0, 1, 3, 2) @ q) * scale
        h_in = c["h_in"]
        for name, d_proj in (("wq", d_q), ("wk", d_k), ("wv", d_v)):
            d_flat = _merge_heads(d_proj)
            dw, dbias = _linear_grads(h_in, d_flat)
            grads[f"{p}.attn.{name}"] += dw
            grads[f"{p}.attn.b{name[1]}"] += dbias
            d_h_in += d_flat @ params[f"{p}.attn.{name}"].T
        d_h = d_h_in

    # embedding sum: h0 = tok + pos + seg (+ lang broadcast over positions)
    D = cfg.d_model
    np.add.at(grads["tok_emb"], ids.reshape(-1), d_h.reshape(-1, D))
    grads["pos_emb"][:T] += d_h.sum(axis=0)
    np.add.at(grads["seg_emb"], seg.reshape(-1), d_h.reshape(-1, D))
    if cache["lang_ids"] is not None:
        np.add.at(grads["lang_emb"], cache["lang_ids"], d_h.sum(axis=1))
    return grads
