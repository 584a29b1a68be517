"""Small decoder-only transformer: forward, manual backprop, Adam training,
perplexity, and top-k sampling.

Pure numpy, GPT-2-style parameterization (pre-norm blocks, learned position
embeddings, output projection tied to the token embedding). float64 is used
for gradient-check builds; float32 for everyday training speed. Sampling is
deterministic per seed, with k=1 reducing to greedy argmax decoding.
"""

from __future__ import annotations

import json
import math
import random
import warnings
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .fieldcodec import BpeVocab, EncodedRecipe, FieldKind, make_training_example, build_prompt

__all__ = [
    "ModelConfig",
    "TrainConfig",
    "SamplingConfig",
    "SampleResult",
    "GenerationResult",
    "ModelError",
    "SequenceTooLong",
    "VocabMismatch",
    "init_params",
    "forward",
    "loss_and_grads",
    "train",
    "perplexity",
    "sample_topk",
    "generate_field",
    "save_checkpoint",
    "load_checkpoint",
]

Params = dict[str, np.ndarray]

_LN_EPS = 1e-5
_NEG_INF = -1e30


class ModelError(Exception):
    pass


class SequenceTooLong(ModelError):
    pass


class VocabMismatch(ModelError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    n_layers: int = 4
    n_heads: int = 4
    embed_dim: int = 128
    context_len: int = 512
    dtype: str = "float32"

    def __post_init__(self):
        for name in ("vocab_size", "n_layers", "n_heads", "embed_dim", "context_len"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.embed_dim % self.n_heads != 0:
            raise ValueError("embed_dim must be divisible by n_heads")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.n_heads

    def to_dict(self) -> dict:
        return {
            "vocab_size": self.vocab_size, "n_layers": self.n_layers,
            "n_heads": self.n_heads, "embed_dim": self.embed_dim,
            "context_len": self.context_len, "dtype": self.dtype,
        }


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    batch_size: int = 8
    steps: int = 500
    eval_every: int = 100
    seed: int = 0
    warmup_steps: int = 100
    max_len: int = 512


@dataclass(frozen=True)
class SamplingConfig:
    k: int = 3
    max_new_tokens: int = 384
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")


def init_params(config: ModelConfig, seed: int = 0) -> Params:
    """GPT-2-style initialization; residual projections scaled down by depth."""
    rng = np.random.default_rng(seed)
    dt = config.dtype
    D, V, T = config.embed_dim, config.vocab_size, config.context_len

    def normal(shape, std):
        return rng.normal(0.0, std, size=shape).astype(dt)

    resid_std = 0.02 / math.sqrt(2 * config.n_layers)
    params: Params = {
        "wte": normal((V, D), 0.02),
        "wpe": normal((T, D), 0.01),
        "ln_f.g": np.ones(D, dtype=dt),
        "ln_f.b": np.zeros(D, dtype=dt),
    }
    for i in range(config.n_layers):
        p = f"h{i}"
        params[f"{p}.ln1.g"] = np.ones(D, dtype=dt)
        params[f"{p}.ln1.b"] = np.zeros(D, dtype=dt)
        params[f"{p}.attn.wq"] = normal((D, D), 0.02)
        params[f"{p}.attn.bq"] = np.zeros(D, dtype=dt)
        params[f"{p}.attn.wk"] = normal((D, D), 0.02)
        params[f"{p}.attn.bk"] = np.zeros(D, dtype=dt)
        params[f"{p}.attn.wv"] = normal((D, D), 0.02)
        params[f"{p}.attn.bv"] = np.zeros(D, dtype=dt)
        params[f"{p}.attn.wo"] = normal((D, D), resid_std)
        params[f"{p}.attn.bo"] = np.zeros(D, dtype=dt)
        params[f"{p}.ln2.g"] = np.ones(D, dtype=dt)
        params[f"{p}.ln2.b"] = np.zeros(D, dtype=dt)
        params[f"{p}.mlp.w1"] = normal((D, 4 * D), 0.02)
        params[f"{p}.mlp.b1"] = np.zeros(4 * D, dtype=dt)
        params[f"{p}.mlp.w2"] = normal((4 * D, D), resid_std)
        params[f"{p}.mlp.b2"] = np.zeros(D, dtype=dt)
    return params


# ---------------------------------------------------------------------------
# Forward / backward primitives.

def _layernorm_fwd(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _LN_EPS)
    xhat = xc * inv
    return xhat * g + b, (xhat, inv, g)


def _layernorm_bwd(dy, cache):
    xhat, inv, g = cache
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    dx = inv * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dg, db


_GELU_C = math.sqrt(2.0 / math.pi)
_GELU_A = 0.044715


def _gelu(x):
    return 0.5 * x * (1.0 + np.tanh(_GELU_C * (x + _GELU_A * x**3)))


def _gelu_grad(x):
    u = _GELU_C * (x + _GELU_A * x**3)
    t = np.tanh(u)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * _GELU_C * (1.0 + 3.0 * _GELU_A * x * x)


def _softmax(x, axis=-1):
    e = np.exp(x - x.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def _split_heads(x, n_heads):
    B, T, D = x.shape
    return x.reshape(B, T, n_heads, D // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    B, H, T, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(B, T, H * dh)


def _attn_fwd(x, params, prefix, config, causal_mask):
    wq, bq = params[f"{prefix}.wq"], params[f"{prefix}.bq"]
    wk, bk = params[f"{prefix}.wk"], params[f"{prefix}.bk"]
    wv, bv = params[f"{prefix}.wv"], params[f"{prefix}.bv"]
    wo, bo = params[f"{prefix}.wo"], params[f"{prefix}.bo"]
    qh = _split_heads(x @ wq + bq, config.n_heads)
    kh = _split_heads(x @ wk + bk, config.n_heads)
    vh = _split_heads(x @ wv + bv, config.n_heads)
    scale = 1.0 / math.sqrt(config.head_dim)
    scores = (qh @ kh.transpose(0, 1, 3, 2)) * scale
    scores = np.where(causal_mask, scores, _NEG_INF)
    att = _softmax(scores, axis=-1)
    outh = att @ vh
    out = _merge_heads(outh)
    y = out @ wo + bo
    return y, (x, qh, kh, vh, att, out, scale)


def _attn_bwd(dy, cache, params, prefix, config, grads):
    x, qh, kh, vh, att, out, scale = cache
    B, T, D = x.shape
    wo = params[f"{prefix}.wo"]
    x2 = x.reshape(-1, D)

    grads[f"{prefix}.wo"] += out.reshape(-1, D).T @ dy.reshape(-1, D)
    grads[f"{prefix}.bo"] += dy.sum(axis=(0, 1))
    douth = _split_heads(dy @ wo.T, config.n_heads)

    datt = douth @ vh.transpose(0, 1, 3, 2)
    dvh = att.transpose(0, 1, 3, 2) @ douth
    dscores = att * (datt - (datt * att).sum(axis=-1, keepdims=True))
    dqh = (dscores @ kh) * scale
    dkh = (dscores.transpose(0, 1, 3, 2) @ qh) * scale

    dx = np.zeros_like(x)
    for name, dproj in (("wq", dqh), ("wk", dkh), ("wv", dvh)):
        d = _merge_heads(dproj).reshape(-1, D)
        grads[f"{prefix}.{name}"] += x2.T @ d
        grads[f"{prefix}.b{name[1]}"] += d.sum(axis=0)
        dx += (d @ params[f"{prefix}.{name}"].T).reshape(B, T, D)
    return dx


def _mlp_fwd(x, params, prefix):
    w1, b1 = params[f"{prefix}.w1"], params[f"{prefix}.b1"]
    w2, b2 = params[f"{prefix}.w2"], params[f"{prefix}.b2"]
    h1 = x @ w1 + b1
    a = _gelu(h1)
    return a @ w2 + b2, (x, h1, a)


def _mlp_bwd(dy, cache, params, prefix, grads):
    x, h1, a = cache
    D = x.shape[-1]
    Dm = h1.shape[-1]
    grads[f"{prefix}.w2"] += a.reshape(-1, Dm).T @ dy.reshape(-1, D)
    grads[f"{prefix}.b2"] += dy.sum(axis=(0, 1))
    da = dy @ params[f"{prefix}.w2"].T
    dh1 = da * _gelu_grad(h1)
    grads[f"{prefix}.w1"] += x.reshape(-1, D).T @ dh1.reshape(-1, Dm)
    grads[f"{prefix}.b1"] += dh1.sum(axis=(0, 1))
    return dh1 @ params[f"{prefix}.w1"].T


def _forward_full(params: Params, config: ModelConfig, ids: np.ndarray, want_cache: bool):
    """Batch forward over (B, T) ids; returns logits and optional caches."""
    if ids.ndim != 2:
        raise ValueError("ids must have shape (batch, time)")
    B, T = ids.shape
    if T > config.context_len:
        raise SequenceTooLong(f"sequence length {T} exceeds context_len {config.context_len}")
    x = params["wte"][ids] + params["wpe"][:T]
    causal = np.tril(np.ones((T, T), dtype=bool))
    caches = []
    for i in range(config.n_layers):
        p = f"h{i}"
        a_in, ln1_cache = _layernorm_fwd(x, params[f"{p}.ln1.g"], params[f"{p}.ln1.b"])
        attn_out, attn_cache = _attn_fwd(a_in, params, f"{p}.attn", config, causal)
        x2 = x + attn_out
        m_in, ln2_cache = _layernorm_fwd(x2, params[f"{p}.ln2.g"], params[f"{p}.ln2.b"])
        mlp_out, mlp_cache = _mlp_fwd(m_in, params, f"{p}.mlp")
        x = x2 + mlp_out
        if want_cache:
            caches.append((ln1_cache, attn_cache, ln2_cache, mlp_cache))
    hf, lnf_cache = _layernorm_fwd(x, params["ln_f.g"], params["ln_f.b"])
    logits = hf @ params["wte"].T
    if want_cache:
        return logits, (ids, hf, lnf_cache, caches)
    return logits, None


def forward(params: Params, config: ModelConfig, ids) -> np.ndarray:
    """Causal logits per position; accepts a (T,) sequence or (B, T) batch."""
    arr = np.asarray(ids, dtype=np.int64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None, :]
    logits, _ = _forward_full(params, config, arr, want_cache=False)
    return logits[0] if squeeze else logits


def zero_grads(params: Params) -> Params:
    return {k: np.zeros_like(v) for k, v in params.items()}


def loss_and_grads(
    params: Params, config: ModelConfig, batch: np.ndarray, pad_id: int
) -> tuple[float, Params]:
    """Mean cross-entropy over non-pad next-token targets, with gradients.

    Positions whose target is the pad token contribute nothing; an all-pad
    batch yields zero loss, zero gradients, and a warning.
    """
    batch = np.asarray(batch, dtype=np.int64)
    if batch.ndim != 2 or batch.shape[0] == 0:
        raise ValueError("batch must be a non-empty (B, T) array")
    inputs = batch[:, :-1]
    targets = batch[:, 1:]
    mask = targets != pad_id
    n_live = int(mask.sum())
    if n_live == 0:
        warnings.warn("all-pad batch: loss defined as 0 with zero gradients")
        return 0.0, zero_grads(params)

    logits, cache = _forward_full(params, config, inputs, want_cache=True)
    ids, hf, lnf_cache, layer_caches = cache
    B, T, V = logits.shape

    m = logits.max(axis=-1, keepdims=True)
    logsumexp = m + np.log(np.exp(logits - m).sum(axis=-1, keepdims=True))
    logprobs = logits - logsumexp
    picked = np.take_along_axis(logprobs, targets[..., None], axis=-1)[..., 0]
    loss = float(-(picked * mask).sum() / n_live)

    dlogits = np.exp(logprobs)
    flat = dlogits.reshape(-1, V)
    flat[np.arange(B * T), targets.ravel()] -= 1.0
    dlogits *= mask[..., None] / n_live

    grads = zero_grads(params)
    flat_dlogits = dlogits.reshape(-1, V)
    grads["wte"] += flat_dlogits.T @ hf.reshape(-1, hf.shape[-1])
    dhf = dlogits @ params["wte"]
    dx, dg, db = _layernorm_bwd(dhf, lnf_cache)
    grads["ln_f.g"] += dg
    grads["ln_f.b"] += db

    for i in reversed(range(config.n_layers)):
        p = f"h{i}"
        ln1_cache, attn_cache, ln2_cache, mlp_cache = layer_caches[i]
        dm_in = _mlp_bwd(dx, mlp_cache, params, f"{p}.mlp", grads)
        dx2, dg2, db2 = _layernorm_bwd(dm_in, ln2_cache)
        grads[f"{p}.ln2.g"] += dg2
        grads[f"{p}.ln2.b"] += db2
        dx2 = dx2 + dx
        da_in = _attn_bwd(dx2, attn_cache, params, f"{p}.attn", config, grads)
        dx1, dg1, db1 = _layernorm_bwd(da_in, ln1_cache)
        grads[f"{p}.ln1.g"] += dg1
        grads[f"{p}.ln1.b"] += db1
        dx = dx1 + dx2

    D = config.embed_dim
    np.add.at(grads["wte"], inputs.ravel(), dx.reshape(-1, D))
    grads["wpe"][: inputs.shape[1]] += dx.sum(axis=0)
    return loss, grads


# ---------------------------------------------------------------------------
# Training.

def _nll_sum(params, config, batch, pad_id) -> tuple[float, int]:
    batch = np.asarray(batch, dtype=np.int64)
    inputs = batch[:, :-1]
    targets = batch[:, 1:]
    mask = targets != pad_id
    n = int(mask.sum())
    if n == 0:
        return 0.0, 0
    logits, _ = _forward_full(params, config, inputs, want_cache=False)
    m = logits.max(axis=-1, keepdims=True)
    logsumexp = m + np.log(np.exp(logits - m).sum(axis=-1, keepdims=True))
    picked = np.take_along_axis(logits - logsumexp, targets[..., None], axis=-1)[..., 0]
    return float(-(picked * mask).sum()), n


def _trim_pad_suffix(batch: np.ndarray, pad_id: int) -> np.ndarray:
    """Drop all-pad trailing columns; loss and grads are unaffected because
    trimmed targets are pad (masked) and attention is causal."""
    lengths = (batch != pad_id).sum(axis=1)
    keep = min(int(lengths.max()) + 1, batch.shape[1])
    return batch[:, : max(keep, 2)]


def perplexity(
    params: Params, config: ModelConfig,
    examples: Sequence[EncodedRecipe] | np.ndarray,
    pad_id: int, batch_size: int = 8,
) -> float:
    """exp(mean non-pad next-token cross-entropy) over the dataset."""
    if isinstance(examples, np.ndarray):
        rows = examples.astype(np.int64)
    else:
        rows = np.asarray(
            [e.ids if isinstance(e, EncodedRecipe) else e for e in examples], dtype=np.int64
        )
    if rows.size == 0:
        raise ValueError("perplexity needs a non-empty dataset")
    total, count = 0.0, 0
    for i in range(0, len(rows), batch_size):
        chunk = _trim_pad_suffix(rows[i : i + batch_size], pad_id)
        nll, n = _nll_sum(params, config, chunk, pad_id)
        total += nll
        count += n
    if count == 0:
        raise ValueError("dataset contains no non-pad targets")
    return float(np.exp(total / count))


def adam_init(params: Params) -> tuple[Params, Params]:
    return zero_grads(params), zero_grads(params)


def adam_step(params, grads, m, v, t, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    for key, g in grads.items():
        m[key] = beta1 * m[key] + (1 - beta1) * g
        v[key] = beta2 * v[key] + (1 - beta2) * (g * g)
        mhat = m[key] / (1 - beta1**t)
        vhat = v[key] / (1 - beta2**t)
        params[key] -= lr * mhat / (np.sqrt(vhat) + eps)


def _example_batch(records, seeds, vocab, max_len) -> np.ndarray:
    rows = [make_training_example(r, seed=s, vocab=vocab, max_len=max_len).ids
            for r, s in zip(records, seeds)]
    return np.asarray(rows, dtype=np.int64)


def train(
    config: ModelConfig,
    vocab: BpeVocab,
    train_records: Sequence,
    val_records: Sequence,
    tc: TrainConfig = TrainConfig(),
    checkpoint_path=None,
    trace_path=None,
    log=None,
) -> tuple[Params, list[tuple[int, float]]]:
    """Seeded Adam training; returns params and the (step, val PPL) trace.

    Checkpoints embed the model config and the vocabulary hash so later
    stages can refuse mismatched artifacts.
    """
    if not train_records:
        raise ValueError("train split is empty")
    if config.vocab_size != vocab.vocab_size:
        raise VocabMismatch(
            f"config.vocab_size {config.vocab_size} != vocabulary size {vocab.vocab_size}")
    rng = random.Random(tc.seed)
    params = init_params(config, seed=tc.seed)
    m, v = adam_init(params)
    pad = vocab.pad_id

    val_rows = _example_batch(
        val_records, [0x5EED + i for i in range(len(val_records))], vocab, tc.max_len
    ) if val_records else None

    def val_ppl():
        if val_rows is None:
            return float("nan")
        total, count = 0.0, 0
        for i in range(0, len(val_rows), tc.batch_size):
            chunk = _trim_pad_suffix(val_rows[i : i + tc.batch_size], pad)
            nll, n = _nll_sum(params, config, chunk, pad)
            total += nll
            count += n
        return float(np.exp(total / count)) if count else float("nan")

    trace: list[tuple[int, float]] = [(0, val_ppl())]
    trace_rows = [{"step": 0, "loss": None, "val_ppl": trace[0][1]}]
    if log:
        log(f"step 0: val_ppl={trace[0][1]:.2f}")

    n_train = len(train_records)
    for step in range(1, tc.steps + 1):
        recs = [train_records[rng.randrange(n_train)] for _ in range(tc.batch_size)]
        seeds = [rng.getrandbits(32) for _ in recs]
        batch = _trim_pad_suffix(_example_batch(recs, seeds, vocab, tc.max_len), pad)
        loss, grads = loss_and_grads(params, config, batch, pad)
        lr = tc.lr * min(1.0, step / max(1, tc.warmup_steps))
        adam_step(params, grads, m, v, step, lr)
        if step % tc.eval_every == 0 or step == tc.steps:
            ppl = val_ppl()
            trace.append((step, ppl))
            trace_rows.append({"step": step, "loss": loss, "val_ppl": ppl})
            if log:
                log(f"step {step}: loss={loss:.4f} val_ppl={ppl:.2f}")

    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, params, config, vocab.content_hash(), tc.steps)
    if trace_path is not None:
        with open(trace_path, "w", encoding="utf-8") as fh:
            for row in trace_rows:
                fh.write(json.dumps(row) + "\n")
    return params, trace


def save_checkpoint(path, params: Params, config: ModelConfig, vocab_hash: str, step: int) -> None:
    meta = json.dumps({"config": config.to_dict(), "vocab_hash": vocab_hash,
                       "step": step, "format": "recipelab-checkpoint v1"})
    arrays = {f"p/{k}": v for k, v in params.items()}
    np.savez(path, __meta__=np.frombuffer(meta.encode("utf-8"), dtype=np.uint8), **arrays)


def load_checkpoint(path, expected_vocab_hash: str | None = None):
    """Returns (params, config, vocab_hash, step); checks the vocab hash."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode("utf-8"))
        if meta.get("format") != "recipelab-checkpoint v1":
            raise ModelError(f"{path} is not a recipelab checkpoint")
        params = {k[2:]: data[k].copy() for k in data.files if k.startswith("p/")}
    config = ModelConfig(**meta["config"])
    if expected_vocab_hash is not None and meta["vocab_hash"] != expected_vocab_hash:
        raise VocabMismatch(
            f"checkpoint was trained with vocabulary {meta['vocab_hash'][:12]}…, "
            f"got {expected_vocab_hash[:12]}…")
    return params, config, meta["vocab_hash"], meta["step"]


# ---------------------------------------------------------------------------
# Sampling.

@dataclass
class SampleResult:
    ids: list[int]
    stopped: bool
    topk_trace: list[tuple[int, ...]] | None = None


@dataclass(frozen=True)
class GenerationResult:
    text: str
    stopped: bool
    ids: tuple[int, ...]

    @property
    def truncated(self) -> bool:
        return not self.stopped


class _KVCache:
    """Grows per generated token; one instance per sampling request."""

    def __init__(self, config: ModelConfig):
        dt = config.dtype
        L, H, T, dh = config.n_layers, config.n_heads, config.context_len, config.head_dim
        self.k = np.zeros((L, H, T, dh), dtype=dt)
        self.v = np.zeros((L, H, T, dh), dtype=dt)
        self.t = 0


def _forward_step(params: Params, config: ModelConfig, new_ids: Sequence[int], cache: _KVCache) -> np.ndarray:
    """Run new tokens through the model, extending the cache.

    Returns logits for the last new position only.
    """
    n = len(new_ids)
    t0 = cache.t
    if t0 + n > config.context_len:
        raise SequenceTooLong(f"{t0 + n} tokens exceed context_len {config.context_len}")
    H, dh = config.n_heads, config.head_dim
    scale = 1.0 / math.sqrt(dh)
    x = params["wte"][np.asarray(new_ids, dtype=np.int64)] + params["wpe"][t0 : t0 + n]

    block_mask = None
    if n > 1:
        total = t0 + n
        block_mask = np.zeros((n, total), dtype=bool)
        for i in range(n):
            block_mask[i, : t0 + i + 1] = True

    for i in range(config.n_layers):
        p = f"h{i}"
        a, _ = _layernorm_fwd(x, params[f"{p}.ln1.g"], params[f"{p}.ln1.b"])
        q = (a @ params[f"{p}.attn.wq"] + params[f"{p}.attn.bq"]).reshape(n, H, dh).transpose(1, 0, 2)
        k = (a @ params[f"{p}.attn.wk"] + params[f"{p}.attn.bk"]).reshape(n, H, dh).transpose(1, 0, 2)
        vv = (a @ params[f"{p}.attn.wv"] + params[f"{p}.attn.bv"]).reshape(n, H, dh).transpose(1, 0, 2)
        cache.k[i, :, t0 : t0 + n] = k
        cache.v[i, :, t0 : t0 + n] = vv
        keys = cache.k[i, :, : t0 + n]
        vals = cache.v[i, :, : t0 + n]
        scores = (q @ keys.transpose(0, 2, 1)) * scale
        if block_mask is not None:
            scores = np.where(block_mask, scores, _NEG_INF)
        att = _softmax(scores, axis=-1)
        out = (att @ vals).transpose(1, 0, 2).reshape(n, config.embed_dim)
        x2 = x + (out @ params[f"{p}.attn.wo"] + params[f"{p}.attn.bo"])
        mlp_in, _ = _layernorm_fwd(x2, params[f"{p}.ln2.g"], params[f"{p}.ln2.b"])
        h1 = mlp_in @ params[f"{p}.mlp.w1"] + params[f"{p}.mlp.b1"]
        x = x2 + (_gelu(h1) @ params[f"{p}.mlp.w2"] + params[f"{p}.mlp.b2"])
    cache.t = t0 + n
    last, _ = _layernorm_fwd(x[-1:], params["ln_f.g"], params["ln_f.b"])
    return (last @ params["wte"].T)[0]


def sample_topk(
    params: Params,
    config: ModelConfig,
    prompt_ids: Sequence[int],
    cfg: SamplingConfig,
    stop_id: int,
    instrument: bool = False,
) -> SampleResult:
    """Emit up to max_new_tokens ids, each drawn from the step's top-k set.

    Probabilities are renormalized over the k highest-probability ids (ties
    broken by ascending id). k=1 is greedy argmax and ignores the seed.
    Stops after emitting stop_id.
    """
    if len(prompt_ids) == 0:
        raise ValueError("prompt must be non-empty")
    if len(prompt_ids) + cfg.max_new_tokens > config.context_len:
        raise SequenceTooLong(
            f"prompt ({len(prompt_ids)}) + max_new_tokens ({cfg.max_new_tokens}) "
            f"exceeds context_len {config.context_len}")
    k = min(cfg.k, config.vocab_size)
    rng = np.random.default_rng(cfg.seed)
    cache = _KVCache(config)
    logits = _forward_step(params, config, list(prompt_ids), cache)

    out: list[int] = []
    trace: list[tuple[int, ...]] | None = [] if instrument else None
    stopped = False
    for _ in range(cfg.max_new_tokens):
        order = np.argsort(-logits, kind="stable")
        top = order[:k]
        if trace is not None:
            trace.append(tuple(int(t) for t in top))
        if k == 1:
            next_id = int(top[0])
        else:
            p = _softmax(logits[top].astype(np.float64))
            p = p / p.sum()
            next_id = int(rng.choice(top, p=p))
        out.append(next_id)
        if next_id == stop_id:
            stopped = True
            break
        logits = _forward_step(params, config, [next_id], cache)
    return SampleResult(ids=out, stopped=stopped, topk_trace=trace)


def generate_field(
    params: Params,
    config: ModelConfig,
    vocab: BpeVocab,
    context: Mapping[FieldKind, str],
    target: FieldKind,
    cfg: SamplingConfig = SamplingConfig(),
) -> GenerationResult:
    """Generate one field from context fields, stopping at its end token.

    The token budget is clamped to the remaining context window. Output text
    drops all special tokens and anything after the end token; `stopped`
    reports whether the end token was actually reached.
    """
    prompt = build_prompt(context, target, vocab)
    budget = min(cfg.max_new_tokens, config.context_len - len(prompt))
    if budget < 1:
        raise SequenceTooLong(
            f"prompt of {len(prompt)} tokens leaves no room in context_len "
            f"{config.context_len}")
    result = sample_topk(params, config, prompt, replace(cfg, max_new_tokens=budget),
                         stop_id=vocab.end_id(target))
    ids = result.ids[:-1] if result.stopped else result.ids
    content_ids = [i for i in ids if i < vocab.n_bpe_tokens]
    from .fieldcodec import unescape_specials

    text = unescape_specials(vocab.decode(content_ids)).strip()
    return GenerationResult(text=text, stopped=result.stopped, ids=tuple(result.ids))
