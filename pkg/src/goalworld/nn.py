"""Trainable building blocks with analytic gradients.

A text encoder (hashed unigram+bigram bag, mean-pooled embedding, two
affine layers with a tanh between), bi-encoder scoring with in-batch
negative training, a two-layer tanh MLP policy, a linear value head, and
categorical sampling.  Everything is float64 numpy; every backward pass
is checked against central finite differences in the test suite.
"""

from __future__ import annotations

import hashlib
import zlib
from dataclasses import dataclass, field

import numpy as np

DEFAULT_HASH_DIM = 2 ** 15
DEFAULT_EMBED_DIM = 64


class DimensionMismatchError(ValueError):
    pass


class BatchTooSmallError(ValueError):
    pass


class InvalidDistributionError(ValueError):
    pass


class TooFewPointsError(ValueError):
    pass


def softmax(scores: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = scores - np.max(scores, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def log_softmax(scores: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = scores - np.max(scores, axis=axis, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))


def entropy(probs: np.ndarray) -> float:
    p = probs[probs > 0]
    return float(-np.sum(p * np.log(p)))


def entropy_grad_wrt_logits(probs: np.ndarray) -> np.ndarray:
    """dH/dz for H of softmax(z): -p * (log p + H)."""
    logp = np.where(probs > 0, np.log(np.maximum(probs, 1e-300)), 0.0)
    h = -float(np.sum(probs * logp))
    return -probs * (logp + h)


def categorical_sample(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from a categorical distribution."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-6:
        raise InvalidDistributionError("probs must be nonnegative and sum to 1")
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(idx, len(probs) - 1)


# ---------------------------------------------------------------------------
# Text encoder
# ---------------------------------------------------------------------------

def _bucket(key: str, hash_dim: int) -> int:
    return zlib.crc32(key.encode("utf-8")) % hash_dim


def hashed_ngram_counts(tokens, hash_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Bucket indices and counts of the unigram+bigram bag of a token list."""
    counts: dict[int, float] = {}
    for tok in tokens:
        b = _bucket("u:" + tok, hash_dim)
        counts[b] = counts.get(b, 0.0) + 1.0
    for t1, t2 in zip(tokens, tokens[1:]):
        b = _bucket(f"b:{t1}|{t2}", hash_dim)
        counts[b] = counts.get(b, 0.0) + 1.0
    if not counts:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    idx = np.fromiter(counts.keys(), dtype=np.int64, count=len(counts))
    order = np.argsort(idx)
    vals = np.fromiter(counts.values(), dtype=np.float64, count=len(counts))
    return idx[order], vals[order]


@dataclass
class TextEncoderParams:
    table: np.ndarray  # (hash_dim, d)
    w1: np.ndarray     # (d, d)
    b1: np.ndarray     # (d,)
    w2: np.ndarray     # (d, d)
    b2: np.ndarray     # (d,)

    @property
    def hash_dim(self) -> int:
        return self.table.shape[0]

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    @staticmethod
    def init(rng: np.random.Generator, hash_dim: int = DEFAULT_HASH_DIM,
             dim: int = DEFAULT_EMBED_DIM) -> "TextEncoderParams":
        s = 1.0 / np.sqrt(dim)
        return TextEncoderParams(
            table=rng.normal(0.0, s, size=(hash_dim, dim)),
            w1=rng.normal(0.0, s, size=(dim, dim)),
            b1=np.zeros(dim),
            w2=rng.normal(0.0, s, size=(dim, dim)),
            b2=np.zeros(dim),
        )

    def tensors(self, prefix: str = "") -> dict[str, np.ndarray]:
        return {prefix + "table": self.table, prefix + "w1": self.w1, prefix + "b1": self.b1,
                prefix + "w2": self.w2, prefix + "b2": self.b2}

    @staticmethod
    def from_tensors(t: dict[str, np.ndarray], prefix: str = "") -> "TextEncoderParams":
        return TextEncoderParams(
            table=t[prefix + "table"], w1=t[prefix + "w1"], b1=t[prefix + "b1"],
            w2=t[prefix + "w2"], b2=t[prefix + "b2"],
        )

    def copy(self) -> "TextEncoderParams":
        return TextEncoderParams(*(arr.copy() for arr in
                                   (self.table, self.w1, self.b1, self.w2, self.b2)))


@dataclass
class EncodeTrace:
    """Forward intermediates needed for the encoder backward pass."""

    idx: np.ndarray
    counts: np.ndarray
    total: float
    ebar: np.ndarray
    h1: np.ndarray


def _as_tokens(text) -> list[str]:
    if isinstance(text, str):
        from .observation import tokenize

        return tokenize(text)
    return list(text)


def encode_text(p: TextEncoderParams, text, trace: bool = False):
    """Embed a text or token sequence into a d-vector.

    Empty input embeds the zero bag, so the result is the projection of
    the zero vector rather than an error.
    """
    tokens = _as_tokens(text)
    idx, counts = hashed_ngram_counts(tokens, p.hash_dim)
    total = float(counts.sum())
    if total > 0:
        ebar = counts @ p.table[idx] / total
    else:
        ebar = np.zeros(p.dim)
    h1 = np.tanh(ebar @ p.w1 + p.b1)
    out = h1 @ p.w2 + p.b2
    if trace:
        return out, EncodeTrace(idx=idx, counts=counts, total=total, ebar=ebar, h1=h1)
    return out


def encode_backward(p: TextEncoderParams, tr: EncodeTrace, dout: np.ndarray,
                    grads: dict[str, np.ndarray], prefix: str = "") -> None:
    """Accumulate d(loss)/d(params) for one encode into grads."""
    grads[prefix + "b2"] += dout
    grads[prefix + "w2"] += np.outer(tr.h1, dout)
    dh1 = p.w2 @ dout
    dz1 = dh1 * (1.0 - tr.h1 ** 2)
    grads[prefix + "b1"] += dz1
    grads[prefix + "w1"] += np.outer(tr.ebar, dz1)
    if tr.total > 0:
        debar = p.w1 @ dz1
        np.add.at(grads[prefix + "table"], tr.idx, np.outer(tr.counts / tr.total, debar))


def zero_grads_like(tensors: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in tensors.items()}


def clip_grad_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    total = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def sgd_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float) -> None:
    for k, p in params.items():
        p -= lr * grads[k]


# ---------------------------------------------------------------------------
# Bi-encoder
# ---------------------------------------------------------------------------

@dataclass
class BiEncoderParams:
    ctx: TextEncoderParams
    cand: TextEncoderParams

    @staticmethod
    def init(rng: np.random.Generator, hash_dim: int = DEFAULT_HASH_DIM,
             dim: int = DEFAULT_EMBED_DIM) -> "BiEncoderParams":
        return BiEncoderParams(
            ctx=TextEncoderParams.init(rng, hash_dim, dim),
            cand=TextEncoderParams.init(rng, hash_dim, dim),
        )

    def tensors(self, prefix: str = "") -> dict[str, np.ndarray]:
        return {**self.ctx.tensors(prefix + "ctx."), **self.cand.tensors(prefix + "cand.")}

    @staticmethod
    def from_tensors(t: dict[str, np.ndarray], prefix: str = "") -> "BiEncoderParams":
        return BiEncoderParams(
            ctx=TextEncoderParams.from_tensors(t, prefix + "ctx."),
            cand=TextEncoderParams.from_tensors(t, prefix + "cand."),
        )

    def copy(self) -> "BiEncoderParams":
        return BiEncoderParams(self.ctx.copy(), self.cand.copy())


@dataclass(frozen=True)
class ScoredCandidate:
    candidate_index: int
    score: float
    prob: float


def score_candidates(ctx: np.ndarray, cands) -> list[ScoredCandidate]:
    """Dot-product scores plus softmax probs, sorted by descending score.

    Ties keep ascending candidate index, so rankings are reproducible.
    """
    matrix = np.asarray(cands, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != ctx.shape[0]:
        raise DimensionMismatchError(
            f"candidates of dim {matrix.shape[-1] if matrix.ndim else '?'} vs context {ctx.shape[0]}")
    scores = matrix @ ctx
    probs = softmax(scores)
    order = np.argsort(-scores, kind="stable")
    return [ScoredCandidate(int(i), float(scores[i]), float(probs[i])) for i in order]


def biencoder_loss_and_grads(params: BiEncoderParams, batch) -> tuple[float, dict[str, np.ndarray]]:
    """In-batch-negative cross entropy over the BxB score matrix.

    ``batch`` is a sequence of (context_tokens, candidate_tokens) pairs;
    each row's candidate is the positive for its context and a negative
    for every other row.
    """
    n = len(batch)
    if n < 2:
        raise BatchTooSmallError("in-batch negatives need batch size >= 2")
    ctx_vecs, ctx_traces, cand_vecs, cand_traces = [], [], [], []
    for ctx_tokens, cand_tokens in batch:
        v, tr = encode_text(params.ctx, ctx_tokens, trace=True)
        ctx_vecs.append(v)
        ctx_traces.append(tr)
        v, tr = encode_text(params.cand, cand_tokens, trace=True)
        cand_vecs.append(v)
        cand_traces.append(tr)
    ctx_m = np.stack(ctx_vecs)
    cand_m = np.stack(cand_vecs)
    scores = ctx_m @ cand_m.T
    logp = log_softmax(scores, axis=1)
    loss = float(-np.mean(np.diag(logp)))
    dscores = (softmax(scores, axis=1) - np.eye(n)) / n
    dctx = dscores @ cand_m
    dcand = dscores.T @ ctx_m
    grads = zero_grads_like(params.tensors())
    for i in range(n):
        encode_backward(params.ctx, ctx_traces[i], dctx[i], grads, "ctx.")
        encode_backward(params.cand, cand_traces[i], dcand[i], grads, "cand.")
    return loss, grads


def train_biencoder_batch(params: BiEncoderParams, batch, lr: float,
                          clip: float = 1.0) -> float:
    """One clipped SGD step on a batch; returns the pre-step loss."""
    loss, grads = biencoder_loss_and_grads(params, batch)
    clip_grad_norm(grads, clip)
    sgd_step(params.tensors(), grads, lr)
    return loss


def _dedup_batches(pairs, order, batch_size: int):
    """Batches whose candidate texts are pairwise distinct.

    A duplicated candidate inside one batch would be simultaneously the
    positive of its own row and a negative for an identical row, which
    poisons the in-batch loss; duplicates are deferred to later batches.
    """
    pending = [pairs[i] for i in order]
    while len(pending) >= 2:
        batch, leftover, seen = [], [], set()
        for pair in pending:
            key = tuple(pair[1]) if not isinstance(pair[1], str) else pair[1]
            if len(batch) < batch_size and key not in seen:
                seen.add(key)
                batch.append(pair)
            else:
                leftover.append(pair)
        if len(batch) < 2:
            break
        yield batch
        pending = leftover


def train_biencoder(params: BiEncoderParams, pairs, epochs: int, batch_size: int,
                    lr: float, rng: np.random.Generator, clip: float = 1.0) -> list[float]:
    """Shuffled mini-batch training; returns the mean loss per epoch."""
    losses = []
    idx = np.arange(len(pairs))
    for _ in range(epochs):
        rng.shuffle(idx)
        epoch_losses = [train_biencoder_batch(params, batch, lr, clip)
                        for batch in _dedup_batches(pairs, idx, batch_size)]
        losses.append(float(np.mean(epoch_losses)) if epoch_losses else 0.0)
    return losses


# ---------------------------------------------------------------------------
# MLP policy and value head
# ---------------------------------------------------------------------------

@dataclass
class MlpPolicyParams:
    w1: np.ndarray  # (d, h)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (h, C)
    b2: np.ndarray  # (C,)

    @property
    def n_actions(self) -> int:
        return self.w2.shape[1]

    @staticmethod
    def init(rng: np.random.Generator, dim: int, hidden: int, n_actions: int,
             scale: float = 0.05) -> "MlpPolicyParams":
        if n_actions < 2:
            raise ValueError("need at least 2 actions")
        return MlpPolicyParams(
            w1=rng.uniform(-scale, scale, size=(dim, hidden)),
            b1=np.zeros(hidden),
            w2=rng.uniform(-scale, scale, size=(hidden, n_actions)),
            b2=np.zeros(n_actions),
        )

    def tensors(self, prefix: str = "") -> dict[str, np.ndarray]:
        return {prefix + "w1": self.w1, prefix + "b1": self.b1,
                prefix + "w2": self.w2, prefix + "b2": self.b2}

    @staticmethod
    def from_tensors(t: dict[str, np.ndarray], prefix: str = "") -> "MlpPolicyParams":
        return MlpPolicyParams(t[prefix + "w1"], t[prefix + "b1"], t[prefix + "w2"], t[prefix + "b2"])


@dataclass
class MlpTrace:
    s: np.ndarray
    h1: np.ndarray
    h2: np.ndarray


def mlp_policy_forward(p: MlpPolicyParams, s: np.ndarray, trace: bool = False):
    """tanh(W2 tanh(W1 s + b1) + b2); outputs live in (-1, 1)."""
    if s.shape[0] != p.w1.shape[0]:
        raise DimensionMismatchError(f"state dim {s.shape[0]} vs {p.w1.shape[0]}")
    h1 = np.tanh(s @ p.w1 + p.b1)
    h2 = np.tanh(h1 @ p.w2 + p.b2)
    if trace:
        return h2, MlpTrace(s=s, h1=h1, h2=h2)
    return h2


def mlp_policy_backward(p: MlpPolicyParams, tr: MlpTrace, dout: np.ndarray,
                        grads: dict[str, np.ndarray], prefix: str = "") -> None:
    dz2 = dout * (1.0 - tr.h2 ** 2)
    grads[prefix + "b2"] += dz2
    grads[prefix + "w2"] += np.outer(tr.h1, dz2)
    dh1 = p.w2 @ dz2
    dz1 = dh1 * (1.0 - tr.h1 ** 2)
    grads[prefix + "b1"] += dz1
    grads[prefix + "w1"] += np.outer(tr.s, dz1)


@dataclass
class ValueHead:
    w: np.ndarray  # (d,)
    b: np.ndarray  # ()

    @staticmethod
    def init(dim: int) -> "ValueHead":
        return ValueHead(w=np.zeros(dim), b=np.zeros(()))

    def forward(self, s: np.ndarray) -> float:
        return float(s @ self.w + self.b)

    def backward(self, s: np.ndarray, dvalue: float, grads: dict[str, np.ndarray],
                 prefix: str = "") -> None:
        grads[prefix + "w"] += dvalue * s
        grads[prefix + "b"] += dvalue

    def tensors(self, prefix: str = "") -> dict[str, np.ndarray]:
        return {prefix + "w": self.w, prefix + "b": self.b}

    @staticmethod
    def from_tensors(t: dict[str, np.ndarray], prefix: str = "") -> "ValueHead":
        return ValueHead(w=t[prefix + "w"], b=t[prefix + "b"])


def params_checksum(tensors: dict[str, np.ndarray]) -> str:
    """Stable digest of named tensors, for frozen-parameter audits."""
    h = hashlib.sha256()
    for name in sorted(tensors):
        h.update(name.encode())
        arr = np.ascontiguousarray(tensors[name], dtype=np.float64)
        h.update(str(arr.shape).encode())
        h.update(arr.tobytes())
    return h.hexdigest()
