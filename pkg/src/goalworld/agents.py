"""Agent families: fixed environment agent, inverse model, topic and top-K policies.

The environment agent and the inverse model are retrieval bi-encoders
trained by behavioural cloning on episode logs.  The two RL policies
keep those components frozen and train only a small head: a topic
chooser MLP, or a re-scoring map over the inverse model's top-K
candidates (linear map or a small two-layer attention net).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .kmeans import KMeansModel, kmeans_assign, kmeans_fit
from .nn import (
    BiEncoderParams,
    MlpPolicyParams,
    TooFewPointsError,
    ValueHead,
    encode_text,
    mlp_policy_backward,
    mlp_policy_forward,
    params_checksum,
    softmax,
    train_biencoder,
    zero_grads_like,
)
from .observation import Speaker, flatten_observation, topic_token
from .task import EpisodeLog, PolicyAction
from .world import GameAction, Verb

NO_ACTION_TEXT = "no action"


class EmptyCorpusError(ValueError):
    pass


class CorpusTooSmallError(ValueError):
    pass


def _stable_argmax(scores: np.ndarray) -> int:
    return int(np.argmax(scores))  # first maximum wins ties


class FrozenEncoder:
    """Read-only encoder with a memo cache for short candidate texts."""

    def __init__(self, params):
        self.params = params
        self._cache: dict[str, np.ndarray] = {}

    def encode(self, tokens) -> np.ndarray:
        return encode_text(self.params, tokens)

    def encode_cached(self, text: str) -> np.ndarray:
        vec = self._cache.get(text)
        if vec is None:
            vec = encode_text(self.params, text)
            self._cache[text] = vec
        return vec

    def matrix(self, texts) -> np.ndarray:
        return np.stack([self.encode_cached(t) for t in texts])


# ---------------------------------------------------------------------------
# Supervised training data extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InverseExample:
    """Goal-conditioned observation paired with the persuading utterance."""

    obs_tokens: tuple[str, ...]
    target_utterance: str
    goal: GameAction
    goal_text: str
    episode_id: str
    turn_index: int


def build_inverse_dataset(logs, goal_conditioned: bool = True) -> list[InverseExample]:
    """One example per env turn with a non-null action.

    The goal is the action itself; the label is the partner's utterance
    immediately before it; the observation history ends strictly before
    that utterance, so the label can never leak into the input.
    """
    from .grammar import render_action_text

    examples: list[InverseExample] = []
    for log in logs:
        view = log.scenario.player_view()
        for i, ev in enumerate(log.turns):
            if ev.speaker is not Speaker.ENV or ev.action is None:
                continue
            j = max((k for k in range(i) if log.turns[k].speaker is Speaker.PLAYER),
                    default=None)
            if j is None:
                continue
            goal_text = render_action_text(ev.action, log.scenario.world)
            obs = flatten_observation(view, log.turns[:j],
                                      goal_text if goal_conditioned else None)
            examples.append(InverseExample(
                obs_tokens=tuple(obs),
                target_utterance=log.turns[j].utterance,
                goal=ev.action,
                goal_text=goal_text,
                episode_id=log.episode_id,
                turn_index=i,
            ))
    return examples


def env_training_pairs(logs) -> tuple[list, list]:
    """(utterance pairs, action pairs) from the env side of the logs."""
    utt_pairs, act_pairs = [], []
    for log in logs:
        view = log.scenario.env_view()
        for i, ev in enumerate(log.turns):
            if ev.speaker is not Speaker.ENV:
                continue
            obs = tuple(flatten_observation(view, log.turns[:i], None))
            utt_pairs.append((obs, ev.utterance))
            act_pairs.append((obs, ev.action_text if ev.action_text else NO_ACTION_TEXT))
    return utt_pairs, act_pairs


@dataclass(frozen=True)
class PretrainConfig:
    hash_dim: int = 4096
    dim: int = 32
    epochs: int = 30
    batch_size: int = 16
    lr: float = 1.0
    clip: float = 1.0


# ---------------------------------------------------------------------------
# Environment agent
# ---------------------------------------------------------------------------

class EnvironmentAgent:
    """Fixed retrieval agent: argmax utterance from the corpus, argmax
    action over rendered admissible actions, all emotes and ``no action``."""

    def __init__(self, utterance_scorer: BiEncoderParams, action_scorer: BiEncoderParams,
                 corpus: list[str]):
        if not corpus:
            raise EmptyCorpusError("environment agent needs a candidate corpus")
        self.utterance_scorer = utterance_scorer
        self.action_scorer = action_scorer
        self.corpus = list(corpus)
        self._utt_cand = FrozenEncoder(utterance_scorer.cand)
        self._act_cand = FrozenEncoder(action_scorer.cand)
        self._corpus_matrix = self._utt_cand.matrix(self.corpus)

    def respond(self, obs_tokens, world, actor_id, admissible, last_utterance=""):
        ctx_u = encode_text(self.utterance_scorer.ctx, obs_tokens)
        utterance = self.corpus[_stable_argmax(self._corpus_matrix @ ctx_u)]
        from .grammar import render_action_text

        texts = [render_action_text(a, world) for a in admissible] + [NO_ACTION_TEXT]
        ctx_a = encode_text(self.action_scorer.ctx, obs_tokens)
        cand = np.stack([self._act_cand.encode_cached(t) for t in texts])
        best = _stable_argmax(cand @ ctx_a)
        action = None if best == len(admissible) else admissible[best]
        return utterance, action

    def tensors(self) -> dict[str, np.ndarray]:
        return {**self.utterance_scorer.tensors("utt."), **self.action_scorer.tensors("act.")}

    def checksum(self) -> str:
        return params_checksum(self.tensors())

    def save(self, path) -> None:
        meta = {"kind": "env", "hash_dim": self.utterance_scorer.ctx.hash_dim,
                "dim": self.utterance_scorer.ctx.dim, "corpus_size": len(self.corpus),
                "trainable": [], "frozen": sorted(self.tensors())}
        save_checkpoint(path, self.tensors(), meta)


def train_env_agent(logs, corpus: list[str], rng: np.random.Generator,
                    cfg: PretrainConfig = PretrainConfig()) -> EnvironmentAgent:
    """Behavioural cloning of the env side: utterance and action scorers.

    No-action rows dominate the logs, so they are subsampled to roughly
    the acting-row count before training the action scorer.
    """
    utt_pairs, act_pairs = env_training_pairs(logs)
    if not utt_pairs:
        raise EmptyCorpusError("no env turns in logs")
    acting = [p for p in act_pairs if p[1] != NO_ACTION_TEXT]
    idle = [p for p in act_pairs if p[1] == NO_ACTION_TEXT]
    if acting and len(idle) > len(acting):
        keep = rng.choice(len(idle), size=len(acting), replace=False)
        idle = [idle[i] for i in sorted(keep)]
    balanced = acting + idle

    utterance_scorer = BiEncoderParams.init(rng, cfg.hash_dim, cfg.dim)
    action_scorer = BiEncoderParams.init(rng, cfg.hash_dim, cfg.dim)
    train_biencoder(utterance_scorer, utt_pairs, cfg.epochs, cfg.batch_size, cfg.lr, rng, cfg.clip)
    train_biencoder(action_scorer, balanced, cfg.epochs, cfg.batch_size, cfg.lr, rng, cfg.clip)
    return EnvironmentAgent(utterance_scorer, action_scorer, corpus)


# ---------------------------------------------------------------------------
# Inverse model
# ---------------------------------------------------------------------------

class InverseModel:
    """Goal-conditioned retrieval baseline; also the frozen backbone of
    the RL policies (context embeddings and top-K candidate lists)."""

    def __init__(self, params: BiEncoderParams, corpus: list[str], goal_conditioned: bool = True):
        if not corpus:
            raise EmptyCorpusError("inverse model needs a candidate corpus")
        self.params = params
        self.corpus = list(corpus)
        self.goal_conditioned = goal_conditioned
        self._cand = FrozenEncoder(params.cand)
        self._matrix = self._cand.matrix(self.corpus)

    def context(self, obs_tokens) -> np.ndarray:
        return encode_text(self.params.ctx, obs_tokens)

    def scores(self, obs_tokens) -> np.ndarray:
        return self._matrix @ self.context(obs_tokens)

    def act(self, obs_tokens, rng, mode: str = "greedy") -> PolicyAction:
        idx = _stable_argmax(self.scores(obs_tokens))
        return PolicyAction(utterance=self.corpus[idx], action_index=idx)

    def top_k(self, obs_tokens, k: int) -> tuple[list[int], np.ndarray, np.ndarray]:
        if len(self.corpus) < k:
            raise CorpusTooSmallError(f"corpus of {len(self.corpus)} < K={k}")
        s = self.context(obs_tokens)
        order = np.argsort(-(self._matrix @ s), kind="stable")[:k]
        idxs = [int(i) for i in order]
        return idxs, s, self._matrix[order]

    def utterance_probs(self, obs_tokens) -> np.ndarray:
        return softmax(self.scores(obs_tokens))

    def tensors(self) -> dict[str, np.ndarray]:
        return self.params.tensors("inv.")

    def checksum(self) -> str:
        return params_checksum(self.tensors())

    def save(self, path) -> None:
        meta = {"kind": "inverse", "hash_dim": self.params.ctx.hash_dim,
                "dim": self.params.ctx.dim, "goal_conditioned": self.goal_conditioned,
                "corpus_size": len(self.corpus),
                "trainable": [], "frozen": sorted(self.tensors())}
        save_checkpoint(path, self.tensors(), meta)


def train_inverse_model(logs, corpus: list[str], rng: np.random.Generator,
                        cfg: PretrainConfig = PretrainConfig(),
                        goal_conditioned: bool = True) -> InverseModel:
    dataset = build_inverse_dataset(logs, goal_conditioned=goal_conditioned)
    if not dataset:
        raise EmptyCorpusError("no inverse examples in logs")
    params = BiEncoderParams.init(rng, cfg.hash_dim, cfg.dim)
    pairs = [(ex.obs_tokens, ex.target_utterance) for ex in dataset]
    train_biencoder(params, pairs, cfg.epochs, cfg.batch_size, cfg.lr, rng, cfg.clip)
    return InverseModel(params, corpus, goal_conditioned=goal_conditioned)


# ---------------------------------------------------------------------------
# Topic agent
# ---------------------------------------------------------------------------

@dataclass
class StepEval:
    """Recomputed policy distribution and value for one trajectory step."""

    probs: np.ndarray
    value: float
    backward: object  # callable(dlogits, dvalue) -> dict[str, np.ndarray]


class TopicAgent:
    """Policy over C latent topics; a frozen topic-conditioned retrieval
    model turns the chosen topic into the final utterance."""

    goal_conditioned = True

    def __init__(self, ts: FrozenEncoder, tu: BiEncoderParams, kmeans: KMeansModel,
                 policy: MlpPolicyParams, value: ValueHead, corpus: list[str],
                 temperature: float = 0.2):
        self.ts = ts
        self.tu = tu
        self.kmeans = kmeans
        self.policy = policy
        self.value = value
        self.corpus = list(corpus)
        self.temperature = temperature
        self._tu_cand = FrozenEncoder(tu.cand)
        self._tu_matrix = self._tu_cand.matrix(self.corpus)

    @property
    def n_topics(self) -> int:
        return self.policy.n_actions

    @property
    def action_space_size(self) -> int:
        return self.n_topics

    def state(self, obs_tokens) -> np.ndarray:
        return self.ts.encode(obs_tokens)

    def topic_probs(self, s: np.ndarray) -> np.ndarray:
        return softmax(mlp_policy_forward(self.policy, s) / self.temperature)

    def utterance_index_for_topic(self, obs_tokens, c: int) -> int:
        ctx = encode_text(self.tu.ctx, list(obs_tokens) + [topic_token(c)])
        return _stable_argmax(self._tu_matrix @ ctx)

    def utterance_for_topic(self, obs_tokens, c: int) -> str:
        return self.corpus[self.utterance_index_for_topic(obs_tokens, c)]

    def act(self, obs_tokens, rng, mode: str = "sample") -> PolicyAction:
        from .nn import categorical_sample

        s = self.state(obs_tokens)
        probs = self.topic_probs(s)
        c = _stable_argmax(probs) if mode == "greedy" else categorical_sample(probs, rng)
        return PolicyAction(
            utterance=self.utterance_for_topic(obs_tokens, c),
            action_index=c,
            logprob=float(np.log(max(probs[c], 1e-300))),
            value=self.value.forward(s),
            state=s,
        )

    def candidate_utterances(self, obs_tokens) -> list[str]:
        return [self.utterance_for_topic(obs_tokens, c) for c in range(self.n_topics)]

    def utterance_probs(self, obs_tokens) -> np.ndarray:
        s = self.state(obs_tokens)
        probs = self.topic_probs(s)
        out = np.zeros(len(self.corpus))
        for c in range(self.n_topics):
            out[self.utterance_index_for_topic(obs_tokens, c)] += probs[c]
        return out

    def trainable_params(self) -> dict[str, np.ndarray]:
        return {**self.policy.tensors("policy."), **self.value.tensors("value.")}

    def frozen_tensors(self) -> dict[str, np.ndarray]:
        return {**self.ts.params.tensors("ts."), **self.tu.tensors("tu.")}

    def frozen_checksum(self) -> str:
        return params_checksum(self.frozen_tensors())

    def step_eval(self, state: np.ndarray, extras=None) -> StepEval:
        h2, trace = mlp_policy_forward(self.policy, state, trace=True)
        probs = softmax(h2 / self.temperature)
        value = self.value.forward(state)

        def backward(dlogits: np.ndarray, dvalue: float) -> dict[str, np.ndarray]:
            grads = zero_grads_like(self.trainable_params())
            mlp_policy_backward(self.policy, trace, dlogits / self.temperature, grads, "policy.")
            self.value.backward(state, dvalue, grads, "value.")
            return grads

        return StepEval(probs=probs, value=value, backward=backward)

    def tensors(self) -> dict[str, np.ndarray]:
        return {
            **self.frozen_tensors(),
            **self.trainable_params(),
            "kmeans.centroids": self.kmeans.centroids,
        }

    def save(self, path) -> None:
        meta = {"kind": "topic", "hash_dim": self.ts.params.hash_dim,
                "dim": self.ts.params.dim, "n_topics": self.n_topics,
                "temperature": self.temperature, "corpus_size": len(self.corpus),
                "trainable": sorted(self.trainable_params()),
                "frozen": sorted(self.frozen_tensors())}
        save_checkpoint(path, self.tensors(), meta)


def pretrain_topic_components(inverse: InverseModel, dataset: list[InverseExample],
                              n_topics: int, rng: np.random.Generator,
                              cfg: PretrainConfig = PretrainConfig(),
                              hidden: int = 32, temperature: float = 0.2) -> TopicAgent:
    """Freeze the inverse context encoder, cluster training observations,
    and train the topic-conditioned utterance scorer."""
    if not dataset:
        raise TooFewPointsError("empty inverse dataset")
    if len(dataset) < n_topics:
        raise TooFewPointsError(f"{len(dataset)} observations < {n_topics} topics")
    ts = FrozenEncoder(inverse.params.ctx.copy())
    embeddings = np.stack([ts.encode(ex.obs_tokens) for ex in dataset])
    km = kmeans_fit(embeddings, n_topics, rng)
    labels = kmeans_assign(km.centroids, embeddings)
    tu = inverse.params.copy()
    pairs = [
        (tuple(ex.obs_tokens) + (topic_token(int(labels[i])),), ex.target_utterance)
        for i, ex in enumerate(dataset)
    ]
    train_biencoder(tu, pairs, cfg.epochs, cfg.batch_size, cfg.lr, rng, cfg.clip)
    policy = MlpPolicyParams.init(rng, inverse.params.ctx.dim, hidden, n_topics)
    value = ValueHead.init(inverse.params.ctx.dim)
    return TopicAgent(ts, tu, km, policy, value, inverse.corpus, temperature)


# ---------------------------------------------------------------------------
# Top-K agent
# ---------------------------------------------------------------------------

VARIANT_LINEAR = "linear"
VARIANT_BIATTENTION = "biattention"


def _init_tw(rng: np.random.Generator, dim: int) -> dict[str, np.ndarray]:
    s = 0.5 / np.sqrt(dim)
    return {
        "wq1": rng.normal(0.0, s, size=(dim, dim)),
        "wk1": rng.normal(0.0, s, size=(dim, dim)),
        "wv1": rng.normal(0.0, s, size=(dim, dim)),
        "wq2": rng.normal(0.0, s, size=(dim, dim)),
        "wk2": rng.normal(0.0, s, size=(dim, dim)),
    }


def biattention_scores(tw: dict[str, np.ndarray], s: np.ndarray, cands: np.ndarray,
                       trace: bool = False):
    """Two-layer attention over {context, candidates}; the final-layer
    attention logits of the context row against the candidates."""
    d = s.shape[0]
    scale = 1.0 / np.sqrt(d)
    x = np.vstack([s[None, :], cands])
    q = x @ tw["wq1"]
    k = x @ tw["wk1"]
    v = x @ tw["wv1"]
    s1 = (q @ k.T) * scale
    a1 = softmax(s1, axis=1)
    h = x + a1 @ v
    q2 = h[0] @ tw["wq2"]
    k2 = h[1:] @ tw["wk2"]
    t = (k2 @ q2) * scale
    if not trace:
        return t
    return t, (x, q, k, v, a1, h, q2, k2, scale)


def biattention_backward(tw: dict[str, np.ndarray], tr, dt: np.ndarray,
                         grads: dict[str, np.ndarray], prefix: str = "tw.") -> None:
    x, q, k, v, a1, h, q2, k2, scale = tr
    dq2 = (k2.T @ dt) * scale
    dk2 = np.outer(dt, q2) * scale
    grads[prefix + "wq2"] += np.outer(h[0], dq2)
    grads[prefix + "wk2"] += h[1:].T @ dk2
    dh = np.zeros_like(h)
    dh[0] = tw["wq2"] @ dq2
    dh[1:] = dk2 @ tw["wk2"].T
    da1 = dh @ v.T
    dv = a1.T @ dh
    ds1 = (da1 - np.sum(da1 * a1, axis=1, keepdims=True)) * a1
    dq = (ds1 @ k) * scale
    dk = (ds1.T @ q) * scale
    grads[prefix + "wq1"] += x.T @ dq
    grads[prefix + "wk1"] += x.T @ dk
    grads[prefix + "wv1"] += x.T @ dv


class TopKAgent:
    """Re-scores the inverse model's K best utterances with a trainable map."""

    goal_conditioned = True

    def __init__(self, inverse: InverseModel, k: int, variant: str = VARIANT_LINEAR,
                 a_map: np.ndarray | None = None, b_vec: np.ndarray | None = None,
                 tw: dict[str, np.ndarray] | None = None, value: ValueHead | None = None,
                 rng: np.random.Generator | None = None):
        if k < 2:
            raise ValueError("K must be >= 2")
        if variant not in (VARIANT_LINEAR, VARIANT_BIATTENTION):
            raise ValueError(f"unknown variant {variant!r}")
        self.inverse = inverse
        self.k = k
        self.variant = variant
        dim = inverse.params.ctx.dim
        if variant == VARIANT_LINEAR:
            # Identity map makes the initial policy rank like the inverse model.
            self.a_map = np.eye(dim) if a_map is None else a_map
            self.b_vec = np.zeros(dim) if b_vec is None else b_vec
            self.tw = None
        else:
            if tw is None:
                if rng is None:
                    raise ValueError("biattention variant needs tw params or an rng")
                tw = _init_tw(rng, dim)
            self.tw = tw
            self.a_map = None
            self.b_vec = None
        self.value = ValueHead.init(dim) if value is None else value

    @property
    def corpus(self) -> list[str]:
        return self.inverse.corpus

    @property
    def action_space_size(self) -> int:
        return self.k

    def _scores(self, s: np.ndarray, cands: np.ndarray) -> np.ndarray:
        if self.variant == VARIANT_LINEAR:
            return cands @ (self.a_map @ s + self.b_vec)
        return biattention_scores(self.tw, s, cands)

    def act(self, obs_tokens, rng, mode: str = "sample") -> PolicyAction:
        from .nn import categorical_sample

        idxs, s, cands = self.inverse.top_k(obs_tokens, self.k)
        probs = softmax(self._scores(s, cands))
        i = _stable_argmax(probs) if mode == "greedy" else categorical_sample(probs, rng)
        return PolicyAction(
            utterance=self.corpus[idxs[i]],
            action_index=i,
            logprob=float(np.log(max(probs[i], 1e-300))),
            value=self.value.forward(s),
            state=s,
            extras={"cand_vecs": cands, "corpus_idxs": idxs},
        )

    def candidate_utterances(self, obs_tokens) -> list[str]:
        idxs, _, _ = self.inverse.top_k(obs_tokens, self.k)
        return [self.corpus[i] for i in idxs]

    def utterance_probs(self, obs_tokens) -> np.ndarray:
        idxs, s, cands = self.inverse.top_k(obs_tokens, self.k)
        probs = softmax(self._scores(s, cands))
        out = np.zeros(len(self.corpus))
        for pos, idx in enumerate(idxs):
            out[idx] += probs[pos]
        return out

    def trainable_params(self) -> dict[str, np.ndarray]:
        if self.variant == VARIANT_LINEAR:
            head = {"A": self.a_map, "b": self.b_vec}
        else:
            head = {f"tw.{k}": v for k, v in self.tw.items()}
        return {**head, **self.value.tensors("value.")}

    def frozen_tensors(self) -> dict[str, np.ndarray]:
        return self.inverse.tensors()

    def frozen_checksum(self) -> str:
        return params_checksum(self.frozen_tensors())

    def step_eval(self, state: np.ndarray, extras) -> StepEval:
        cands = extras["cand_vecs"]
        value = self.value.forward(state)
        if self.variant == VARIANT_LINEAR:
            q = self.a_map @ state + self.b_vec
            probs = softmax(cands @ q)

            def backward(dlogits: np.ndarray, dvalue: float) -> dict[str, np.ndarray]:
                grads = zero_grads_like(self.trainable_params())
                dq = cands.T @ dlogits
                grads["A"] += np.outer(dq, state)
                grads["b"] += dq
                self.value.backward(state, dvalue, grads, "value.")
                return grads
        else:
            t, trace = biattention_scores(self.tw, state, cands, trace=True)
            probs = softmax(t)

            def backward(dlogits: np.ndarray, dvalue: float) -> dict[str, np.ndarray]:
                grads = zero_grads_like(self.trainable_params())
                biattention_backward(self.tw, trace, dlogits, grads, "tw.")
                self.value.backward(state, dvalue, grads, "value.")
                return grads

        return StepEval(probs=probs, value=value, backward=backward)

    def tensors(self) -> dict[str, np.ndarray]:
        return {**self.frozen_tensors(), **self.trainable_params()}

    def save(self, path) -> None:
        meta = {"kind": "topk", "variant": self.variant, "k": self.k,
                "hash_dim": self.inverse.params.ctx.hash_dim,
                "dim": self.inverse.params.ctx.dim,
                "goal_conditioned": self.inverse.goal_conditioned,
                "corpus_size": len(self.corpus),
                "trainable": sorted(self.trainable_params()),
                "frozen": sorted(self.frozen_tensors())}
        save_checkpoint(path, self.tensors(), meta)


# ---------------------------------------------------------------------------
# Simple baselines
# ---------------------------------------------------------------------------

class RandomUtteranceAgent:
    """Uniform pick from the candidate corpus, no conditioning at all."""

    goal_conditioned = False

    def __init__(self, corpus: list[str]):
        if not corpus:
            raise EmptyCorpusError("random baseline needs a candidate corpus")
        self.corpus = list(corpus)

    def act(self, obs_tokens, rng, mode: str = "sample") -> PolicyAction:
        idx = int(rng.integers(len(self.corpus)))
        return PolicyAction(utterance=self.corpus[idx], action_index=idx)


class UniformTopicChooser:
    """Ablation wrapper: the trained topic agent with P_C replaced by a
    uniform random topic draw; everything downstream stays identical."""

    goal_conditioned = True

    def __init__(self, agent: TopicAgent):
        self.agent = agent

    def act(self, obs_tokens, rng, mode: str = "sample") -> PolicyAction:
        c = int(rng.integers(self.agent.n_topics))
        return PolicyAction(
            utterance=self.agent.utterance_for_topic(obs_tokens, c),
            action_index=c,
            logprob=float(-np.log(self.agent.n_topics)),
        )


# ---------------------------------------------------------------------------
# Checkpoint loading
# ---------------------------------------------------------------------------

def load_agent(path, corpus: list[str]):
    """Load any saved agent; the candidate corpus comes from the corpus dir."""
    tensors, meta = load_checkpoint(path)
    kind = meta.get("kind")
    if meta.get("corpus_size") not in (None, len(corpus)):
        raise CheckpointError(
            f"{path}: checkpoint expects {meta['corpus_size']} candidates, got {len(corpus)}")
    if kind == "env":
        return EnvironmentAgent(
            BiEncoderParams.from_tensors(tensors, "utt."),
            BiEncoderParams.from_tensors(tensors, "act."),
            corpus,
        )
    if kind == "inverse":
        return InverseModel(
            BiEncoderParams.from_tensors(tensors, "inv."),
            corpus,
            goal_conditioned=bool(meta.get("goal_conditioned", True)),
        )
    if kind == "topic":
        from .nn import TextEncoderParams

        ts = FrozenEncoder(TextEncoderParams.from_tensors(tensors, "ts."))
        tu = BiEncoderParams.from_tensors(tensors, "tu.")
        centroids = tensors["kmeans.centroids"]
        km = KMeansModel(centroids=centroids, inertia=0.0)
        policy = MlpPolicyParams.from_tensors(tensors, "policy.")
        value = ValueHead.from_tensors(tensors, "value.")
        return TopicAgent(ts, tu, km, policy, value, corpus,
                          temperature=float(meta.get("temperature", 0.2)))
    if kind == "topk":
        inverse = InverseModel(
            BiEncoderParams.from_tensors(tensors, "inv."),
            corpus,
            goal_conditioned=bool(meta.get("goal_conditioned", True)),
        )
        value = ValueHead.from_tensors(tensors, "value.")
        variant = meta.get("variant", VARIANT_LINEAR)
        if variant == VARIANT_LINEAR:
            return TopKAgent(inverse, int(meta["k"]), variant,
                             a_map=tensors["A"], b_vec=tensors["b"], value=value)
        tw = {name: tensors[f"tw.{name}"] for name in ("wq1", "wk1", "wv1", "wq2", "wk2")}
        return TopKAgent(inverse, int(meta["k"]), variant, tw=tw, value=value)
    raise CheckpointError(f"{path}: unknown agent kind {kind!r}")
