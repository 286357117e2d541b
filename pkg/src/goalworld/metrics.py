"""Evaluation harness: reward/turn metrics, baselines, per-goal breakdowns,
achievability splits, repeat analysis and top-utterance reports.

Reports are pure functions of (checkpoint, split, seed): rollouts run in
greedy mode with per-episode RNG streams, so re-running reproduces the
same JSON byte for byte.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .agents import EmptyCorpusError, RandomUtteranceAgent
from .task import (
    EpisodeEnv,
    EpisodeLog,
    GoalType,
    NoGoalAvailableError,
    Speaker,
    TaskConfig,
    run_episode,
    sample_goal,
)
from .world import Verb


class EmptySplitError(ValueError):
    pass


@dataclass(frozen=True)
class EvalConfig:
    n: int = 1
    goal_type: GoalType = GoalType.GAME_ACT
    seed: int = 0
    model_id: str = "model"
    split_id: str = "split"
    achievability: bool = True
    max_episodes: int | None = None


@dataclass
class RepeatStats:
    episode_fraction: float
    utterance_fraction: float


@dataclass
class GoalRow:
    goal: str
    count: int
    successes: int
    pct: float


@dataclass
class EvalReport:
    model_id: str
    split_id: str
    goal_type: str
    n: int
    seed: int
    episode_count: int
    mean_reward: float
    mean_turns: float
    per_verb: list[GoalRow]
    per_emote: list[GoalRow]
    achievable_count: int | None
    achievable_reward: float | None
    unachievable_count: int | None
    unachievable_reward: float | None
    repeat_stats: RepeatStats

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def baseline_random_utterance(corpus) -> RandomUtteranceAgent:
    """Uniform-sampling agent over the whole candidate corpus."""
    if not corpus:
        raise EmptyCorpusError("empty utterance corpus")
    return RandomUtteranceAgent(corpus)


@dataclass
class EpisodeResult:
    log: EpisodeLog
    reward: int
    turns_used: int
    achievable: bool | None


def _is_achievable_one_step(agent, env_agent, scenario, goal) -> bool:
    """Brute force over the agent's own action space at the first turn."""
    obs = EpisodeEnv(scenario=scenario, goal=goal, env_agent=env_agent, n=1).player_obs(
        include_goal=getattr(agent, "goal_conditioned", True))
    for utterance in agent.candidate_utterances(obs):
        probe = EpisodeEnv(scenario=scenario, goal=goal, env_agent=env_agent, n=1)
        _, reward, _ = probe.step(utterance)
        if reward:
            return True
    return False


def roll_split(agent, env_agent, source_logs, cfg: EvalConfig) -> list[EpisodeResult]:
    """Greedy-mode rollouts over a split with per-episode RNG streams."""
    if not source_logs:
        raise EmptySplitError("no source episodes")
    task_cfg = TaskConfig(n=cfg.n, goal_type=cfg.goal_type, seed=cfg.seed)
    results: list[EpisodeResult] = []
    check_achievable = cfg.achievability and hasattr(agent, "candidate_utterances")
    for idx, source in enumerate(source_logs):
        if cfg.max_episodes is not None and len(results) >= cfg.max_episodes:
            break
        rng = np.random.default_rng([cfg.seed, idx])
        try:
            scenario, goal = sample_goal(source, rng, cfg.goal_type)
        except NoGoalAvailableError:
            continue
        log, _ = run_episode(agent, env_agent, scenario, goal, task_cfg, rng,
                             mode="greedy", episode_id=f"{cfg.split_id}:{idx}")
        achievable = None
        if check_achievable:
            achievable = _is_achievable_one_step(agent, env_agent, scenario, goal)
        results.append(EpisodeResult(log=log, reward=log.reward,
                                     turns_used=log.turns_used, achievable=achievable))
    if not results:
        raise EmptySplitError(f"no sampleable {cfg.goal_type.value} goals in split")
    return results


def _goal_key(log: EpisodeLog) -> str:
    action = log.goal.target
    return action.emote if action.verb is Verb.EMOTE else action.verb.value


def breakdown_by_goal(logs) -> tuple[list[GoalRow], list[GoalRow]]:
    """Per-verb and per-emote (count, success pct) tables, count-descending."""
    counts: dict[str, list[int]] = {}
    emote_goal: dict[str, bool] = {}
    for log in logs:
        key = _goal_key(log)
        emote_goal[key] = log.goal.target.verb is Verb.EMOTE
        row = counts.setdefault(key, [0, 0])
        row[0] += 1
        row[1] += int(log.reward)

    def build(keys) -> list[GoalRow]:
        rows = [GoalRow(k, counts[k][0], counts[k][1],
                        round(100.0 * counts[k][1] / counts[k][0], 2)) for k in keys]
        rows.sort(key=lambda r: (-r.count, r.goal))
        return rows

    return (build([k for k in counts if not emote_goal[k]]),
            build([k for k in counts if emote_goal[k]]))


_WS = re.compile(r"\s+")


def repeat_stats(logs) -> RepeatStats:
    """Exact-string repeats among player utterances, whitespace-normalized."""
    episodes_with_repeat = 0
    total_utts = 0
    total_repeats = 0
    n_logs = 0
    for log in logs:
        utts = [_WS.sub(" ", ev.utterance.strip())
                for ev in log.turns if ev.speaker is Speaker.PLAYER]
        if not utts:
            continue
        n_logs += 1
        distinct = len(set(utts))
        total_utts += len(utts)
        total_repeats += len(utts) - distinct
        if distinct < len(utts):
            episodes_with_repeat += 1
    if n_logs == 0:
        return RepeatStats(0.0, 0.0)
    return RepeatStats(
        episode_fraction=episodes_with_repeat / n_logs,
        utterance_fraction=total_repeats / total_utts if total_utts else 0.0,
    )


def evaluate_policy(agent, env_agent, source_logs, cfg: EvalConfig) -> EvalReport:
    """Full report over a split; failed episodes count the whole horizon
    in the turn average."""
    results = roll_split(agent, env_agent, source_logs, cfg)
    rolled = [r.log for r in results]
    rewards = np.array([r.reward for r in results], dtype=float)
    turns = np.array([r.turns_used if r.reward else cfg.n for r in results], dtype=float)
    per_verb, per_emote = breakdown_by_goal(rolled)
    flags = [r.achievable for r in results]
    if any(f is not None for f in flags):
        ach = np.array([bool(f) for f in flags])
        a_count, u_count = int(ach.sum()), int((~ach).sum())
        a_reward = float(rewards[ach].mean()) if a_count else 0.0
        u_reward = float(rewards[~ach].mean()) if u_count else 0.0
    else:
        a_count = u_count = None
        a_reward = u_reward = None
    return EvalReport(
        model_id=cfg.model_id,
        split_id=cfg.split_id,
        goal_type=cfg.goal_type.value,
        n=cfg.n,
        seed=cfg.seed,
        episode_count=len(results),
        mean_reward=float(rewards.mean()),
        mean_turns=float(turns.mean()),
        per_verb=per_verb,
        per_emote=per_emote,
        achievable_count=a_count,
        achievable_reward=a_reward,
        unachievable_count=u_count,
        unachievable_reward=u_reward,
        repeat_stats=repeat_stats(rolled),
    )


@dataclass
class AchievabilitySplit:
    achievable_count: int
    achievable_reward: float
    unachievable_count: int
    unachievable_reward: float


def achievability_split(agent, env_agent, source_logs, cfg: EvalConfig) -> AchievabilitySplit:
    """Mean reward on 1-step-achievable vs unachievable episodes."""
    results = roll_split(agent, env_agent, source_logs,
                         EvalConfig(**{**asdict_config(cfg), "achievability": True}))
    ach = [r for r in results if r.achievable]
    un = [r for r in results if not r.achievable]
    return AchievabilitySplit(
        achievable_count=len(ach),
        achievable_reward=float(np.mean([r.reward for r in ach])) if ach else 0.0,
        unachievable_count=len(un),
        unachievable_reward=float(np.mean([r.reward for r in un])) if un else 0.0,
    )


def asdict_config(cfg: EvalConfig) -> dict:
    return {"n": cfg.n, "goal_type": cfg.goal_type, "seed": cfg.seed,
            "model_id": cfg.model_id, "split_id": cfg.split_id,
            "achievability": cfg.achievability, "max_episodes": cfg.max_episodes}


def transfer_1step_3x(agent, env_agent, source_logs, cfg: EvalConfig) -> EvalReport:
    """Evaluate an unchanged 1-step-trained agent under the 3-step horizon."""
    moved = EvalConfig(**{**asdict_config(cfg), "n": 3,
                          "model_id": cfg.model_id + "-1step3x"})
    return evaluate_policy(agent, env_agent, source_logs, moved)


def top_utterances_by_verb(agent, source_logs, cfg: EvalConfig, corpus,
                           top: int = 10) -> dict[str, list[tuple[str, float]]]:
    """Mean per-candidate probability at the first turn, grouped by the
    goal's verb (or emote kind), top utterances per group."""
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for idx, source in enumerate(source_logs):
        rng = np.random.default_rng([cfg.seed, idx])
        try:
            scenario, goal = sample_goal(source, rng, cfg.goal_type)
        except NoGoalAvailableError:
            continue
        env = EpisodeEnv(scenario=scenario, goal=goal, env_agent=None, n=cfg.n)
        obs = env.player_obs(include_goal=getattr(agent, "goal_conditioned", True))
        probs = agent.utterance_probs(obs)
        key = goal.target.emote if goal.target.verb is Verb.EMOTE else goal.target.verb.value
        if key not in sums:
            sums[key] = np.zeros(len(corpus))
            counts[key] = 0
        sums[key] += probs
        counts[key] += 1
    out: dict[str, list[tuple[str, float]]] = {}
    for key, total in sums.items():
        mean = total / counts[key]
        order = np.argsort(-mean, kind="stable")[:top]
        out[key] = [(corpus[int(i)], float(mean[int(i)])) for i in order]
    return out


def paired_binomial_pvalue(rewards_a, rewards_b) -> float:
    """One-sided exact test that policy A beats policy B on paired episodes."""
    a = np.asarray(rewards_a)
    b = np.asarray(rewards_b)
    if a.shape != b.shape:
        raise ValueError("paired test needs matched episode sets")
    wins = int(np.sum((a == 1) & (b == 0)))
    losses = int(np.sum((a == 0) & (b == 1)))
    if wins + losses == 0:
        return 1.0
    return float(stats.binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue)


def render_report(report: EvalReport) -> str:
    """Aligned-column plain-text rendering of one report."""
    lines = [
        f"model {report.model_id}   split {report.split_id}   "
        f"goal {report.goal_type}   n={report.n}   seed {report.seed}",
        f"episodes {report.episode_count}   reward {report.mean_reward:.3f}   "
        f"turns {report.mean_turns:.2f}",
        f"repeats: episodes {report.repeat_stats.episode_fraction:.3f}   "
        f"utterances {report.repeat_stats.utterance_fraction:.3f}",
    ]
    if report.achievable_count is not None:
        lines.append(
            f"1-step achievable {report.achievable_count} eps reward {report.achievable_reward:.3f}   "
            f"unachievable {report.unachievable_count} eps reward {report.unachievable_reward:.3f}")
    for title, rows in (("verb", report.per_verb), ("emote", report.per_emote)):
        if not rows:
            continue
        lines.append("")
        lines.append(f"{title:<12}{'count':>8}{'success%':>10}")
        for row in rows:
            lines.append(f"{row.goal:<12}{row.count:>8}{row.pct:>10.2f}")
    return "\n".join(lines) + "\n"
