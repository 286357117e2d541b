"""Synchronous advantage actor-critic over episodic terminal-reward rollouts.

Only the reward at the terminal step is nonzero, so returns reduce to a
discounted copy of the final reward.  Each update touches only the
agent's declared trainable head; clipped SGD, one update per batch.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .nn import clip_grad_norm, entropy, entropy_grad_wrt_logits, sgd_step
from .task import Goal, Scenario, TaskConfig, run_episode


class EmptyBatchError(ValueError):
    pass


class UnterminatedTrajectoryError(ValueError):
    pass


@dataclass
class TrajectoryStep:
    state: np.ndarray
    action_index: int
    logprob: float
    value: float
    reward: float
    done: bool
    extras: dict | None = None


@dataclass(frozen=True)
class A2CConfig:
    learning_rate: float = 0.05
    gamma: float = 0.99
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    batch_episodes: int = 64
    max_updates: int = 300
    clip_norm: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or not (0.0 < self.gamma <= 1.0):
            raise ValueError("need learning_rate > 0 and gamma in (0, 1]")
        if self.value_coef < 0 or self.entropy_coef < 0 or self.batch_episodes < 1:
            raise ValueError("bad A2C config")


@dataclass
class TrainStats:
    update: int
    mean_reward: float
    policy_loss: float
    value_loss: float
    entropy: float
    grad_norm: float
    wall_clock: float

    def to_json(self) -> str:
        return json.dumps({
            "update": self.update,
            "mean_reward": self.mean_reward,
            "policy_loss": self.policy_loss,
            "value_loss": self.value_loss,
            "entropy": self.entropy,
            "grad_norm": self.grad_norm,
            "wall_clock": self.wall_clock,
        }, sort_keys=True)


def collect_batch(agent, env_agent, sampler, task_cfg: TaskConfig, cfg: A2CConfig,
                  update_idx: int):
    """Roll ``batch_episodes`` independent episodes with per-episode RNG
    streams derived from (seed, update index, episode index)."""
    out = []
    for ep in range(cfg.batch_episodes):
        rng = np.random.default_rng([cfg.seed, update_idx, ep])
        scenario, goal = sampler(rng)
        log, steps = run_episode(agent, env_agent, scenario, goal, task_cfg, rng,
                                 mode="sample", episode_id=f"u{update_idx}e{ep}")
        traj = []
        for act, step_reward, done in steps:
            traj.append(TrajectoryStep(
                state=act.state, action_index=act.action_index, logprob=act.logprob,
                value=act.value, reward=float(step_reward), done=done, extras=act.extras,
            ))
        out.append((traj, log))
    return out


def compute_returns_advantages(traj: list[TrajectoryStep], gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Discounted terminal-reward returns and value-baseline advantages."""
    if not traj or not traj[-1].done:
        raise UnterminatedTrajectoryError("trajectory must end in a terminal step")
    t_final = len(traj) - 1
    terminal = traj[-1].reward
    returns = np.array([terminal * gamma ** (t_final - t) for t in range(len(traj))])
    values = np.array([s.value for s in traj])
    return returns, returns - values


def a2c_loss_and_grads(agent, batch, cfg: A2CConfig):
    """Scalar loss plus summed gradients over every step in the batch.

    loss = -mean(logprob * stopgrad(adv)) + value_coef * mean((v - R)^2)
           - entropy_coef * mean(policy entropy)
    """
    if not batch:
        raise EmptyBatchError("empty rollout batch")
    steps = [(step, ret, adv)
             for traj, _ in batch
             for step, ret, adv in zip(traj, *compute_returns_advantages(traj, cfg.gamma))]
    n = len(steps)
    grads = None
    policy_loss = value_loss = ent_sum = 0.0
    for step, ret, adv in steps:
        ev = agent.step_eval(step.state, step.extras)
        probs = ev.probs
        c = step.action_index
        logp = float(np.log(max(probs[c], 1e-300)))
        h = entropy(probs)
        policy_loss += -logp * adv
        value_loss += (ev.value - ret) ** 2
        ent_sum += h
        # d(loss)/d(softmax input) for this step's three terms
        onehot = np.zeros_like(probs)
        onehot[c] = 1.0
        dlogits = (-adv) * (onehot - probs) / n
        dlogits += -cfg.entropy_coef * entropy_grad_wrt_logits(probs) / n
        dvalue = cfg.value_coef * 2.0 * (ev.value - ret) / n
        step_grads = ev.backward(dlogits, dvalue)
        if grads is None:
            grads = step_grads
        else:
            for key, g in step_grads.items():
                grads[key] += g
    policy_loss /= n
    value_loss /= n
    mean_entropy = ent_sum / n
    loss = policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * mean_entropy
    return loss, grads, policy_loss, value_loss, mean_entropy


def a2c_update(agent, batch, cfg: A2CConfig, update_idx: int = 0) -> TrainStats:
    """One clipped SGD step on the agent's trainable head, in place."""
    start = time.monotonic()
    _, grads, policy_loss, value_loss, mean_entropy = a2c_loss_and_grads(agent, batch, cfg)
    grad_norm = clip_grad_norm(grads, cfg.clip_norm)
    sgd_step(agent.trainable_params(), grads, cfg.learning_rate)
    rewards = [log.reward for _, log in batch]
    return TrainStats(
        update=update_idx,
        mean_reward=float(np.mean(rewards)),
        policy_loss=float(policy_loss),
        value_loss=float(value_loss),
        entropy=float(mean_entropy),
        grad_norm=float(grad_norm),
        wall_clock=time.monotonic() - start,
    )


def make_task_sampler(logs, goal_type):
    """Uniform pick of a source episode, then a goal sampled from it.

    Episodes without a qualifying env action are skipped at construction.
    """
    from .task import NoGoalAvailableError, sample_goal

    usable = []
    for log in logs:
        try:
            sample_goal(log, np.random.default_rng(0), goal_type)
        except NoGoalAvailableError:
            continue
        usable.append(log)
    if not usable:
        raise EmptyBatchError(f"no episodes with {goal_type.value} goals")

    def sampler(rng: np.random.Generator) -> tuple[Scenario, Goal]:
        log = usable[int(rng.integers(len(usable)))]
        from .task import sample_goal as sg

        return sg(log, rng, goal_type)

    return sampler


def train_rl(agent, env_agent, sampler, task_cfg: TaskConfig, cfg: A2CConfig,
             metrics_path: str | Path | None = None, log_every: int = 0) -> list[TrainStats]:
    """Full synchronous A2C loop; optionally appends TrainStats as JSONL."""
    history: list[TrainStats] = []
    sink = open(metrics_path, "w") if metrics_path else None
    try:
        for update in range(cfg.max_updates):
            batch = collect_batch(agent, env_agent, sampler, task_cfg, cfg, update)
            stats = a2c_update(agent, batch, cfg, update)
            history.append(stats)
            if sink:
                sink.write(stats.to_json() + "\n")
            if log_every and (update + 1) % log_every == 0:
                recent = history[-log_every:]
                print(f"update {update + 1}/{cfg.max_updates} "
                      f"reward {np.mean([s.mean_reward for s in recent]):.3f} "
                      f"entropy {recent[-1].entropy:.3f}")
    finally:
        if sink:
            sink.close()
    return history
