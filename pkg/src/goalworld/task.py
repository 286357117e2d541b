"""Scenario and episode layer: goals, the MDP step loop, terminal reward.

One episode pits a speaking-only player agent against an environment
agent that also takes game actions.  The player is rewarded once, at the
turn where the environment agent's action equals the goal.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .grammar import render_action_text
from .observation import ObservationView, Speaker, flatten_observation
from .world import (
    ConstraintViolationError,
    GameAction,
    Verb,
    WorldGraph,
    apply_action,
    enumerate_admissible,
)


class GoalType(str, Enum):
    GAME_ACT = "act"
    EMOTE = "emote"


class NoGoalAvailableError(LookupError):
    """The source episode has no environment action of the requested type."""


class EnvAgentFault(RuntimeError):
    """The environment agent chose an action outside the admissible set."""


class EpisodeDoneError(RuntimeError):
    """step() was called on a finished episode."""


@dataclass(frozen=True)
class CharacterRef:
    id: str
    name: str
    persona: str


@dataclass(frozen=True)
class Scenario:
    world: WorldGraph
    setting_name: str
    setting_desc: str
    player: CharacterRef
    env_char: CharacterRef
    world_id: str = ""

    def player_view(self) -> ObservationView:
        return ObservationView(
            setting_name=self.setting_name,
            setting_desc=self.setting_desc,
            self_name=self.player.name,
            self_persona=self.player.persona,
            partner_name=self.env_char.name,
            self_side=Speaker.PLAYER,
        )

    def env_view(self) -> ObservationView:
        return ObservationView(
            setting_name=self.setting_name,
            setting_desc=self.setting_desc,
            self_name=self.env_char.name,
            self_persona=self.env_char.persona,
            partner_name=self.player.name,
            self_side=Speaker.ENV,
        )

    def swapped_roles(self) -> "Scenario":
        return replace(self, player=self.env_char, env_char=self.player)


@dataclass(frozen=True)
class Goal:
    target: GameAction
    goal_type: GoalType
    text: str

    @staticmethod
    def from_action(action: GameAction, world: WorldGraph) -> "Goal":
        goal_type = GoalType.EMOTE if action.verb is Verb.EMOTE else GoalType.GAME_ACT
        return Goal(target=action, goal_type=goal_type, text=render_action_text(action, world))


@dataclass(frozen=True)
class TurnEvent:
    speaker: Speaker
    utterance: str
    action: GameAction | None = None
    action_text: str | None = None

    def __post_init__(self) -> None:
        if self.speaker is Speaker.PLAYER and self.action is not None:
            raise ValueError("the player only speaks, it does not act")
        if (self.action is None) != (self.action_text is None):
            raise ValueError("action and action_text must be set together")


@dataclass
class EpisodeLog:
    episode_id: str
    scenario: Scenario
    turns: list[TurnEvent]
    goal: Goal | None = None
    reward: int = 0
    turns_used: int = 0


@dataclass(frozen=True)
class TaskConfig:
    n: int = 1
    goal_type: GoalType = GoalType.GAME_ACT
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("horizon must be >= 1")


def _matches_type(action: GameAction, goal_type: GoalType) -> bool:
    if goal_type is GoalType.EMOTE:
        return action.verb is Verb.EMOTE
    return action.verb is not Verb.EMOTE


def sample_goal(log: EpisodeLog, rng: np.random.Generator, goal_type: GoalType) -> tuple[Scenario, Goal]:
    """Random role assignment plus a uniform pick among the env side's actions.

    If the first role draw leaves the environment side with no action of
    the requested type, the swapped assignment is tried before giving up.
    """
    scenario = log.scenario if rng.random() < 0.5 else log.scenario.swapped_roles()
    for candidate in (scenario, scenario.swapped_roles()):
        env_name = candidate.env_char.id
        actions = [
            ev.action for ev in log.turns
            if ev.action is not None
            and _speaker_char(log, ev) == env_name
            and _matches_type(ev.action, goal_type)
        ]
        if actions:
            target = actions[int(rng.integers(len(actions)))]
            return candidate, Goal.from_action(target, candidate.world)
    raise NoGoalAvailableError(f"no {goal_type.value} action in episode {log.episode_id}")


def _speaker_char(log: EpisodeLog, event: TurnEvent) -> str:
    side = log.scenario.player if event.speaker is Speaker.PLAYER else log.scenario.env_char
    return side.id


@dataclass
class EpisodeEnv:
    """Mutable rollout state for one episode against a fixed env agent."""

    scenario: Scenario
    goal: Goal
    env_agent: object
    n: int
    world: WorldGraph = None
    history: list[TurnEvent] = field(default_factory=list)
    turns_used: int = 0
    reward: int = 0
    done: bool = False

    def __post_init__(self) -> None:
        if self.world is None:
            self.world = self.scenario.world

    def player_obs(self, include_goal: bool = True) -> list[str]:
        goal_text = self.goal.text if include_goal else None
        return flatten_observation(self.scenario.player_view(), self.history, goal_text)

    def env_obs(self) -> list[str]:
        return flatten_observation(self.scenario.env_view(), self.history, None)

    def step(self, player_utterance: str) -> tuple[TurnEvent, int, bool]:
        """Advance one turn: player speaks, env replies and may act."""
        if self.done:
            raise EpisodeDoneError("episode already finished")
        self.history.append(TurnEvent(Speaker.PLAYER, player_utterance))
        admissible = enumerate_admissible(self.world, self.scenario.env_char.id)
        utterance, action = self.env_agent.respond(
            self.env_obs(), self.world, self.scenario.env_char.id, admissible, player_utterance)
        action_text = None
        if action is not None:
            if action not in admissible:
                raise EnvAgentFault(f"env agent chose inadmissible action {action}")
            action_text = render_action_text(action, self.world)
            try:
                self.world, _ = apply_action(self.world, self.scenario.env_char.id, action)
            except ConstraintViolationError as e:  # pragma: no cover - guarded above
                raise EnvAgentFault(str(e)) from e
        event = TurnEvent(Speaker.ENV, utterance, action, action_text)
        self.history.append(event)
        self.turns_used += 1
        step_reward = 0
        if action is not None and action == self.goal.target:
            step_reward = 1
            self.reward = 1
            self.done = True
        if self.turns_used >= self.n:
            self.done = True
        return event, step_reward, self.done

    def to_log(self, episode_id: str = "") -> EpisodeLog:
        return EpisodeLog(
            episode_id=episode_id,
            scenario=self.scenario,
            turns=list(self.history),
            goal=self.goal,
            reward=self.reward,
            turns_used=self.turns_used,
        )


@dataclass(frozen=True)
class PolicyAction:
    """What a player policy produced for one turn."""

    utterance: str
    action_index: int = -1
    logprob: float = 0.0
    value: float = 0.0
    state: np.ndarray | None = None
    extras: dict | None = None


def run_episode(policy, env_agent, scenario: Scenario, goal: Goal, cfg: TaskConfig,
                rng: np.random.Generator, mode: str = "sample",
                episode_id: str = "") -> tuple[EpisodeLog, list]:
    """Roll one full episode; returns the log and the policy-step records."""
    env = EpisodeEnv(scenario=scenario, goal=goal, env_agent=env_agent, n=cfg.n)
    steps = []
    while not env.done:
        obs = env.player_obs(include_goal=getattr(policy, "goal_conditioned", True))
        act = policy.act(obs, rng, mode)
        _, step_reward, done = env.step(act.utterance)
        steps.append((act, step_reward, done))
    return env.to_log(episode_id), steps
