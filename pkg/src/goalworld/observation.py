"""Observation flattening: structured context to a token sequence.

Each structured component is introduced by a reserved separator token.
Separator tokens contain underscores, which the content tokenizer never
emits, so the two vocabularies cannot collide.  Only the speaker's own
persona is flattened; the partner contributes just a name.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

SEP_SETTING_NAME = "_setting_name_"
SEP_SETTING_DESC = "_setting_desc_"
SEP_PARTNER_NAME = "_partner_name_"
SEP_SELF_NAME = "_self_name_"
SEP_SELF_PERSONA = "_self_persona_"
SEP_GOAL = "_goal_"
SEP_PARTNER_SAY = "_partner_say_"
SEP_PARTNER_ACT = "_partner_act_"
SEP_SELF_SAY = "_self_say_"
SEP_SELF_ACT = "_self_act_"

HEADER_SEPARATORS = (
    SEP_SETTING_NAME, SEP_SETTING_DESC, SEP_PARTNER_NAME,
    SEP_SELF_NAME, SEP_SELF_PERSONA,
)

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def topic_token(c: int) -> str:
    return f"_topic_{c}_"


class Speaker(str, Enum):
    PLAYER = "player"
    ENV = "env"


@dataclass(frozen=True)
class ObservationView:
    """One agent's private view of a scenario."""

    setting_name: str
    setting_desc: str
    self_name: str
    self_persona: str
    partner_name: str
    self_side: Speaker


def flatten_observation(view: ObservationView, history, goal_text: str | None = None) -> list[str]:
    """Deterministic token sequence for (view, history, optional goal).

    The goal segment is emitted only when a goal is supplied, so
    goal-conditioned and goal-free models read different sequences.
    History is oldest-first; each turn contributes a say segment and,
    for acting turns, an act segment holding the rendered action.
    """
    tokens = [SEP_SETTING_NAME, *tokenize(view.setting_name)]
    tokens += [SEP_SETTING_DESC, *tokenize(view.setting_desc)]
    tokens += [SEP_PARTNER_NAME, *tokenize(view.partner_name)]
    tokens += [SEP_SELF_NAME, *tokenize(view.self_name)]
    tokens += [SEP_SELF_PERSONA, *tokenize(view.self_persona)]
    if goal_text is not None:
        tokens += [SEP_GOAL, *tokenize(goal_text)]
    for event in history:
        own = event.speaker is view.self_side
        tokens += [SEP_SELF_SAY if own else SEP_PARTNER_SAY, *tokenize(event.utterance)]
        if event.action_text is not None:
            tokens += [SEP_SELF_ACT if own else SEP_PARTNER_ACT, *tokenize(event.action_text)]
    return tokens
