"""Surface grammar between action text and structured actions.

Canonical forms are lowercase "verb name [preposition name]" strings.
Entity names are resolved against the actor's room and inventory; an
ambiguous or unresolvable name is a parse error, never a silent guess.
"""

from __future__ import annotations

import re

from .world import (
    EMOTE_SET,
    GameAction,
    Kind,
    Mode,
    PropertyFlag,
    UnknownEntityError,
    Verb,
    WorldGraph,
)


class ParseError(ValueError):
    def __init__(self, message: str, candidates: list[str] | None = None):
        super().__init__(message)
        self.candidates = candidates or []


_WS = re.compile(r"\s+")


def _norm(s: str) -> str:
    return _WS.sub(" ", s.strip().lower())


def render_action_text(a: GameAction, w: WorldGraph) -> str:
    """Lowercase canonical surface form of an action within a world."""
    if a.verb is Verb.EMOTE:
        return a.emote
    names = []
    for arg in a.args:
        names.append(_norm(w.entity(arg).name))
    if a.verb is Verb.GET:
        return f"get {names[0]}"
    if a.verb is Verb.DROP:
        return f"drop {names[0]}"
    if a.verb is Verb.GET_FROM:
        return f"get {names[0]} from {names[1]}"
    if a.verb is Verb.PUT_IN:
        prep = "in" if PropertyFlag.CONTAINER in w.entities[a.args[1]].properties else "on"
        return f"put {names[0]} {prep} {names[1]}"
    if a.verb is Verb.GIVE:
        return f"give {names[0]} to {names[1]}"
    if a.verb is Verb.STEAL:
        return f"steal {names[0]} from {names[1]}"
    return f"{a.verb.value} {names[0]}"


def _resolution_scope(w: WorldGraph, actor: str) -> dict[str, list[str]]:
    scope: dict[str, list[str]] = {}
    for eid in w.colocated(actor):
        if eid == actor:
            continue
        scope.setdefault(_norm(w.entities[eid].name), []).append(eid)
    return scope


def _resolve(scope: dict[str, list[str]], name: str, kind_hint: str) -> str:
    matches = scope.get(name, [])
    if not matches:
        raise ParseError(f"cannot resolve {kind_hint} {name!r}")
    if len(matches) > 1:
        raise ParseError(f"ambiguous {kind_hint} {name!r}", candidates=sorted(matches))
    return matches[0]


def _split_on(rest: str, preps: tuple[str, ...]) -> list[tuple[str, str]]:
    """Candidate (left, right) splits, rightmost preposition first."""
    words = rest.split(" ")
    splits = []
    for i in range(len(words) - 1, 0, -1):
        if words[i] in preps and 0 < i < len(words) - 1:
            splits.append((" ".join(words[:i]), " ".join(words[i + 1:])))
    return splits


def parse_action_text(s: str, w: WorldGraph, actor: str) -> GameAction:
    """Parse a canonical command against the actor's current scope."""
    text = _norm(s)
    if not text:
        raise ParseError("empty command")
    if text in EMOTE_SET:
        return GameAction(Verb.EMOTE, (), emote=text)
    head, _, rest = text.partition(" ")
    scope = _resolution_scope(w, actor)

    def one(verb: Verb, kind_hint: str = "object") -> GameAction:
        if not rest:
            raise ParseError(f"{verb.value}: missing argument")
        return GameAction(verb, (_resolve(scope, rest, kind_hint),))

    def two(verb: Verb, preps: tuple[str, ...], hints: tuple[str, str]) -> GameAction:
        if not rest:
            raise ParseError(f"{verb.value}: missing argument")
        splits = _split_on(rest, preps)
        if not splits:
            raise ParseError(f"{verb.value}: expected '{preps[0]}' between two names")
        errors: list[ParseError] = []
        for left, right in splits:
            try:
                return GameAction(verb, (_resolve(scope, left, hints[0]), _resolve(scope, right, hints[1])))
            except ParseError as e:
                errors.append(e)
        raise errors[0]

    if head == "get":
        # Longest-match: a plain name wins over a "... from ..." split.
        if rest and rest in scope:
            return one(Verb.GET)
        if " from " in f" {rest} ":
            return two(Verb.GET_FROM, ("from",), ("object", "object"))
        return one(Verb.GET)
    if head == "drop":
        return one(Verb.DROP)
    if head == "put":
        return two(Verb.PUT_IN, ("in", "on"), ("object", "object"))
    if head == "give":
        return two(Verb.GIVE, ("to",), ("object", "character"))
    if head == "steal":
        return two(Verb.STEAL, ("from",), ("object", "character"))
    if head == "hit":
        return one(Verb.HIT, "character")
    if head == "hug":
        return one(Verb.HUG, "character")
    if head in ("drink", "eat", "wear", "wield", "remove"):
        return one(Verb(head))
    raise ParseError(f"unknown verb {head!r}")


def action_text_pairs(w: WorldGraph, actor: str, actions) -> list[tuple[GameAction, str]]:
    """Render a list of actions once, preserving order."""
    return [(a, render_action_text(a, w)) for a in actions]
