"""Graph game engine: entities, containment, constrained actions, emotes.

A world is a typed node store (locations, characters, objects) plus a
containment forest rooted at locations and a symmetric path relation
between locations.  Actions are checked against per-verb constraint rows
and applied as pure updates that return a new world value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum


class Kind(str, Enum):
    LOCATION = "location"
    CHARACTER = "character"
    OBJECT = "object"


class PropertyFlag(str, Enum):
    GETTABLE = "gettable"
    SURFACE = "surface"
    CONTAINER = "container"
    DRINK = "drink"
    FOOD = "food"
    WEARABLE = "wearable"
    WEAPON = "weapon"


class Mode(str, Enum):
    IN_ROOM = "in_room"
    CARRIED_BY = "carried_by"
    INSIDE_OF = "inside_of"
    ON_SURFACE_OF = "on_surface_of"
    WORN_BY = "worn_by"
    WIELDED_BY = "wielded_by"


# Modes that count as "object is a member of" a character.
MEMBER_MODES = frozenset({Mode.CARRIED_BY, Mode.WORN_BY, Mode.WIELDED_BY})

# The closed set of 22 emote kinds.
EMOTES = (
    "laugh", "smile", "ponder", "frown", "nod", "sigh", "grin", "gasp",
    "shrug", "stare", "scream", "cry", "growl", "blush", "dance", "applaud",
    "wave", "groan", "nudge", "wink", "yawn", "pout",
)
EMOTE_SET = frozenset(EMOTES)


class Verb(str, Enum):
    GET = "get"
    DROP = "drop"
    GET_FROM = "get_from"
    PUT_IN = "put_in"
    GIVE = "give"
    STEAL = "steal"
    HIT = "hit"
    HUG = "hug"
    DRINK = "drink"
    EAT = "eat"
    WEAR = "wear"
    WIELD = "wield"
    REMOVE = "remove"
    EMOTE = "emote"


VERB_ARITY = {
    Verb.GET: 1, Verb.DROP: 1, Verb.GET_FROM: 2, Verb.PUT_IN: 2,
    Verb.GIVE: 2, Verb.STEAL: 2, Verb.HIT: 1, Verb.HUG: 1,
    Verb.DRINK: 1, Verb.EAT: 1, Verb.WEAR: 1, Verb.WIELD: 1,
    Verb.REMOVE: 1, Verb.EMOTE: 0,
}

_VERB_ORDER = {v: i for i, v in enumerate(Verb)}
_EMOTE_ORDER = {e: i for i, e in enumerate(EMOTES)}


class UnknownEntityError(KeyError):
    """An action or query referenced an id absent from the world."""


class ConstraintViolationError(RuntimeError):
    """apply_action was called on an action whose constraints do not hold."""


@dataclass(frozen=True)
class Entity:
    id: str
    kind: Kind
    name: str
    description: str = ""
    properties: frozenset[PropertyFlag] = field(default_factory=frozenset)


@dataclass(frozen=True)
class Containment:
    holder: str
    mode: Mode


@dataclass(frozen=True)
class GameAction:
    """Canonical structured action: a verb plus entity args, or an emote."""

    verb: Verb
    args: tuple[str, ...] = ()
    emote: str | None = None

    def __post_init__(self) -> None:
        if len(self.args) != VERB_ARITY[self.verb]:
            raise ValueError(f"{self.verb.value} takes {VERB_ARITY[self.verb]} args, got {len(self.args)}")
        if self.verb is Verb.EMOTE:
            if self.emote not in EMOTE_SET:
                raise ValueError(f"unknown emote {self.emote!r}")
        elif self.emote is not None:
            raise ValueError("emote kind only valid with the emote verb")

    def sort_key(self) -> tuple:
        if self.verb is Verb.EMOTE:
            return (_VERB_ORDER[self.verb], _EMOTE_ORDER[self.emote])
        return (_VERB_ORDER[self.verb],) + self.args


@dataclass(frozen=True)
class ConstraintResult:
    failed: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failed


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class WorldGraph:
    """Immutable world value; actions produce updated copies."""

    entities: dict[str, Entity]
    containment: dict[str, Containment]
    paths: frozenset[frozenset[str]] = frozenset()

    def entity(self, eid: str) -> Entity:
        try:
            return self.entities[eid]
        except KeyError:
            raise UnknownEntityError(eid) from None

    def room_of(self, eid: str) -> str:
        """Root location of the containment chain starting at eid."""
        self.entity(eid)
        seen = set()
        cur = eid
        while self.entities[cur].kind is not Kind.LOCATION:
            if cur in seen:
                raise ConstraintViolationError(f"containment cycle at {cur}")
            seen.add(cur)
            state = self.containment.get(cur)
            if state is None or state.holder not in self.entities:
                raise UnknownEntityError(f"no valid holder for {cur}")
            cur = state.holder
        return cur

    def holder_chain(self, eid: str) -> list[str]:
        """Holders of eid from immediate holder up to the root location."""
        chain = []
        cur = eid
        seen = {eid}
        while self.entities[cur].kind is not Kind.LOCATION:
            state = self.containment.get(cur)
            if state is None or state.holder not in self.entities:
                break
            cur = state.holder
            if cur in seen:
                break
            seen.add(cur)
            chain.append(cur)
        return chain

    def colocated(self, actor: str) -> list[str]:
        """Ids (sorted) of non-location entities rooted in the actor's room."""
        room = self.room_of(actor)
        out = []
        for eid, ent in self.entities.items():
            if ent.kind is Kind.LOCATION:
                continue
            try:
                if self.room_of(eid) == room:
                    out.append(eid)
            except (UnknownEntityError, ConstraintViolationError):
                continue
        return sorted(out)

    def with_containment(self, eid: str, state: Containment) -> "WorldGraph":
        containment = dict(self.containment)
        containment[eid] = state
        return replace(self, containment=containment)


def validate_world(w: WorldGraph) -> ValidationReport:
    """Check every structural invariant; violations are data, not faults."""
    v: list[str] = []
    for eid, ent in w.entities.items():
        if ent.kind is not Kind.OBJECT and ent.properties:
            v.append(f"{eid}: only objects may carry property flags")
        if ent.kind is Kind.LOCATION:
            if eid in w.containment:
                v.append(f"{eid}: locations must not have containment state")
            continue
        state = w.containment.get(eid)
        if state is None:
            v.append(f"{eid}: non-location entity has no containment state")
            continue
        if state.holder not in w.entities:
            v.append(f"{eid}: holder {state.holder} is not a known entity")
            continue
        if state.holder == eid:
            v.append(f"{eid}: entity holds itself")
        holder = w.entities[state.holder]
        if ent.kind is Kind.CHARACTER and state.mode is not Mode.IN_ROOM:
            v.append(f"{eid}: characters may only be in a room")
        if state.mode is Mode.IN_ROOM and holder.kind is not Kind.LOCATION:
            v.append(f"{eid}: in_room holder {state.holder} is not a location")
        if state.mode in MEMBER_MODES and holder.kind is not Kind.CHARACTER:
            v.append(f"{eid}: {state.mode.value} holder {state.holder} is not a character")
        if state.mode is Mode.INSIDE_OF and PropertyFlag.CONTAINER not in holder.properties:
            v.append(f"{eid}: inside_of requires container holder ({state.holder})")
        if state.mode is Mode.ON_SURFACE_OF and PropertyFlag.SURFACE not in holder.properties:
            v.append(f"{eid}: on_surface_of requires surface holder ({state.holder})")
        if state.mode is Mode.WORN_BY and PropertyFlag.WEARABLE not in ent.properties:
            v.append(f"{eid}: worn_by requires the wearable flag")
        if state.mode is Mode.WIELDED_BY and PropertyFlag.WEAPON not in ent.properties:
            v.append(f"{eid}: wielded_by requires the weapon flag")
    for eid in w.containment:
        if eid not in w.entities:
            v.append(f"{eid}: containment entry for unknown entity")
    # Cycle scan over the holder relation.
    reported: set[frozenset[str]] = set()
    for eid in w.containment:
        if eid not in w.entities:
            continue
        trail: list[str] = []
        seen: dict[str, int] = {}
        cur = eid
        while cur in w.containment and cur in w.entities:
            if cur in seen:
                cycle = frozenset(trail[seen[cur]:])
                if cycle not in reported:
                    reported.add(cycle)
                    v.append("containment cycle: " + " -> ".join(trail[seen[cur]:] + [cur]))
                break
            seen[cur] = len(trail)
            trail.append(cur)
            nxt = w.containment[cur].holder
            if nxt not in w.entities:
                break
            cur = nxt
    for pair in w.paths:
        for eid in pair:
            if eid not in w.entities:
                v.append(f"path endpoint {eid} is not a known entity")
            elif w.entities[eid].kind is not Kind.LOCATION:
                v.append(f"path endpoint {eid} is not a location")
    return ValidationReport(tuple(v))


def _is_member_of(w: WorldGraph, obj: str, character: str) -> bool:
    state = w.containment.get(obj)
    return state is not None and state.holder == character and state.mode in MEMBER_MODES


def _is_carrying(w: WorldGraph, character: str, obj: str) -> bool:
    state = w.containment.get(obj)
    return state is not None and state.holder == character and state.mode is Mode.CARRIED_BY


def _same_room(w: WorldGraph, a: str, b: str) -> bool:
    try:
        return w.room_of(a) == w.room_of(b)
    except (UnknownEntityError, ConstraintViolationError):
        return False


def _directly_in_room(w: WorldGraph, obj: str, room: str) -> bool:
    state = w.containment.get(obj)
    return state is not None and state.mode is Mode.IN_ROOM and state.holder == room


def check_action(w: WorldGraph, actor: str, a: GameAction) -> ConstraintResult:
    """Evaluate every constraint row for the verb; pure, world unchanged."""
    actor_ent = w.entity(actor)
    if actor_ent.kind is not Kind.CHARACTER:
        raise ValueError(f"actor {actor} is not a character")
    for arg in a.args:
        w.entity(arg)
    if a.verb is Verb.EMOTE:
        return ConstraintResult()

    failed: list[str] = []

    def need(cond: bool, name: str) -> None:
        if not cond:
            failed.append(name)

    ents = [w.entities[arg] for arg in a.args]
    room = w.room_of(actor)

    if a.verb is Verb.GET:
        (obj,), (ent,) = a.args, ents
        need(ent.kind is Kind.OBJECT, "object is an object")
        need(_directly_in_room(w, obj, room), "actor and object in same room")
        need(PropertyFlag.GETTABLE in ent.properties, "object is gettable")
    elif a.verb is Verb.DROP:
        (obj,), (ent,) = a.args, ents
        need(ent.kind is Kind.OBJECT, "object is an object")
        need(_is_carrying(w, actor, obj), "actor is carrying object")
        need(PropertyFlag.GETTABLE in ent.properties, "object is gettable")
    elif a.verb is Verb.GET_FROM:
        (o1, o2), (e1, e2) = a.args, ents
        need(e1.kind is Kind.OBJECT, "object1 is an object")
        need(e2.kind is Kind.OBJECT, "object2 is an object")
        need(o1 != o2, "object1 is not object2")
        need(e2.kind is Kind.OBJECT and _same_room(w, actor, o2), "actor and object2 in same room")
        need(PropertyFlag.GETTABLE in e1.properties, "object1 is gettable")
        need(
            PropertyFlag.SURFACE in e2.properties or PropertyFlag.CONTAINER in e2.properties,
            "object2 is surface or container",
        )
        state = w.containment.get(o1)
        need(
            state is not None
            and state.holder == o2
            and state.mode in (Mode.INSIDE_OF, Mode.ON_SURFACE_OF),
            "object2 is carrying object1",
        )
    elif a.verb is Verb.PUT_IN:
        (o1, o2), (e1, e2) = a.args, ents
        need(e1.kind is Kind.OBJECT, "object1 is an object")
        need(e2.kind is Kind.OBJECT, "object2 is an object")
        need(o1 != o2, "object1 is not object2")
        need(e2.kind is Kind.OBJECT and _same_room(w, actor, o2), "actor and object2 in same room")
        need(
            PropertyFlag.CONTAINER in e2.properties or PropertyFlag.SURFACE in e2.properties,
            "object2 is container or surface",
        )
        need(_is_carrying(w, actor, o1), "actor is carrying object1")
        # Forest invariant: o2 must not sit anywhere inside o1.
        need(o1 not in w.holder_chain(o2), "object2 is not contained in object1")
    elif a.verb in (Verb.GIVE, Verb.STEAL):
        (obj, agent), (obj_ent, agent_ent) = a.args, ents
        need(obj_ent.kind is Kind.OBJECT, "object is an object")
        need(agent_ent.kind is Kind.CHARACTER, "agent is a character")
        need(agent != actor, "agent is not actor")
        need(agent_ent.kind is Kind.CHARACTER and _same_room(w, actor, agent), "actor and agent in same room")
        if a.verb is Verb.GIVE:
            need(_is_member_of(w, obj, actor), "object is a member of actor")
        else:
            need(_is_member_of(w, obj, agent), "object is a member of agent")
    elif a.verb in (Verb.HIT, Verb.HUG):
        (agent,), (agent_ent,) = a.args, ents
        need(agent_ent.kind is Kind.CHARACTER, "agent is a character")
        need(agent != actor, "agent is not actor")
        need(agent_ent.kind is Kind.CHARACTER and _same_room(w, actor, agent), "actor and agent in same room")
    elif a.verb is Verb.DRINK:
        (obj,), (ent,) = a.args, ents
        need(ent.kind is Kind.OBJECT, "object is an object")
        need(_is_carrying(w, actor, obj), "actor is carrying object")
        need(PropertyFlag.DRINK in ent.properties, "object is a drink")
    elif a.verb is Verb.EAT:
        (obj,), (ent,) = a.args, ents
        need(ent.kind is Kind.OBJECT, "object is an object")
        need(_is_carrying(w, actor, obj), "actor is carrying object")
        need(PropertyFlag.FOOD in ent.properties, "object is a food")
    elif a.verb is Verb.WEAR:
        (obj,), (ent,) = a.args, ents
        need(ent.kind is Kind.OBJECT, "object is an object")
        need(_is_carrying(w, actor, obj), "actor is carrying object")
        need(PropertyFlag.WEARABLE in ent.properties, "object is wearable")
    elif a.verb is Verb.WIELD:
        (obj,), (ent,) = a.args, ents
        need(ent.kind is Kind.OBJECT, "object is an object")
        need(_is_carrying(w, actor, obj), "actor is carrying object")
        need(PropertyFlag.WEAPON in ent.properties, "object is a weapon")
    elif a.verb is Verb.REMOVE:
        (obj,), (ent,) = a.args, ents
        need(ent.kind is Kind.OBJECT, "object is an object")
        state = w.containment.get(obj)
        need(
            state is not None
            and state.holder == actor
            and state.mode in (Mode.WORN_BY, Mode.WIELDED_BY),
            "actor is wearing/wielding object",
        )
        need(
            PropertyFlag.WEARABLE in ent.properties or PropertyFlag.WEAPON in ent.properties,
            "object is wearable or a weapon",
        )
    else:  # pragma: no cover - exhaustive over verbs
        raise AssertionError(a.verb)
    return ConstraintResult(tuple(failed))


def apply_action(w: WorldGraph, actor: str, a: GameAction) -> tuple[WorldGraph, str]:
    """Apply the outcome row for an admissible action, returning a new world."""
    result = check_action(w, actor, a)
    if not result.ok:
        raise ConstraintViolationError(f"{a.verb.value}: failed {list(result.failed)}")

    name = lambda eid: w.entities[eid].name  # noqa: E731

    if a.verb is Verb.EMOTE:
        return w, f"{name(actor)} emotes: {a.emote}"
    if a.verb in (Verb.GET, Verb.GET_FROM, Verb.STEAL):
        obj = a.args[0]
        return (
            w.with_containment(obj, Containment(actor, Mode.CARRIED_BY)),
            f"{name(actor)} is carrying {name(obj)}",
        )
    if a.verb is Verb.DROP:
        obj = a.args[0]
        room = w.room_of(actor)
        return w.with_containment(obj, Containment(room, Mode.IN_ROOM)), f"{name(obj)} is in room"
    if a.verb is Verb.PUT_IN:
        o1, o2 = a.args
        mode = Mode.INSIDE_OF if PropertyFlag.CONTAINER in w.entities[o2].properties else Mode.ON_SURFACE_OF
        return w.with_containment(o1, Containment(o2, mode)), f"{name(o2)} is carrying {name(o1)}"
    if a.verb is Verb.GIVE:
        obj, agent = a.args
        return (
            w.with_containment(obj, Containment(agent, Mode.CARRIED_BY)),
            f"{name(agent)} is carrying {name(obj)}",
        )
    if a.verb is Verb.HIT:
        return w, f"inform {name(a.args[0])} of attack"
    if a.verb is Verb.HUG:
        return w, f"inform {name(a.args[0])} of hug"
    if a.verb is Verb.DRINK:
        return w, f"inform {name(actor)} of drinking successfully"
    if a.verb is Verb.EAT:
        return w, f"inform {name(actor)} of eating successfully"
    if a.verb is Verb.WEAR:
        obj = a.args[0]
        return w.with_containment(obj, Containment(actor, Mode.WORN_BY)), f"{name(actor)} is wearing {name(obj)}"
    if a.verb is Verb.WIELD:
        obj = a.args[0]
        return w.with_containment(obj, Containment(actor, Mode.WIELDED_BY)), f"{name(actor)} is wielding {name(obj)}"
    if a.verb is Verb.REMOVE:
        obj = a.args[0]
        return w.with_containment(obj, Containment(actor, Mode.CARRIED_BY)), f"{name(actor)} is carrying {name(obj)}"
    raise AssertionError(a.verb)  # pragma: no cover


# Which entity kinds each verb's arg slots accept, used to enumerate candidates.
_SLOT_KINDS = {
    Verb.GET: (Kind.OBJECT,),
    Verb.DROP: (Kind.OBJECT,),
    Verb.GET_FROM: (Kind.OBJECT, Kind.OBJECT),
    Verb.PUT_IN: (Kind.OBJECT, Kind.OBJECT),
    Verb.GIVE: (Kind.OBJECT, Kind.CHARACTER),
    Verb.STEAL: (Kind.OBJECT, Kind.CHARACTER),
    Verb.HIT: (Kind.CHARACTER,),
    Verb.HUG: (Kind.CHARACTER,),
    Verb.DRINK: (Kind.OBJECT,),
    Verb.EAT: (Kind.OBJECT,),
    Verb.WEAR: (Kind.OBJECT,),
    Verb.WIELD: (Kind.OBJECT,),
    Verb.REMOVE: (Kind.OBJECT,),
}


def enumerate_admissible(w: WorldGraph, actor: str) -> list[GameAction]:
    """All satisfiable game actions over co-located entities, plus all emotes.

    Order is part of the contract: verbs in declaration order, args in
    ascending id order, then the 22 emotes in their fixed order.
    """
    pool = [eid for eid in w.colocated(actor) if eid != actor]
    by_kind = {
        Kind.OBJECT: [e for e in pool if w.entities[e].kind is Kind.OBJECT],
        Kind.CHARACTER: [e for e in pool if w.entities[e].kind is Kind.CHARACTER],
    }
    out: list[GameAction] = []
    for verb, slots in _SLOT_KINDS.items():
        pools = [by_kind[k] for k in slots]
        for args in itertools.product(*pools):
            if len(args) == 2 and args[0] == args[1]:
                continue
            action = GameAction(verb, tuple(args))
            if check_action(w, actor, action).ok:
                out.append(action)
    out.extend(GameAction(Verb.EMOTE, (), emote=e) for e in EMOTES)
    return out
