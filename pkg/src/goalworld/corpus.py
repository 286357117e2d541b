"""Synthetic corpus generation in the episode-log schema.

Scripted two-character episodes in small fantasy worlds.  The acting
side's game actions correlate with templated trigger utterances from the
speaking side, so goal-conditioned behaviour is learnable from the logs.
Splits mirror the seen/unseen convention: valid and test_seen reuse the
training worlds with fresh episodes, test_unseen uses held-out worlds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grammar import render_action_text
from .observation import Speaker
from .task import CharacterRef, EpisodeLog, Goal, GoalType, Scenario, TurnEvent
from .world import (
    EMOTES,
    Containment,
    Entity,
    GameAction,
    Kind,
    Mode,
    PropertyFlag,
    Verb,
    WorldGraph,
    apply_action,
    enumerate_admissible,
)
from .worldfiles import slugify


class ConfigError(ValueError):
    pass


# --- fantasy vocabulary ----------------------------------------------------

P = PropertyFlag
OBJECT_CATALOG: list[tuple[str, tuple[PropertyFlag, ...]]] = [
    ("apple", (P.GETTABLE, P.FOOD)),
    ("bread", (P.GETTABLE, P.FOOD)),
    ("cheese", (P.GETTABLE, P.FOOD)),
    ("stew", (P.GETTABLE, P.FOOD)),
    ("mead", (P.GETTABLE, P.DRINK)),
    ("ale", (P.GETTABLE, P.DRINK)),
    ("potion", (P.GETTABLE, P.DRINK)),
    ("sword", (P.GETTABLE, P.WEAPON)),
    ("dagger", (P.GETTABLE, P.WEAPON)),
    ("axe", (P.GETTABLE, P.WEAPON)),
    ("club", (P.GETTABLE, P.WEAPON)),
    ("cloak", (P.GETTABLE, P.WEARABLE)),
    ("helmet", (P.GETTABLE, P.WEARABLE)),
    ("boots", (P.GETTABLE, P.WEARABLE)),
    ("crown", (P.GETTABLE, P.WEARABLE)),
    ("coin", (P.GETTABLE,)),
    ("lantern", (P.GETTABLE,)),
    ("rope", (P.GETTABLE,)),
    ("key", (P.GETTABLE,)),
    ("book", (P.GETTABLE,)),
    ("harp", (P.GETTABLE,)),
    ("candle", (P.GETTABLE,)),
    ("chest", (P.CONTAINER,)),
    ("barrel", (P.CONTAINER,)),
    ("table", (P.SURFACE,)),
    ("shelf", (P.SURFACE,)),
]

LOCATION_CATALOG: list[tuple[str, str]] = [
    ("royal stables", "stalls of fresh hay and well groomed horses line the walls"),
    ("dusty cellar", "cobwebs hang over rows of forgotten casks and crates"),
    ("treasure cavern", "glittering piles of gold stretch as far as the eye can see"),
    ("village tavern", "a warm hearth crackles beside long oak benches"),
    ("castle armory", "racks of polished steel gleam under the torchlight"),
    ("old chapel", "faded banners hang above a quiet stone altar"),
    ("wizard tower", "strange instruments hum on every crowded shelf"),
    ("harbor docks", "gulls wheel over tarred ropes and salted planks"),
    ("throne room", "tall pillars frame a dais draped in crimson"),
    ("forest clearing", "soft moss rings a circle of ancient oaks"),
    ("bustling market", "stalls of bright cloth and spices crowd the square"),
    ("abandoned mine", "broken carts rust beside a dark tunnel mouth"),
]

CHARACTER_CATALOG: list[tuple[str, str]] = [
    ("guard", "i guard the castle and the king. i would die to protect the royal family."),
    ("merchant", "i travel from town to town selling my wares. every coin counts."),
    ("horse", "i live on a farm. i work for humans. i like hay."),
    ("knight", "i have sworn an oath of honor. my armor is my pride."),
    ("peasant", "i am poor and dirty. i hate that i am starving to death."),
    ("bodyguard", "i am an immortal bodyguard. the gods appointed me to protect the king."),
    ("witch", "i brew potions in my hut. the villagers fear my craft."),
    ("bard", "i sing for my supper in every tavern. a good tale beats gold."),
    ("thief", "i take what i need from those who will not miss it."),
    ("monk", "i keep the old prayers alive. silence teaches me patience."),
    ("farmer", "i rise before the sun to tend my fields. rain is my fortune."),
    ("sailor", "i have sailed every sea and survived two wrecks."),
    ("cat", "i live in the barn of a small farm. i protect the farm from pests."),
    ("blacksmith", "i forge tools and blades. my hammer never rests."),
    ("princess", "i am heir to the throne. the court watches my every step."),
    ("innkeeper", "i keep the beds warm and the ale flowing for weary travelers."),
]

FILLERS = [
    "hello there friend",
    "what a fine day it is",
    "this place never changes",
    "how fares your family these days",
    "i have been walking since dawn",
    "the weather has been strange lately",
    "have you heard any news from the capital",
    "it is quiet around here today",
    "i had the strangest dream last night",
    "the harvest was poor this year",
    "do you come here often",
    "my feet ache from the road",
    "the king raised the taxes again",
    "i miss the festivals of my youth",
    "there are wolves in the hills they say",
    "what brings you to these parts",
    "the nights grow colder now",
    "i once saw a dragon far to the north",
    "trade has been slow all season",
    "you look well this morning",
    "the old well ran dry last week",
    "somebody should fix that door",
    "i can never remember the way to the chapel",
    "the moon was red last night",
    "a traveling circus passed through yesterday",
    "my grandmother told tales of this place",
    "the road south is washed out",
    "i heard singing in the woods at dusk",
    "the mill wheel broke again",
    "fish have been scarce in the river",
    "the bells rang twice at midnight",
    "a stranger asked about you yesterday",
    "the cellar smells of damp stone",
    "spring cannot come soon enough",
    "i lost a button from my coat",
    "the garrison drills at first light",
]

ENV_ACKS = [
    "very well i shall see to it",
    "as you wish friend",
    "what a fine idea that is",
    "yes that seems wise",
    "ah of course how right you are",
    "i was thinking the very same",
    "so be it then",
    "you speak good sense",
]

ENV_IDLES = [
    "indeed friend indeed",
    "perhaps you are right",
    "hmm let me think on that",
    "is that so",
    "the day will tell",
    "i could not say",
    "we shall see soon enough",
    "maybe so maybe not",
]

EMOTE_TRIGGERS = {
    "laugh": "let me tell you the funniest joke i know",
    "smile": "your kindness warms my heart truly",
    "ponder": "what do you think lies beyond the mountains",
    "frown": "i bring some rather unpleasant news",
    "nod": "surely you agree with my plan",
    "sigh": "it has been such a long and weary day",
    "grin": "i have a mischievous idea brewing",
    "gasp": "you will not believe what i just saw",
    "shrug": "honestly nobody knows what to do about it",
    "stare": "look closely at that strange mark on the wall",
    "scream": "there is a spider on your shoulder",
    "cry": "i must share a truly sad tale with you",
    "growl": "that rascal has been stealing from honest folk",
    "blush": "everyone says you are the fairest in the land",
    "dance": "the minstrels are playing your favorite tune",
    "applaud": "what a magnificent performance that was",
    "wave": "someone is calling you from the road",
    "groan": "not this dreadful chore again",
    "nudge": "hey pay attention to this",
    "wink": "we both know the little secret",
    "yawn": "this watch has lasted all through the night",
    "pout": "you never let me have any fun",
}


def trigger_for(action: GameAction, w: WorldGraph) -> str:
    """The player utterance that reliably elicits this action in the logs."""
    if action.verb is Verb.EMOTE:
        return EMOTE_TRIGGERS[action.emote]
    names = [w.entities[a].name for a in action.args]
    if action.verb is Verb.GET:
        return f"you should take a look at the {names[0]} over there"
    if action.verb is Verb.DROP:
        return f"that {names[0]} must be getting heavy to carry"
    if action.verb is Verb.GET_FROM:
        return f"why not grab the {names[0]} from the {names[1]}"
    if action.verb is Verb.PUT_IN:
        return f"perhaps the {names[0]} belongs in the {names[1]}"
    if action.verb is Verb.GIVE:
        return f"could you share that {names[0]} with me"
    if action.verb is Verb.STEAL:
        return f"i bet you could snatch my {names[0]} if you tried"
    if action.verb is Verb.HIT:
        return "you ought to teach me a lesson then"
    if action.verb is Verb.HUG:
        return "i could really use a warm hug right now"
    if action.verb is Verb.DRINK:
        return f"a sip of that {names[0]} would do you good"
    if action.verb is Verb.EAT:
        return f"that {names[0]} looks delicious you should try it"
    if action.verb is Verb.WEAR:
        return f"the {names[0]} would look splendid on you"
    if action.verb is Verb.WIELD:
        return f"you should ready your {names[0]} for battle"
    if action.verb is Verb.REMOVE:
        return f"you can put away your {names[0]} now"
    raise AssertionError(action.verb)


@dataclass(frozen=True)
class GenConfig:
    n_train_worlds: int = 40
    n_unseen_worlds: int = 10
    train_episodes_per_world: int = 12
    valid_episodes: int = 100
    test_seen_episodes: int = 300
    test_unseen_episodes: int = 200
    turns_min: int = 2
    turns_max: int = 5
    trigger_rate: float = 0.6
    trigger_follow_rate: float = 0.98
    spontaneous_rate: float = 0.08
    emote_trigger_fraction: float = 0.4
    min_objects: int = 3
    max_objects: int = 6
    max_rooms: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_train_worlds", "n_unseen_worlds", "train_episodes_per_world",
                     "valid_episodes", "test_seen_episodes", "test_unseen_episodes"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.turns_min < 1 or self.turns_max < self.turns_min:
            raise ConfigError("need 1 <= turns_min <= turns_max")


@dataclass
class CorpusBundle:
    scenarios: dict[str, Scenario]
    episodes: dict[str, EpisodeLog]
    candidates: list[str]
    splits: dict[str, list[str]]
    config: GenConfig = field(default_factory=GenConfig)

    def split_logs(self, split: str) -> list[EpisodeLog]:
        return [self.episodes[eid] for eid in self.splits[split]]


def build_scenario(rng: np.random.Generator, cfg: GenConfig, world_id: str) -> Scenario:
    """One small world: 1-2 rooms, two characters, a handful of objects."""
    n_rooms = int(rng.integers(1, cfg.max_rooms + 1))
    loc_idx = rng.choice(len(LOCATION_CATALOG), size=n_rooms, replace=False)
    rooms = []
    entities: dict[str, Entity] = {}
    containment: dict[str, Containment] = {}
    for i in loc_idx:
        name, desc = LOCATION_CATALOG[int(i)]
        rid = slugify(name)
        entities[rid] = Entity(rid, Kind.LOCATION, name, desc)
        rooms.append(rid)
    paths = frozenset(frozenset((rooms[i], rooms[i + 1])) for i in range(len(rooms) - 1))
    home = rooms[0]

    char_idx = rng.choice(len(CHARACTER_CATALOG), size=2, replace=False)
    chars = []
    for i in char_idx:
        name, persona = CHARACTER_CATALOG[int(i)]
        cid = slugify(name)
        entities[cid] = Entity(cid, Kind.CHARACTER, name, persona)
        containment[cid] = Containment(home, Mode.IN_ROOM)
        chars.append(CharacterRef(cid, name, persona))
    player, env_char = chars

    n_objects = int(rng.integers(cfg.min_objects, cfg.max_objects + 1))
    obj_idx = rng.choice(len(OBJECT_CATALOG), size=n_objects, replace=False)
    holders = [eid for eid in entities if entities[eid].kind is Kind.OBJECT]
    for i in obj_idx:
        name, flags = OBJECT_CATALOG[int(i)]
        oid = slugify(name)
        ent = Entity(oid, Kind.OBJECT, name, properties=frozenset(flags))
        entities[oid] = ent
        roll = rng.random()
        nestable = [h for h in holders
                    if {P.CONTAINER, P.SURFACE} & entities[h].properties
                    and P.GETTABLE in flags]
        if roll < 0.12 and P.GETTABLE in flags:
            containment[oid] = Containment(player.id, Mode.CARRIED_BY)
        elif roll < 0.24 and P.GETTABLE in flags:
            containment[oid] = Containment(env_char.id, Mode.CARRIED_BY)
        elif roll < 0.30 and P.WEARABLE in flags:
            containment[oid] = Containment(env_char.id, Mode.WORN_BY)
        elif roll < 0.33 and P.WEAPON in flags:
            containment[oid] = Containment(env_char.id, Mode.WIELDED_BY)
        elif roll < 0.48 and nestable:
            holder = nestable[int(rng.integers(len(nestable)))]
            mode = Mode.INSIDE_OF if P.CONTAINER in entities[holder].properties else Mode.ON_SURFACE_OF
            containment[oid] = Containment(holder, mode)
        else:
            containment[oid] = Containment(home, Mode.IN_ROOM)
        if {P.CONTAINER, P.SURFACE} & ent.properties:
            holders.append(oid)

    world = WorldGraph(entities=entities, containment=containment, paths=paths)
    home_name, home_desc = entities[home].name, entities[home].description
    return Scenario(world=world, setting_name=home_name, setting_desc=home_desc,
                    player=player, env_char=env_char, world_id=world_id)


def _scripted_env_action(rng: np.random.Generator, cfg: GenConfig, last_utterance: str,
                         world: WorldGraph, env_id: str, admissible) -> GameAction | None:
    """The behavioural rule the logs are generated with (and tested against)."""
    triggered = None
    for a in admissible:
        if trigger_for(a, world) == last_utterance:
            triggered = a
            break
    if triggered is not None:
        return triggered if rng.random() < cfg.trigger_follow_rate else None
    if rng.random() >= cfg.spontaneous_rate:
        return None
    game_acts = [a for a in admissible if a.verb is not Verb.EMOTE]
    if game_acts and rng.random() >= 0.5:
        return game_acts[int(rng.integers(len(game_acts)))]
    emotes = [a for a in admissible if a.verb is Verb.EMOTE]
    return emotes[int(rng.integers(len(emotes)))]


class ScriptedEnvAgent:
    """Environment agent that follows the generator's behavioural rule.

    A test fixture and analysis oracle; the learned retrieval agent is
    trained to imitate exactly this behaviour from the logs.
    """

    def __init__(self, cfg: GenConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng

    def respond(self, obs_tokens, world, actor_id, admissible, last_utterance=""):
        action = _scripted_env_action(self.rng, self.cfg, last_utterance, world, actor_id, admissible)
        pool = ENV_ACKS if action is not None else ENV_IDLES
        utterance = pool[int(self.rng.integers(len(pool)))]
        return utterance, action


def script_episode(scenario: Scenario, cfg: GenConfig, rng: np.random.Generator,
                   episode_id: str) -> EpisodeLog:
    world = scenario.world
    env_id = scenario.env_char.id
    turns: list[TurnEvent] = []
    n_pairs = int(rng.integers(cfg.turns_min, cfg.turns_max + 1))
    for _ in range(n_pairs):
        admissible = enumerate_admissible(world, env_id)
        game_acts = [a for a in admissible if a.verb is not Verb.EMOTE]
        if rng.random() < cfg.trigger_rate:
            if game_acts and rng.random() >= cfg.emote_trigger_fraction:
                target = game_acts[int(rng.integers(len(game_acts)))]
            else:
                target = GameAction(Verb.EMOTE, (), emote=EMOTES[int(rng.integers(len(EMOTES)))])
            utterance = trigger_for(target, world)
        else:
            utterance = FILLERS[int(rng.integers(len(FILLERS)))]
        turns.append(TurnEvent(Speaker.PLAYER, utterance))
        action = _scripted_env_action(rng, cfg, utterance, world, env_id, admissible)
        if action is not None:
            text = render_action_text(action, world)
            world, _ = apply_action(world, env_id, action)
            env_utt = ENV_ACKS[int(rng.integers(len(ENV_ACKS)))]
            turns.append(TurnEvent(Speaker.ENV, env_utt, action, text))
        else:
            env_utt = ENV_IDLES[int(rng.integers(len(ENV_IDLES)))]
            turns.append(TurnEvent(Speaker.ENV, env_utt))
    return EpisodeLog(episode_id=episode_id, scenario=scenario, turns=turns,
                      goal=None, reward=0, turns_used=n_pairs)


def generate_synthetic_corpus(cfg: GenConfig, rng: np.random.Generator) -> CorpusBundle:
    """Worlds, scripted episode logs, candidate utterances and splits."""
    scenarios: dict[str, Scenario] = {}
    train_worlds, unseen_worlds = [], []
    for i in range(cfg.n_train_worlds + cfg.n_unseen_worlds):
        wid = f"w{i:03d}"
        scenarios[wid] = build_scenario(rng, cfg, wid)
        (train_worlds if i < cfg.n_train_worlds else unseen_worlds).append(wid)

    episodes: dict[str, EpisodeLog] = {}
    splits: dict[str, list[str]] = {"train": [], "valid": [], "test_seen": [], "test_unseen": []}
    counter = 0

    def emit(split: str, wid: str) -> None:
        nonlocal counter
        eid = f"{wid}:e{counter:05d}"
        counter += 1
        episodes[eid] = script_episode(scenarios[wid], cfg, rng, eid)
        splits[split].append(eid)

    for wid in train_worlds:
        for _ in range(cfg.train_episodes_per_world):
            emit("train", wid)
    for k in range(cfg.valid_episodes):
        emit("valid", train_worlds[k % len(train_worlds)])
    for k in range(cfg.test_seen_episodes):
        emit("test_seen", train_worlds[k % len(train_worlds)])
    for k in range(cfg.test_unseen_episodes):
        emit("test_unseen", unseen_worlds[k % len(unseen_worlds)])

    seen: dict[str, None] = {}
    for eid in sorted(episodes):
        for ev in episodes[eid].turns:
            seen.setdefault(ev.utterance)
    return CorpusBundle(scenarios=scenarios, episodes=episodes,
                        candidates=list(seen), splits=splits, config=cfg)


# --- serialization ---------------------------------------------------------

def _action_to_dict(a: GameAction | None) -> dict | None:
    if a is None:
        return None
    return {"verb": a.verb.value, "args": list(a.args), "emote": a.emote}


def _action_from_dict(d: dict | None) -> GameAction | None:
    if d is None:
        return None
    return GameAction(Verb(d["verb"]), tuple(d["args"]), emote=d.get("emote"))


def episode_to_dict(log: EpisodeLog) -> dict:
    return {
        "episode_id": log.episode_id,
        "world_id": log.scenario.world_id,
        "player": log.scenario.player.id,
        "env": log.scenario.env_char.id,
        "goal": None if log.goal is None else {
            "action": _action_to_dict(log.goal.target),
            "goal_type": log.goal.goal_type.value,
            "text": log.goal.text,
        },
        "reward": log.reward,
        "turns_used": log.turns_used,
        "turns": [
            {
                "speaker": ev.speaker.value,
                "utterance": ev.utterance,
                "action": _action_to_dict(ev.action),
                "action_text": ev.action_text,
            }
            for ev in log.turns
        ],
    }


class SchemaError(ValueError):
    pass


def episode_from_dict(data: dict, scenarios: dict[str, Scenario]) -> EpisodeLog:
    try:
        template = scenarios[data["world_id"]]
        chars = {template.player.id: template.player, template.env_char.id: template.env_char}
        scenario = Scenario(
            world=template.world,
            setting_name=template.setting_name,
            setting_desc=template.setting_desc,
            player=chars[data["player"]],
            env_char=chars[data["env"]],
            world_id=data["world_id"],
        )
        goal = None
        if data.get("goal") is not None:
            action = _action_from_dict(data["goal"]["action"])
            goal = Goal(action, GoalType(data["goal"]["goal_type"]), data["goal"]["text"])
        turns = [
            TurnEvent(
                Speaker(t["speaker"]), t["utterance"],
                _action_from_dict(t.get("action")), t.get("action_text"),
            )
            for t in data["turns"]
        ]
    except (KeyError, ValueError, TypeError) as e:
        raise SchemaError(f"malformed episode record: {e}") from e
    return EpisodeLog(episode_id=data["episode_id"], scenario=scenario, turns=turns,
                      goal=goal, reward=data.get("reward", 0),
                      turns_used=data.get("turns_used", 0))


def save_corpus(bundle: CorpusBundle, out_dir: str | Path) -> None:
    from .config import dataclass_to_config
    from .worldfiles import world_to_dict

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    worlds = {
        wid: {
            "setting_name": sc.setting_name,
            "setting_desc": sc.setting_desc,
            "characters": [
                {"id": c.id, "name": c.name, "persona": c.persona}
                for c in (sc.player, sc.env_char)
            ],
            "world": world_to_dict(sc.world),
        }
        for wid, sc in sorted(bundle.scenarios.items())
    }
    (out / "worlds.json").write_text(json.dumps(worlds, indent=2, sort_keys=True) + "\n")
    with open(out / "episodes.jsonl", "w") as f:
        for eid in sorted(bundle.episodes):
            f.write(json.dumps(episode_to_dict(bundle.episodes[eid]), sort_keys=True) + "\n")
    (out / "candidates.txt").write_text("\n".join(bundle.candidates) + "\n")
    (out / "splits.json").write_text(json.dumps(bundle.splits, indent=2, sort_keys=True) + "\n")
    (out / "corpus.cfg").write_text(dataclass_to_config(bundle.config, section="corpus"))


def load_corpus(corpus_dir: str | Path) -> CorpusBundle:
    from .config import dataclass_from_config
    from .worldfiles import world_from_dict

    root = Path(corpus_dir)
    if not (root / "worlds.json").exists():
        raise SchemaError(f"{root}: not a corpus directory (missing worlds.json)")
    worlds = json.loads((root / "worlds.json").read_text())
    scenarios: dict[str, Scenario] = {}
    for wid, spec in worlds.items():
        chars = [CharacterRef(c["id"], c["name"], c["persona"]) for c in spec["characters"]]
        scenarios[wid] = Scenario(
            world=world_from_dict(spec["world"]),
            setting_name=spec["setting_name"],
            setting_desc=spec["setting_desc"],
            player=chars[0],
            env_char=chars[1],
            world_id=wid,
        )
    episodes: dict[str, EpisodeLog] = {}
    with open(root / "episodes.jsonl") as f:
        for line in f:
            if line.strip():
                log = episode_from_dict(json.loads(line), scenarios)
                episodes[log.episode_id] = log
    candidates = (root / "candidates.txt").read_text().splitlines()
    splits = json.loads((root / "splits.json").read_text())
    cfg = GenConfig()
    cfg_path = root / "corpus.cfg"
    if cfg_path.exists():
        cfg = dataclass_from_config(GenConfig, cfg_path.read_text(), section="corpus")
    return CorpusBundle(scenarios=scenarios, episodes=episodes, candidates=candidates,
                        splits=splits, config=cfg)


# --- generator self-audits -------------------------------------------------

def trigger_follow_fraction(logs, verb: Verb | None = None) -> tuple[int, int]:
    """(followed, total) count of trigger utterances answered by the action."""
    followed = total = 0
    for log in logs:
        world = log.scenario.world
        for i in range(0, len(log.turns) - 1, 2):
            player_ev, env_ev = log.turns[i], log.turns[i + 1]
            admissible = enumerate_admissible(world, log.scenario.env_char.id)
            match = None
            for a in admissible:
                if trigger_for(a, world) == player_ev.utterance:
                    match = a
                    break
            if match is not None and (verb is None or match.verb is verb):
                total += 1
                if env_ev.action == match:
                    followed += 1
            if env_ev.action is not None:
                world, _ = apply_action(world, log.scenario.env_char.id, env_ev.action)
    return followed, total


def random_baseline_chance(bundle: CorpusBundle, scenario: Scenario, goal: Goal) -> float:
    """Exact one-turn success probability of a uniform-random utterance
    against the scripted environment rule, for one episode start."""
    cfg = bundle.config
    world = scenario.world
    admissible = enumerate_admissible(world, scenario.env_char.id)
    if goal.target not in admissible:
        return 0.0
    corpus = bundle.candidates
    m = len(corpus)
    triggers = {trigger_for(a, world) for a in admissible}
    n_trigger_utts = sum(1 for u in corpus if u in triggers)
    game_acts = [a for a in admissible if a.verb is not Verb.EMOTE]
    if goal.target.verb is Verb.EMOTE:
        q = 0.5 / len(EMOTES) + (0.5 / len(EMOTES) if not game_acts else 0.0)
    else:
        q = 0.5 / len(game_acts) if game_acts else 0.0
    p_goal_trigger = (1.0 / m) if trigger_for(goal.target, world) in corpus else 0.0
    p_other = (m - n_trigger_utts) / m
    return p_goal_trigger * cfg.trigger_follow_rate + p_other * cfg.spontaneous_rate * q
