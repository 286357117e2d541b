"""World file loading and saving.

Native schema: a JSON object with top-level keys ``entities``,
``containment`` and ``paths``.  A LIGHT-style scenario file (setting name
and description, character personas, object lists) is also accepted and
mapped onto the native schema.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from .world import Containment, Entity, Kind, Mode, PropertyFlag, WorldGraph


class WorldSchemaError(ValueError):
    """Raised when a world file does not match either accepted schema."""


def world_to_dict(w: WorldGraph) -> dict:
    return {
        "entities": {
            eid: {
                "kind": ent.kind.value,
                "name": ent.name,
                "description": ent.description,
                "properties": sorted(p.value for p in ent.properties),
            }
            for eid, ent in sorted(w.entities.items())
        },
        "containment": {
            eid: {"holder": st.holder, "mode": st.mode.value}
            for eid, st in sorted(w.containment.items())
        },
        "paths": sorted(sorted(pair) for pair in w.paths),
    }


def world_from_dict(data: dict) -> WorldGraph:
    if not isinstance(data, dict) or "entities" not in data:
        raise WorldSchemaError("expected top-level 'entities' key")
    try:
        entities = {
            eid: Entity(
                id=eid,
                kind=Kind(spec["kind"]),
                name=spec["name"],
                description=spec.get("description", ""),
                properties=frozenset(PropertyFlag(p) for p in spec.get("properties", [])),
            )
            for eid, spec in data["entities"].items()
        }
        containment = {
            eid: Containment(spec["holder"], Mode(spec["mode"]))
            for eid, spec in data.get("containment", {}).items()
        }
        paths = frozenset(frozenset(pair) for pair in data.get("paths", []))
    except (KeyError, ValueError, TypeError) as e:
        raise WorldSchemaError(f"malformed world file: {e}") from e
    return WorldGraph(entities=entities, containment=containment, paths=paths)


_ID_RE = re.compile(r"[^a-z0-9]+")


def slugify(name: str) -> str:
    return _ID_RE.sub("_", name.strip().lower()).strip("_")


def world_from_light_scenario(data: dict) -> tuple[WorldGraph, dict]:
    """Map a LIGHT-style scenario onto the native schema.

    Expected keys: ``setting`` {name, description}, ``characters``
    [{name, persona, carrying/wearing/wielding: [object names]}], and
    ``objects`` [{name, description, properties, contained_by}].
    Returns the world plus scenario metadata (setting and personas).
    """
    if "setting" not in data or "characters" not in data:
        raise WorldSchemaError("expected 'setting' and 'characters' keys")
    setting = data["setting"]
    room_id = slugify(setting.get("name", "room")) or "room"
    entities = {
        room_id: Entity(room_id, Kind.LOCATION, setting.get("name", room_id),
                        setting.get("description", ""))
    }
    containment: dict[str, Containment] = {}

    def add(entity: Entity) -> str:
        if entity.id in entities:
            raise WorldSchemaError(f"duplicate entity name: {entity.name}")
        entities[entity.id] = entity
        return entity.id

    by_name: dict[str, str] = {}
    for spec in data.get("objects", []):
        oid = add(Entity(
            slugify(spec["name"]), Kind.OBJECT, spec["name"],
            spec.get("description", ""),
            frozenset(PropertyFlag(p) for p in spec.get("properties", [])),
        ))
        by_name[spec["name"].lower()] = oid
    characters = []
    for spec in data["characters"]:
        cid = add(Entity(slugify(spec["name"]), Kind.CHARACTER, spec["name"], spec.get("persona", "")))
        containment[cid] = Containment(room_id, Mode.IN_ROOM)
        characters.append({"id": cid, "name": spec["name"], "persona": spec.get("persona", "")})
        for mode, key in ((Mode.CARRIED_BY, "carrying"), (Mode.WORN_BY, "wearing"), (Mode.WIELDED_BY, "wielding")):
            for obj_name in spec.get(key, []):
                oid = by_name.get(obj_name.lower())
                if oid is None:
                    raise WorldSchemaError(f"{spec['name']} holds unknown object {obj_name!r}")
                containment[oid] = Containment(cid, mode)
    for spec in data.get("objects", []):
        oid = by_name[spec["name"].lower()]
        if oid in containment:
            continue
        holder_name = spec.get("contained_by")
        if holder_name:
            holder = by_name.get(holder_name.lower())
            if holder is None:
                raise WorldSchemaError(f"unknown holder {holder_name!r} for {spec['name']!r}")
            holder_props = entities[holder].properties
            mode = Mode.INSIDE_OF if PropertyFlag.CONTAINER in holder_props else Mode.ON_SURFACE_OF
            containment[oid] = Containment(holder, mode)
        else:
            containment[oid] = Containment(room_id, Mode.IN_ROOM)
    meta = {
        "setting_name": setting.get("name", room_id),
        "setting_desc": setting.get("description", ""),
        "characters": characters,
        "room": room_id,
    }
    return WorldGraph(entities=entities, containment=containment), meta


def load_world(path: str | Path) -> WorldGraph:
    """Load a world file in either the native or the LIGHT-style schema."""
    data = json.loads(Path(path).read_text())
    if "entities" in data:
        return world_from_dict(data)
    world, _ = world_from_light_scenario(data)
    return world


def save_world(w: WorldGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(world_to_dict(w), indent=2, sort_keys=True) + "\n")
