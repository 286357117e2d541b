"""Line-oriented key=value configuration with section headers.

Grammar: ``[section]`` headers, ``key = value`` lines, ``#`` comments,
blank lines ignored.  Values are coerced by the target dataclass field
types; unknown keys are config errors so typos fail loudly.
"""

from __future__ import annotations

import configparser
import dataclasses
from enum import Enum
from typing import get_args, get_origin


class ConfigFileError(ValueError):
    pass


def _coerce(raw: str, typ):
    if typ is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigFileError(f"expected a boolean, got {raw!r}")
    if typ is int:
        return int(raw)
    if typ is float:
        return float(raw)
    if typ is str:
        return raw
    if isinstance(typ, type) and issubclass(typ, Enum):
        return typ(raw)
    origin = get_origin(typ)
    if origin in (list, tuple):
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        inner = get_args(typ)[0] if get_args(typ) else str
        vals = [_coerce(p, inner) for p in parts]
        return tuple(vals) if origin is tuple else vals
    raise ConfigFileError(f"unsupported config field type {typ!r}")


def _render(value) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(_render(v) for v in value)
    return str(value)


def dataclass_to_config(obj, section: str) -> str:
    lines = [f"[{section}]"]
    for f in dataclasses.fields(obj):
        lines.append(f"{f.name} = {_render(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


def _parse(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigFileError(str(e)) from e
    return parser


def dataclass_from_config(cls, text: str, section: str, overrides: dict | None = None):
    """Build a dataclass from one section; missing keys keep defaults."""
    parser = _parse(text)
    values: dict = {}
    fields = {f.name: f for f in dataclasses.fields(cls)}
    if parser.has_section(section):
        for key, raw in parser.items(section):
            if key not in fields:
                raise ConfigFileError(f"unknown key {key!r} in [{section}]")
            ftype = fields[key].type
            if isinstance(ftype, str):
                ftype = _resolve_type(cls, ftype)
            values[key] = _coerce(raw, ftype)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return cls(**values)
    except (TypeError, ValueError) as e:
        raise ConfigFileError(str(e)) from e


def _resolve_type(cls, annotation: str):
    import sys
    import typing

    module = sys.modules.get(cls.__module__)
    namespace = dict(vars(module)) if module else {}
    namespace.setdefault("typing", typing)
    return eval(annotation, namespace)  # noqa: S307 - annotations from our own modules
