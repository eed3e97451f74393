"""Scenario override files: one ``key = value`` per line, ``#`` comments.

Values are parsed as Python literals where possible (numbers, booleans,
lists) and fall back to bare strings.  Keys must be known to the scenario.
"""

from __future__ import annotations

import ast
from pathlib import Path
from typing import Any, Mapping, Union


class ConfigError(ValueError):
    """Invalid override file; the message names the offending key or line."""


def parse_value(text: str) -> Any:
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null"):
        return None
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_config(text: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in out:
            raise ConfigError(f"{key}: given twice (line {lineno})")
        out[key] = parse_value(value)
    return out


def validate(overrides: Mapping[str, Any], schema: Mapping[str, tuple]) -> dict[str, Any]:
    """Check overrides against ``schema``: key -> (type(s), predicate or None, hint)."""
    clean = {}
    for key, value in overrides.items():
        if key not in schema:
            known = ", ".join(sorted(schema))
            raise ConfigError(f"{key}: unknown key (known: {known})")
        types, check, hint = schema[key]
        if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
            raise ConfigError(f"{key}: expected {hint}, got {value!r}")
        if value is not None and not isinstance(value, types):
            raise ConfigError(f"{key}: expected {hint}, got {value!r}")
        if check is not None and value is not None and not check(value):
            raise ConfigError(f"{key}: expected {hint}, got {value!r}")
        clean[key] = value
    return clean


def load_config(path: Union[str, Path], schema: Mapping[str, tuple]) -> dict[str, Any]:
    """Read and validate an override file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return validate(parse_config(text), schema)
