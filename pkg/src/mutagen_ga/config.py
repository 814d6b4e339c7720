"""Loading :class:`GaConfig` from files, environment and overrides."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Any, Mapping

from .ga import ConfigError, GaConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SEED_ENV = "MUTAGEN_SEED"


def read_config_file(path: str | os.PathLike) -> dict[str, Any]:
    """Parse a JSON object or TOML-style ``key = value`` lines."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        if text.lstrip().startswith("{"):
            values = json.loads(text)
        else:
            values = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(values, dict):
        raise ConfigError(f"{path}: expected a key/value mapping")
    return values


def load_config(
    path: str | os.PathLike | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> GaConfig:
    """Defaults, then the config file, then explicit overrides.

    The seed falls back to ``$MUTAGEN_SEED`` when neither the file nor the
    overrides set one.
    """
    environ = os.environ if environ is None else environ
    values: dict[str, Any] = {}
    if path is not None:
        values.update(read_config_file(path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if values.get("seed") is None and environ.get(SEED_ENV):
        try:
            values["seed"] = int(environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} is not an integer: {environ[SEED_ENV]!r}") from None
    return GaConfig.from_mapping(values)
