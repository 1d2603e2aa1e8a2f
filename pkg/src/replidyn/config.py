"""Run configuration: JSON schema, parsing and validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import jsonschema

from .dynamics import IntegratorConfig
from .model import ModelParams, ParameterError

PARAM_KEYS = ("alpha", "beta", "gamma", "delta", "epsilon", "eta", "l", "n")

SCHEMA = {
    "type": "object",
    "properties": {
        **{k: {"type": "number"} for k in PARAM_KEYS},
        "integrator": {
            "type": "object",
            "properties": {
                "h": {"type": "number", "exclusiveMinimum": 0},
                "t_max": {"type": "number", "exclusiveMinimum": 0},
                "eps_conv": {"type": "number", "exclusiveMinimum": 0},
                "stride": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "resolution": {"type": "integer", "minimum": 10},
        "seed": {"type": "integer"},
    },
    "required": list(PARAM_KEYS),
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    resolution: int = 100
    seed: int = 42
    output_dir: Path = Path(".")


def _where(err: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in err.absolute_path)
    if err.validator == "required":
        return str(err.message).split("'")[1]
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        return ".".join(filter(None, [path, ",".join(extra)]))
    return path or "<root>"


def parse_config(data: Any, output_dir: Optional[Path] = None) -> RunConfig:
    """Validate a decoded JSON document and build a :class:`RunConfig`."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(f"config field '{_where(err)}': {err.message}")
    try:
        params = ModelParams(**{k: data[k] for k in PARAM_KEYS})
    except ParameterError as exc:
        raise ConfigError(f"config field '{exc.field}': {exc.reason}") from None
    try:
        raw = dict(data.get("integrator", {}))
        if "stride" in raw:
            raw["stride"] = int(raw["stride"])
        integ = IntegratorConfig(**raw)
    except ValueError as exc:
        raise ConfigError(f"config field 'integrator': {exc}") from None
    return RunConfig(params=params, integrator=integ,
                     resolution=int(data.get("resolution", 100)), seed=int(data.get("seed", 42)),
                     output_dir=output_dir or Path("."))


def load_config(path: Optional[str] = None, inline: Optional[str] = None,
                output_dir: Optional[Path] = None) -> RunConfig:
    """Read a config from a file path or an inline JSON string (exactly one)."""
    if (path is None) == (inline is None):
        raise ConfigError("give either a config file or --params, not both or neither")
    try:
        text = Path(path).read_text() if path is not None else inline
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(data, output_dir)
