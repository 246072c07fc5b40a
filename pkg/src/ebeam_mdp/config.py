"""Run configuration: one JSON document, strict keys, explicit defaults.

Layout::

    {"grid": 512, "threads": null,
     "ebl": {...}, "ol": {...}, "bounds": {...}, "weights": {...},
     "opt": {"epochs": ..., "lr": ..., "lr_scale": [...], "update_from": ...,
             "seed": ..., "forward": ..., "sigma_prime": ..., "sigma_cdr": ...},
     "paths": {"target": null, "shots": null, "out": null}}

Defaults for the physical and loss constants are placeholders, not
measured process values.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields, replace
from typing import Any, Optional

from .model import EblParams, LossWeights, OlParams, ShotBounds, ValidationError
from .optimize import OptConfig


class ConfigError(ValueError):
    """The configuration document is malformed (unknown key, wrong type, bad JSON)."""


@dataclass(frozen=True)
class Paths:
    target: Optional[str] = None
    shots: Optional[str] = None
    out: Optional[str] = None


@dataclass(frozen=True)
class RunConfig:
    grid: int = 512
    threads: Optional[int] = None
    ebl: EblParams = field(default_factory=EblParams)
    ol: OlParams = field(default_factory=OlParams)
    bounds: ShotBounds = field(default_factory=ShotBounds)
    weights: LossWeights = field(default_factory=LossWeights)
    opt: OptConfig = field(default_factory=OptConfig)
    paths: Paths = field(default_factory=Paths)

    def opt_config(self, mode: str) -> OptConfig:
        """The optimizer config with this run's loss weights and the given mode."""
        return replace(self.opt, weights=self.weights, mode=mode)

    def validate(self) -> "RunConfig":
        if self.grid < 1:
            raise ValidationError("grid must be a positive integer")
        if self.threads is not None and self.threads < 1:
            raise ValidationError("threads must be positive")
        self.ebl.validate()
        self.ol.validate()
        self.bounds.validate()
        self.weights.validate()
        self.opt_config(self.opt.mode).validate()
        return self

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["opt"].pop("weights")
        d["opt"].pop("mode")
        d["opt"]["lr_scale"] = list(d["opt"]["lr_scale"])
        return d


# Sections and their dataclasses; "opt" hides fields owned elsewhere.
_SECTIONS = {"ebl": EblParams, "ol": OlParams, "bounds": ShotBounds, "weights": LossWeights,
             "opt": OptConfig, "paths": Paths}
_HIDDEN = {"opt": {"weights", "mode"}}


def _coerce(value: Any, current: Any, where: str) -> Any:
    if isinstance(current, bool) or isinstance(value, bool):
        raise ConfigError(f"{where}: booleans are not accepted")
    if current is None or isinstance(current, str):
        if value is None or isinstance(value, str):
            return value
        raise ConfigError(f"{where}: expected a string or null")
    if isinstance(current, tuple):
        if not isinstance(value, (list, tuple)) or not all(
                isinstance(v, (int, float)) for v in value):
            raise ConfigError(f"{where}: expected a list of numbers")
        return tuple(float(v) for v in value)
    if isinstance(current, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer")
        return value
    if isinstance(current, float):
        if not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number")
        return float(value)
    raise ConfigError(f"{where}: unsupported value")


def _apply_section(obj, data: dict, section: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{section}: expected an object")
    allowed = {f.name for f in fields(obj)} - _HIDDEN.get(section, set())
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}")
    updates = {k: _coerce(v, getattr(obj, k), f"{section}.{k}") for k, v in data.items()}
    return replace(obj, **updates)


def from_dict(data: dict, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(data) - {"grid", "threads", *_SECTIONS})
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    updates: dict[str, Any] = {}
    for key, value in data.items():
        if key == "grid":
            updates["grid"] = _coerce(value, cfg.grid, "grid")
        elif key == "threads":
            if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
                raise ConfigError("threads: expected an integer or null")
            updates["threads"] = value
        else:
            updates[key] = _apply_section(getattr(cfg, key), value, key)
    return replace(cfg, **updates)


def load(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return from_dict(data)


def apply_override(cfg: RunConfig, assignment: str) -> RunConfig:
    """Apply ``section.key=value`` (value parsed as JSON, else taken as a string)."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} must look like key=value")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.strip().split(".")
    if len(parts) == 1:
        return from_dict({parts[0]: value}, cfg)
    if len(parts) == 2:
        return from_dict({parts[0]: {parts[1]: value}}, cfg)
    raise ConfigError(f"override key {key!r} is too deep")


def dumps(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=False)
