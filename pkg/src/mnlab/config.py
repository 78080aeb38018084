"""Experiment configuration files.

Configs, weight files and measure files are JSON documents. Infinite
exponents are written as the string "inf"; complex numbers as [re, im].

Config schema (every key optional unless noted)::

    {
      "command": "hl-check",            # must match the CLI command if given
      "profile": {"p": 2, "q": 2, "s": 2, "t": 2},
      "weight": {"kind": "standard", "alpha": 0} | {"file": "w.json"},
      "corpus": "all" | ["z", {"kind": "monomial", "n": 3}, ...],
      "grid": {"radial_nodes": 160, "degree_cap": 512, "j_max": 6,
               "draws": 32, "samples": 1},
      "seed": 0,
      "tolerances": {"bracket": 50.0, ...},
      "params": {...}                   # command specific, see mnlab.experiments
    }
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from mnlab.weights import RadialWeight, weight_from_dict

COMMANDS = ("hl-check", "sharpness", "weight-audit", "paraproduct", "carleson")

DEFAULT_GRID = {"radial_nodes": 160, "degree_cap": 512, "j_max": 6, "draws": 32, "samples": 1}
DEFAULT_TOLERANCES = {
    "bracket": 50.0,
    "slope": 0.1,
    "boundary": 1e-6,
    "monotone": 1e-6,
}


class ConfigError(ValueError):
    """Invalid or unparsable configuration; carries a location when known."""


def parse_number(x, name: str = "value") -> float:
    """A float, accepting "inf" / "infinity" strings."""
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "infinity", "+inf"):
            return math.inf
        raise ConfigError(f"{name}: expected a number or 'inf', got {x!r}")
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {x!r}")
    return float(x)


def encode_number(x: float):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def load_json(path) -> dict:
    """Read a JSON object, turning syntax errors into ConfigError with line and column."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"{path}: file not found") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1:1: top level must be an object")
    return data


def _resolve_file(entry, base: Path, what: str) -> dict:
    """Inline dict, or {"file": path} resolved against the config's directory."""
    if isinstance(entry, dict) and set(entry) == {"file"}:
        return load_json(base / entry["file"])
    if not isinstance(entry, dict):
        raise ConfigError(f"{what}: expected an object")
    return entry


def load_weight(entry, base: Path = Path(".")) -> RadialWeight:
    d = _resolve_file(entry, base, "weight")
    try:
        return weight_from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"weight: {exc}") from None


@dataclass
class ExperimentConfig:
    command: str
    profile: dict | None = None
    weight: dict = field(default_factory=lambda: {"kind": "standard", "alpha": 0.0})
    corpus: object = "all"
    grid: dict = field(default_factory=lambda: dict(DEFAULT_GRID))
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    params: dict = field(default_factory=dict)
    refine: bool = False
    out: str | None = None
    base_dir: str = "."

    @property
    def factor(self) -> int:
        """Grid multiplier: 2 under --refine."""
        return 2 if self.refine else 1

    def exponent_profile(self):
        from mnlab.mixed_norm import ExponentProfile

        if self.profile is None:
            raise ConfigError("profile: required for this command")
        try:
            return ExponentProfile(*(parse_number(self.profile[k], f"profile.{k}") for k in "pqst"))
        except KeyError as exc:
            raise ConfigError(f"profile: missing {exc.args[0]!r}") from None

    def radial_weight(self) -> RadialWeight:
        return load_weight(self.weight, Path(self.base_dir))

    def resolved(self) -> dict:
        """Everything needed to reproduce the run."""
        return {
            "command": self.command, "profile": self.profile, "weight": self.weight, "corpus": self.corpus,
            "grid": self.grid, "seed": self.seed, "tolerances": self.tolerances, "params": self.params,
            "refine": self.refine,
        }


def config_from_dict(data: dict, command: str, base_dir=".") -> ExperimentConfig:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    declared = data.get("command")
    if declared is not None and declared != command:
        raise ConfigError(f"command: config is for {declared!r}, not {command!r}")
    unknown = set(data) - {"command", "profile", "weight", "corpus", "grid", "seed", "tolerances", "params"}
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    grid = dict(DEFAULT_GRID)
    grid.update(data.get("grid", {}))
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(data.get("tolerances", {}))
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed: expected an integer")
    weight = data.get("weight", {"kind": "standard", "alpha": 0.0})
    base = Path(base_dir)
    if isinstance(weight, dict) and set(weight) == {"file"}:
        weight = load_json(base / weight["file"])
    cfg = ExperimentConfig(
        command=command,
        profile=copy.deepcopy(data.get("profile")),
        weight=copy.deepcopy(weight),
        corpus=copy.deepcopy(data.get("corpus", "all")),
        grid=grid,
        seed=seed,
        tolerances=tol,
        params=copy.deepcopy(data.get("params", {})),
        base_dir=str(base),
    )
    cfg.radial_weight()
    return cfg


def load_config(path, command: str) -> ExperimentConfig:
    path = Path(path)
    return config_from_dict(load_json(path), command, path.parent)
