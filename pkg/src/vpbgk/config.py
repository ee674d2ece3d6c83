"""TOML run descriptions -> ScenarioConfig.

Top-level keys and tables mirror the ScenarioConfig fields; ``--set``
overrides use dotted keys (``control.gamma=1e-3``, ``N=50000``).
"""

from __future__ import annotations

import copy
import dataclasses
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .domain import (
    BoundaryBand,
    CollisionParams,
    ConfigError,
    ControlParams,
    Mesh,
    PhaseDomain,
    ScenarioConfig,
)

TOP_KEYS = {
    "scenario",
    "N",
    "h",
    "t_f",
    "n_z",
    "z_fixed",
    "temperature_profile",
    "seed",
    "snapshot_times",
    "output_dir",
}
TABLES = {
    "domain": {f.name for f in dataclasses.fields(PhaseDomain)},
    "mesh": {"m_x", "m_y"},
    "collision": {f.name for f in dataclasses.fields(CollisionParams)},
    "control": {f.name for f in dataclasses.fields(ControlParams)},
    "band": {"intervals"},
    "extras": None,  # free-form
}
PLAN_TABLES = {"compare", "sweep"}

SCENARIOS = ("sod2d", "kelvin-helmholtz", "custom")

DESK = {"N": 200_000, "mesh": {"m_x": 64, "m_y": 64}, "n_z": 4}

DEFAULTS: dict[str, dict[str, Any]] = {
    "sod2d": {
        "h": 0.05,
        "t_f": 2.0,
        "domain": {"x_min": 0.0, "x_max": 1.5, "y_min": 0.0, "y_max": 1.5},
        "band": {"intervals": [[0.0, 0.234], [1.476, 1.5]]},
        "control": {"M": 50.0, "y_hat": 0.75, "B0": 1.5},
    },
    "kelvin-helmholtz": {
        "h": 0.5,
        "t_f": 250.0,
        "domain": {"x_min": 0.0, "x_max": 40.0, "y_min": -5.0, "y_max": 5.0},
        "band": {"intervals": [[-5.0, -4.8], [4.8, 5.0]]},
        "control": {"M": 100.0, "y_hat": 0.0, "B0": 1.2},
    },
}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _check_keys(raw: dict) -> None:
    for key, value in raw.items():
        if key in TOP_KEYS or key in PLAN_TABLES:
            continue
        if key not in TABLES:
            raise ConfigError(f"unknown config key '{key}'")
        if not isinstance(value, dict):
            raise ConfigError(f"config key '{key}' must be a table")
        allowed = TABLES[key]
        if allowed is None:
            continue
        for sub in value:
            if sub not in allowed:
                raise ConfigError(f"unknown config key '{key}.{sub}'")


def parse_value(text: str) -> Any:
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(raw: dict, overrides) -> dict:
    out = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        node = out
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"unknown config key '{key}'")
        node[parts[-1]] = parse_value(text.strip())
    return out


def build_config(raw: dict) -> ScenarioConfig:
    """Validate a nested mapping and fill scenario and desk-scale defaults."""
    _check_keys(raw)
    scenario = raw.get("scenario", "sod2d")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")
    full = _merge(_merge(DESK, DEFAULTS.get(scenario, {})), raw)
    _check_keys(full)
    try:
        domain = PhaseDomain(**full["domain"])
        mesh = Mesh(domain, int(full["mesh"]["m_x"]), int(full["mesh"]["m_y"]))
        band = BoundaryBand(tuple((float(a), float(b)) for a, b in full["band"]["intervals"]))
        return ScenarioConfig(
            scenario=scenario,
            domain=domain,
            mesh=mesh,
            N=int(full["N"]),
            h=float(full["h"]),
            t_f=float(full["t_f"]),
            collision=CollisionParams(**full.get("collision", {})),
            control=ControlParams(**full.get("control", {})),
            band=band,
            n_z=int(full.get("n_z", 4)),
            z_fixed=None if full.get("z_fixed") is None else float(full["z_fixed"]),
            temperature_profile=full.get("temperature_profile", "base"),
            seed=int(full.get("seed", 0)),
            snapshot_times=tuple(float(t) for t in full.get("snapshot_times", ())),
            output_dir=str(full.get("output_dir", "out")),
            extras=dict(full.get("extras", {})),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from None
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def read_raw(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def load_config(path: str | Path | None = None, overrides=None) -> tuple[ScenarioConfig, dict]:
    """Returns the scenario and the raw mapping (which holds compare/sweep plans)."""
    raw = read_raw(path) if path is not None else {}
    raw = apply_overrides(raw, overrides)
    return build_config(raw), raw


def config_with(config: ScenarioConfig, **changes) -> ScenarioConfig:
    """Copy with top-level or nested (``control=dict(...)``) replacements."""
    nested = {}
    for name in ("control", "collision"):
        if isinstance(changes.get(name), dict):
            nested[name] = dataclasses.replace(getattr(config, name), **changes.pop(name))
    return dataclasses.replace(config, **changes, **nested)
