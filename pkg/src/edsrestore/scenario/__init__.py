"""Scenario files, bundled scenarios and their lookup."""

from __future__ import annotations

from pathlib import Path

from .io import (
    FORMAT,
    VERSION,
    ScenarioError,
    load_scenario,
    network_from_dict,
    network_to_dict,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    state_to_dict,
)
from .library import BUILDERS, DATA_DIR
from .types import Scenario, ScenarioConfig


def builtin_scenarios() -> dict[str, Scenario]:
    """Bundled scenarios loaded from their packaged JSON files."""
    return {name: load_scenario(DATA_DIR / f"{name}.json") for name in BUILDERS}


def resolve_scenario(name_or_path: str) -> Scenario:
    """A bundled scenario by name, else a scenario file path."""
    if name_or_path in BUILDERS:
        return load_scenario(DATA_DIR / f"{name_or_path}.json")
    path = Path(name_or_path)
    if not path.exists():
        raise ScenarioError([f"no bundled scenario or file named {name_or_path!r}"])
    return load_scenario(path)


__all__ = [
    "FORMAT", "VERSION", "Scenario", "ScenarioConfig", "ScenarioError", "builtin_scenarios",
    "load_scenario", "network_from_dict", "network_to_dict", "resolve_scenario", "save_scenario",
    "scenario_from_dict", "scenario_to_dict", "state_to_dict",
]
