"""Scenario files: TOML documents describing a monitoring campaign.

Sections and keys (numeric keys carry their unit as a suffix)::

    [grid]        rows, cols, cell_time_s, depot_x_cells, depot_y_cells,
                  cruise_speed_ratio
    [model]       coupling_per_h, process_std_mm, initial_variance_mm2,
                  disturbance_gain_per_mm
    [sensors]     fixed_areas, fixed_variance_mm2, mobile_variance_mm2
    [budget]      budget_s, or block_rows and block_cols
    [simulation]  horizon_h, gap_min_h, gap_max_h, seed,
                  rain_probability_per_h, rain_mean_mm, rain_duration_h
    [strategy]    strategies, n_rollouts, reorder, max_iters,
                  heuristic_budget_scale, baseline_budget_scale,
                  exact_budget_scale

``rows`` and ``cols`` are mandatory, as is one way of fixing the budget.
Unknown sections or keys are errors.
"""

from __future__ import annotations

import sys
import warnings
from importlib import resources
from pathlib import Path

from .exceptions import ScenarioError
from .simulator import STRATEGIES, ScenarioConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["SCHEMA", "load_scenario", "parse_scenario", "bundled_scenarios", "resolve_scenario"]

# section -> key -> (ScenarioConfig field, expected type)
SCHEMA = {
    "grid": {
        "rows": ("rows", int),
        "cols": ("cols", int),
        "cell_time_s": ("cell_time_s", float),
        "depot_x_cells": (None, float),
        "depot_y_cells": (None, float),
        "cruise_speed_ratio": ("cruise_speed_ratio", float),
    },
    "model": {
        "coupling_per_h": ("coupling", float),
        "process_std_mm": ("process_std", float),
        "initial_variance_mm2": ("initial_variance", float),
        "disturbance_gain_per_mm": ("disturbance_gain", float),
    },
    "sensors": {
        "fixed_areas": ("fixed_areas", list),
        "fixed_variance_mm2": ("fixed_variance", float),
        "mobile_variance_mm2": ("mobile_variance", (float, list)),
    },
    "budget": {
        "budget_s": ("budget_s", float),
        "block_rows": (None, int),
        "block_cols": (None, int),
    },
    "simulation": {
        "horizon_h": ("horizon_h", int),
        "gap_min_h": ("gap_min_h", int),
        "gap_max_h": ("gap_max_h", int),
        "seed": ("seed", int),
        "rain_probability_per_h": ("rain_probability", float),
        "rain_mean_mm": ("rain_mean_mm", float),
        "rain_duration_h": ("rain_duration_h", float),
    },
    "strategy": {
        "strategies": ("strategies", list),
        "n_rollouts": ("n_rollouts", int),
        "reorder": ("reorder", bool),
        "max_iters": ("max_iters", int),
        "heuristic_budget_scale": (None, float),
        "baseline_budget_scale": (None, float),
        "exact_budget_scale": (None, float),
    },
}

MANDATORY = (("grid", "rows"), ("grid", "cols"))


def _coerce(section, key, value, kind):
    kinds = kind if isinstance(kind, tuple) else (kind,)
    if isinstance(value, bool):
        if bool in kinds:
            return value
    elif isinstance(value, int) and int in kinds:
        return value
    elif isinstance(value, (int, float)) and float in kinds:
        return float(value)
    elif isinstance(value, list) and list in kinds:
        return value
    names = " or ".join(k.__name__ for k in kinds)
    raise ScenarioError(f"[{section}] {key}: expected {names}, got {value!r}", section=section, key=key)


def parse_scenario(text: str, source: str = "<string>") -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from TOML text.

    Raises
    ------
    ScenarioError
        Malformed TOML, unknown or missing keys, wrong value types, or
        values the configuration rejects.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{source}: {exc}") from None
    for section, body in doc.items():
        if section not in SCHEMA:
            raise ScenarioError(f"{source}: unknown section [{section}]", section=section)
        if not isinstance(body, dict):
            raise ScenarioError(f"{source}: [{section}] must be a table", section=section)
        for key in body:
            if key not in SCHEMA[section]:
                raise ScenarioError(f"{source}: unknown key [{section}] {key}", section=section, key=key)
    for section, key in MANDATORY:
        if key not in doc.get(section, {}):
            raise ScenarioError(f"{source}: missing key [{section}] {key}", section=section, key=key)

    kw = {}
    vals = {}
    for section, body in doc.items():
        for key, value in body.items():
            target, kind = SCHEMA[section][key]
            value = _coerce(section, key, value, kind)
            vals[(section, key)] = value
            if target is not None:
                kw[target] = value

    budget = doc.get("budget", {})
    has_block = "block_rows" in budget or "block_cols" in budget
    if "budget_s" in budget and has_block:
        raise ScenarioError(f"{source}: [budget] takes budget_s or a block, not both", section="budget")
    if has_block:
        for key in ("block_rows", "block_cols"):
            if key not in budget:
                raise ScenarioError(f"{source}: missing key [budget] {key}", section="budget", key=key)
        kw["block"] = (vals[("budget", "block_rows")], vals[("budget", "block_cols")])
    elif "budget_s" not in budget:
        raise ScenarioError(f"{source}: missing key [budget] budget_s", section="budget", key="budget_s")

    grid = doc["grid"]
    if "depot_x_cells" in grid or "depot_y_cells" in grid:
        kw["depot_xy"] = (vals.get(("grid", "depot_x_cells"), 0.0), vals.get(("grid", "depot_y_cells"), 0.0))
    if "fixed_areas" in kw:
        if not all(isinstance(a, int) and not isinstance(a, bool) for a in kw["fixed_areas"]):
            raise ScenarioError(f"{source}: [sensors] fixed_areas must list integers",
                                section="sensors", key="fixed_areas")
        kw["fixed_areas"] = tuple(kw["fixed_areas"])
    if isinstance(kw.get("mobile_variance"), list):
        kw["mobile_variance"] = tuple(float(v) for v in kw["mobile_variance"])
    if "strategies" in kw:
        bad = [s for s in kw["strategies"] if s not in STRATEGIES]
        if bad:
            raise ScenarioError(f"{source}: [strategy] strategies has unknown entries {bad}",
                                section="strategy", key="strategies")
        kw["strategies"] = tuple(kw["strategies"])
    scale = {}
    for name in STRATEGIES:
        key = f"{name}_budget_scale"
        if ("strategy", key) in vals:
            scale[name] = vals[("strategy", key)]
    kw["budget_scale"] = scale
    try:
        cfg = ScenarioConfig(**kw)
    except ValueError as exc:
        raise ScenarioError(f"{source}: {exc}") from None
    budget = cfg.base_budget()
    if budget > 0.1 * 3600.0:
        warnings.warn(f"{source}: budget {budget:g} s is not small against the 1 h model step",
                      stacklevel=2)
    return cfg


def load_scenario(path) -> ScenarioConfig:
    """Read and parse a scenario file (or the name of a bundled scenario)."""
    path = resolve_scenario(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}") from None
    return parse_scenario(text, source=str(path))


def bundled_scenarios() -> dict:
    """``{name: path}`` of the scenarios shipped with the package."""
    root = resources.files("infoplan") / "scenarios"
    return {p.name[:-5]: Path(str(p)) for p in root.iterdir() if p.name.endswith(".toml")}


def resolve_scenario(name_or_path) -> Path:
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = bundled_scenarios()
    if str(name_or_path) in bundled:
        return bundled[str(name_or_path)]
    return p
