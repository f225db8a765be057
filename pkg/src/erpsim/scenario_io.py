"""Scenario file loading, validation, and serialization.

Scenarios are versioned YAML documents.  Validation is strict: unknown keys
are rejected so typos fail loudly instead of silently changing a run.
"""

from __future__ import annotations

from typing import Any

import yaml

from .allocation import ZMode
from .engine import Scenario
from .geometry import NumericConfig, vec
from .world import DiskGoal, EllipseGoal, EvaderState, GoalRegion, PursuerState


class ScenarioError(ValueError):
    """Raised for malformed or invalid scenario documents."""


_TOP_KEYS = {
    "version",
    "seed",
    "dt",
    "max_time",
    "z_mode",
    "goal",
    "numeric",
    "snapshots",
    "pursuers",
    "evaders",
}
_GOAL_KEYS = {"kind", "center", "radius", "semi_axes"}
_NUMERIC_KEYS = {"eps_active", "eps_dist", "max_iter"}
_PURSUER_KEYS = {"pos", "heading", "speed", "turn_radius", "capture_radius"}
_EVADER_KEYS = {"pos", "speed", "strategy"}
_STRATEGY_KEYS = {
    "greedy_to_goal": {"kind"},
    "constant_heading": {"kind", "phi"},
    "scripted": {"kind", "rows"},
    "random_walk": {"kind", "seed", "hold"},
}
_Z_MODES = {m.value: m for m in ZMode}


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ScenarioError(msg)


def _check_keys(d: dict, allowed: set[str], where: str) -> None:
    _require(isinstance(d, dict), f"{where}: expected a mapping")
    unknown = set(d) - allowed
    _require(not unknown, f"{where}: unknown keys {sorted(unknown)}")


def _point(v: Any, where: str):
    _require(
        isinstance(v, (list, tuple)) and len(v) == 2,
        f"{where}: expected a [x, y] pair",
    )
    return vec(float(v[0]), float(v[1]))


def _parse_goal(d: dict) -> GoalRegion:
    _check_keys(d, _GOAL_KEYS, "goal")
    kind = d.get("kind")
    if kind == "disk":
        _require("radius" in d and "center" in d, "goal: disk needs center and radius")
        return DiskGoal(center=_point(d["center"], "goal.center"), radius=float(d["radius"]))
    if kind == "ellipse":
        _require(
            "semi_axes" in d and "center" in d, "goal: ellipse needs center and semi_axes"
        )
        a, b = d["semi_axes"]
        return EllipseGoal(center=_point(d["center"], "goal.center"), semi_axes=(float(a), float(b)))
    raise ScenarioError(f"goal: unknown kind {kind!r}")


def _parse_strategy(d: Any, idx: int) -> dict[str, Any]:
    if d is None:
        d = {"kind": "greedy_to_goal"}
    _require(isinstance(d, dict), f"evaders[{idx}].strategy: expected a mapping")
    kind = d.get("kind")
    _require(
        kind in _STRATEGY_KEYS,
        f"evaders[{idx}].strategy: unknown kind {kind!r} (choose from {sorted(_STRATEGY_KEYS)})",
    )
    _check_keys(d, _STRATEGY_KEYS[kind], f"evaders[{idx}].strategy")
    if kind == "constant_heading":
        _require("phi" in d, f"evaders[{idx}].strategy: constant_heading needs phi")
    if kind == "scripted":
        rows = d.get("rows")
        _require(
            isinstance(rows, list)
            and all(isinstance(r, (list, tuple)) and len(r) == 3 for r in rows),
            f"evaders[{idx}].strategy: scripted needs rows of [t_from, ux, uy]",
        )
    return {k: (list(map(list, v)) if k == "rows" else v) for k, v in d.items()}


def scenario_from_dict(doc: dict) -> Scenario:
    _check_keys(doc, _TOP_KEYS, "top level")
    _require(doc.get("version") == 1, "top level: version must be 1")
    _require("goal" in doc, "top level: goal is required")
    _require(bool(doc.get("pursuers")), "top level: at least one pursuer required")
    _require(bool(doc.get("evaders")), "top level: at least one evader required")
    goal = _parse_goal(doc["goal"])
    pursuers = []
    for i, p in enumerate(doc["pursuers"]):
        _check_keys(p, _PURSUER_KEYS, f"pursuers[{i}]")
        for key in _PURSUER_KEYS:
            _require(key in p, f"pursuers[{i}]: missing {key}")
        try:
            pursuers.append(
                PursuerState(
                    pos=_point(p["pos"], f"pursuers[{i}].pos"),
                    heading=float(p["heading"]),
                    v_max=float(p["speed"]),
                    kappa=float(p["turn_radius"]),
                    capture_radius=float(p["capture_radius"]),
                )
            )
        except ValueError as exc:
            raise ScenarioError(f"pursuers[{i}]: {exc}") from exc
    evaders = []
    strategies = []
    for i, e in enumerate(doc["evaders"]):
        _check_keys(e, _EVADER_KEYS, f"evaders[{i}]")
        _require("pos" in e and "speed" in e, f"evaders[{i}]: pos and speed required")
        try:
            evaders.append(
                EvaderState(pos=_point(e["pos"], f"evaders[{i}].pos"), v_max=float(e["speed"]))
            )
        except ValueError as exc:
            raise ScenarioError(f"evaders[{i}]: {exc}") from exc
        strategies.append(_parse_strategy(e.get("strategy"), i))
    numeric = NumericConfig()
    if "numeric" in doc:
        _check_keys(doc["numeric"], _NUMERIC_KEYS, "numeric")
        kwargs = {k: (int(v) if k == "max_iter" else float(v)) for k, v in doc["numeric"].items()}
        try:
            numeric = NumericConfig(**kwargs)
        except ValueError as exc:
            raise ScenarioError(f"numeric: {exc}") from exc
    z_mode_name = doc.get("z_mode", "max_rho")
    _require(
        z_mode_name in _Z_MODES,
        f"top level: z_mode must be one of {sorted(_Z_MODES)}",
    )
    snapshots = doc.get("snapshots", [])
    _require(
        isinstance(snapshots, list) and all(isinstance(x, (int, float)) for x in snapshots),
        "snapshots: expected a list of times",
    )
    try:
        return Scenario(
            pursuers=pursuers,
            evaders=evaders,
            evader_strategies=strategies,
            goal=goal,
            dt=float(doc.get("dt", 0.005)),
            max_time=float(doc.get("max_time", 60.0)),
            z_mode=_Z_MODES[z_mode_name],
            numeric=numeric,
            seed=int(doc.get("seed", 0)),
            snapshot_times=[float(x) for x in snapshots],
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def scenario_to_dict(s: Scenario) -> dict:
    if isinstance(s.goal, DiskGoal):
        goal = {
            "kind": "disk",
            "center": [float(s.goal.center[0]), float(s.goal.center[1])],
            "radius": float(s.goal.radius),
        }
    elif isinstance(s.goal, EllipseGoal):
        goal = {
            "kind": "ellipse",
            "center": [float(s.goal.center[0]), float(s.goal.center[1])],
            "semi_axes": [float(s.goal.semi_axes[0]), float(s.goal.semi_axes[1])],
        }
    else:
        raise ScenarioError("only disk and ellipse goals are serializable")
    return {
        "version": 1,
        "seed": s.seed,
        "dt": s.dt,
        "max_time": s.max_time,
        "z_mode": s.z_mode.value,
        "goal": goal,
        "numeric": {
            "eps_active": s.numeric.eps_active,
            "eps_dist": s.numeric.eps_dist,
            "max_iter": s.numeric.max_iter,
        },
        "snapshots": list(s.snapshot_times),
        "pursuers": [
            {
                "pos": [float(p.pos[0]), float(p.pos[1])],
                "heading": float(p.heading),
                "speed": float(p.v_max),
                "turn_radius": float(p.kappa),
                "capture_radius": float(p.capture_radius),
            }
            for p in s.pursuers
        ],
        "evaders": [
            {
                "pos": [float(e.pos[0]), float(e.pos[1])],
                "speed": float(e.v_max),
                "strategy": dict(spec),
            }
            for e, spec in zip(s.evaders, s.evader_strategies)
        ],
    }


def load_scenario(path: str) -> Scenario:
    """Parse and validate a scenario file.  YAML syntax errors keep their
    line/column marks; schema violations raise :class:`ScenarioError`."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    _require(isinstance(doc, dict), "scenario file must contain a mapping")
    return scenario_from_dict(doc)


def save_scenario(s: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scenario_to_dict(s), fh, sort_keys=False)


__all__ = [
    "ScenarioError",
    "load_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
]
