"""Receding-horizon simulation loop.

Each tick: re-certify every viable coalition against every active evader,
assign coalitions with the exact matching solver, apply the feedback pursuit
law to matched pursuers and plain pursuit to the rest, integrate one step,
then retire captured or arrived evaders.  Pursuers act on the evasion team's
current control inputs, which the information model makes available to them.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .allocation import (
    Edge,
    GameGraph,
    ZMode,
    build_conflict_graph,
    build_game_graph,
    coalition_vertices,
    solve_bip,
)
from .erp import (
    Certificate,
    Winner,
    certify_1v1,
    certify_2v1,
    cm1,
    pursuit_control_1v1,
    pursuit_control_2v1,
    relaxed_ratio_bound,
)
from .errors import ErpsimError
from .geometry import NumericConfig, vec
from .pef import PairState
from .safe_distance import CoalitionState, solve_safe_distance
from .world import (
    EvaderState,
    EvaderStatus,
    GoalRegion,
    PursuerState,
    capture_check,
    project_to_goal,
    step_evader,
    step_pursuer,
)

logger = logging.getLogger("erpsim.engine")


def pursuer_id(i: int) -> str:
    return f"P{i + 1}"


def evader_id(j: int) -> str:
    return f"E{j + 1}"


def coalition_id(coalition: tuple[int, ...]) -> str:
    return "+".join(pursuer_id(i) for i in coalition)


@dataclass
class WorldView:
    """Read-only snapshot handed to evader strategies."""

    goal: GoalRegion
    pursuers: list[PursuerState]
    evaders: list[EvaderState]


class EvaderStrategy(ABC):
    """Produces a control in the closed unit disk each tick."""

    kind = "abstract"

    @abstractmethod
    def control(self, t: float, me: EvaderState, view: WorldView) -> np.ndarray: ...

    def spec(self) -> dict[str, Any]:
        return {"kind": self.kind}


class GreedyToGoal(EvaderStrategy):
    """Head straight for the closest goal point at full speed."""

    kind = "greedy_to_goal"

    def control(self, t: float, me: EvaderState, view: WorldView) -> np.ndarray:
        target = project_to_goal(view.goal, me.pos)
        d = target - me.pos
        n = math.hypot(d[0], d[1])
        if n < 1e-12:
            return vec(0.0, 0.0)
        return d / n


class ConstantHeading(EvaderStrategy):
    """Full speed along a fixed direction."""

    kind = "constant_heading"

    def __init__(self, phi: float):
        self.phi = float(phi)

    def control(self, t: float, me: EvaderState, view: WorldView) -> np.ndarray:
        return vec(math.cos(self.phi), math.sin(self.phi))

    def spec(self) -> dict[str, Any]:
        return {"kind": self.kind, "phi": self.phi}


class Scripted(EvaderStrategy):
    """Piecewise-constant control: rows of (t_from, ux, uy); the row with the
    largest t_from not exceeding the current time applies, zero before the
    first row."""

    kind = "scripted"

    def __init__(self, rows: list[tuple[float, float, float]]):
        self.rows = sorted((float(a), float(b), float(c)) for a, b, c in rows)

    def control(self, t: float, me: EvaderState, view: WorldView) -> np.ndarray:
        u = vec(0.0, 0.0)
        for t_from, ux, uy in self.rows:
            if t_from <= t + 1e-12:
                u = vec(ux, uy)
            else:
                break
        n = math.hypot(u[0], u[1])
        return u / n if n > 1.0 else u

    def spec(self) -> dict[str, Any]:
        return {"kind": self.kind, "rows": [list(r) for r in self.rows]}


class RandomWalk(EvaderStrategy):
    """Unit-speed direction redrawn every ``hold`` seconds from a seeded
    stream; identical seeds give identical runs."""

    kind = "random_walk"

    def __init__(self, seed: int, hold: float = 0.5):
        self.seed = int(seed)
        self.hold = float(hold)
        self._rng = np.random.default_rng(self.seed)
        self._window = -1
        self._u = vec(1.0, 0.0)

    def control(self, t: float, me: EvaderState, view: WorldView) -> np.ndarray:
        window = int(t / self.hold + 1e-12)
        while self._window < window:
            ang = self._rng.uniform(0.0, 2.0 * math.pi)
            self._u = vec(math.cos(ang), math.sin(ang))
            self._window += 1
        return self._u

    def spec(self) -> dict[str, Any]:
        return {"kind": self.kind, "hold": self.hold}


def strategy_from_spec(spec: dict[str, Any], default_seed: int) -> EvaderStrategy:
    kind = spec.get("kind", "greedy_to_goal")
    if kind == "greedy_to_goal":
        return GreedyToGoal()
    if kind == "constant_heading":
        return ConstantHeading(spec["phi"])
    if kind == "scripted":
        return Scripted([tuple(r) for r in spec["rows"]])
    if kind == "random_walk":
        return RandomWalk(seed=int(spec.get("seed", default_seed)), hold=float(spec.get("hold", 0.5)))
    raise ValueError(f"unknown evader strategy kind: {kind!r}")


@dataclass
class Scenario:
    """A complete, reproducible simulation setup."""

    pursuers: list[PursuerState]
    evaders: list[EvaderState]
    evader_strategies: list[dict[str, Any]]
    goal: GoalRegion
    dt: float = 0.005
    max_time: float = 60.0
    z_mode: ZMode = ZMode.MAX_RHO
    numeric: NumericConfig = field(default_factory=NumericConfig)
    seed: int = 0
    snapshot_times: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.max_time <= 0.0:
            raise ValueError("max_time must be positive")
        if len(self.evader_strategies) != len(self.evaders):
            raise ValueError("one strategy spec per evader required")
        for p in self.pursuers:
            for e in self.evaders:
                if p.v_max / e.v_max <= 1.0:
                    raise ValueError("every pursuer must be faster than every evader")


@dataclass
class TickRecord:
    t: float
    pursuers: list[tuple[float, float, float, float]]  # x, y, heading, turn input
    evaders: list[tuple[float, float, float, float, str]]  # x, y, ux, uy, status
    edge_rhos: dict[tuple[tuple[int, ...], int], float]
    matching: tuple[tuple[tuple[int, ...], int], ...]


@dataclass
class Event:
    t: float
    kind: str  # Capture | Arrival | MatchChange | SolverFailure
    actors: list[str]


@dataclass
class TrajectoryLog:
    ticks: list[TickRecord] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    final_pursuers: list[PursuerState] = field(default_factory=list)
    final_evaders: list[EvaderState] = field(default_factory=list)

    def min_goal_distance(self, G: GoalRegion, j: int) -> float:
        """Smallest distance from evader j to the goal region over the run."""
        best = math.inf
        for tick in self.ticks:
            pos = vec(tick.evaders[j][0], tick.evaders[j][1])
            d = float(np.linalg.norm(pos - project_to_goal(G, pos)))
            best = min(best, d)
        return best


def fallback_pursuit(p: PursuerState, target: EvaderState) -> float:
    """Plain pursuit turn input: full rate toward the target bearing, zero
    once the bearing is (numerically) dead ahead."""
    d = target.pos - p.pos
    bearing = math.atan2(d[1], d[0])
    s = math.sin(bearing - p.heading)
    c = math.cos(bearing - p.heading)
    if abs(s) < 1e-12:
        return 0.0 if c > 0.0 else 1.0
    return 1.0 if s > 0.0 else -1.0


def _gate_possible(p: PursuerState, e: EvaderState) -> bool:
    """Static parameter screen: can this pursuer ever certify against this
    evader (strictly, or via the aligned relaxed bound)."""
    alpha = p.v_max / e.v_max
    if alpha <= 3.0:
        return False
    ratio = p.capture_radius / p.kappa
    return ratio > cm1(alpha) or ratio >= relaxed_ratio_bound(alpha)


def _clamp(u: float) -> float:
    return min(1.0, max(-1.0, u))


class _Certifier:
    """Per-tick certificate computation with warm-started solves."""

    def __init__(self, scenario: Scenario):
        self.goal = scenario.goal
        self.cfg = scenario.numeric
        self.warm: dict[tuple[tuple[int, ...], int], tuple[np.ndarray, np.ndarray]] = {}
        self.sols: dict[tuple[tuple[int, ...], int], Any] = {}
        self.pursuers: list[PursuerState] = []
        self.evaders: list[EvaderState] = []
        # static screen: (coalition, evader) pairs that can never certify
        self.possible: dict[tuple[tuple[int, ...], int], bool] = {}
        for coalition in coalition_vertices(len(scenario.pursuers)):
            for j, e in enumerate(scenario.evaders):
                ok = any(_gate_possible(scenario.pursuers[i], e) for i in coalition)
                self.possible[(coalition, j)] = ok

    def begin_tick(self, pursuers: list[PursuerState], evaders: list[EvaderState]) -> None:
        self.pursuers = pursuers
        self.evaders = evaders
        self.sols = {}

    def solve(self, coalition: tuple[int, ...], j: int):
        key = (coalition, j)
        if key in self.sols:
            return self.sols[key]
        X = CoalitionState(tuple(self.pursuers[i] for i in coalition), self.evaders[j])
        sol = solve_safe_distance(X, self.goal, self.cfg, warm=self.warm.get(key))
        self.warm[key] = (sol.x_i, sol.x_g)
        self.sols[key] = sol
        return sol

    def __call__(self, coalition: tuple[int, ...], j: int) -> Certificate:
        if not self.possible[(coalition, j)]:
            return Certificate(
                winner=Winner.NOT_CERTIFIED,
                threshold=math.inf,
                observed_rho=math.nan,
            )
        sol = self.solve(coalition, j)
        if len(coalition) == 1:
            pair = PairState(self.pursuers[coalition[0]], self.evaders[j])
            return certify_1v1(pair, self.goal, relaxed=True, cfg=self.cfg, sol=sol)
        X = CoalitionState(tuple(self.pursuers[i] for i in coalition), self.evaders[j])
        singles = tuple(self.solve((i,), j).rho for i in coalition)
        return certify_2v1(
            X, self.goal, relaxed=True, cfg=self.cfg, sol=sol, singleton_rhos=singles
        )


def run_simulation(scenario: Scenario) -> TrajectoryLog:
    """Run the receding-horizon loop until every evader retires or time runs
    out.  Identical scenarios (including seed) produce identical logs."""
    G = scenario.goal
    cfg = scenario.numeric
    pursuers = list(scenario.pursuers)
    evaders = list(scenario.evaders)
    seeds = np.random.SeedSequence(scenario.seed).spawn(len(evaders))
    strategies = [
        strategy_from_spec(spec, default_seed=int(s.generate_state(1)[0] % (2**31)))
        for spec, s in zip(scenario.evader_strategies, seeds)
    ]
    log = TrajectoryLog()
    certifier = _Certifier(scenario)
    prev_assignment: dict[int, tuple[int, ...]] = {}
    sticky_certs: dict[tuple[tuple[int, ...], int], Certificate] = {}

    # evaders already inside the goal register as arrivals immediately
    for j, e in enumerate(evaders):
        if e.status is EvaderStatus.ACTIVE and G.value(e.pos) <= 0.0:
            evaders[j] = replace(e, status=EvaderStatus.ARRIVED)
            log.events.append(Event(t=0.0, kind="Arrival", actors=[evader_id(j)]))

    n_steps = int(round(scenario.max_time / scenario.dt))
    for step in range(n_steps):
        t = step * scenario.dt
        active = [j for j, e in enumerate(evaders) if e.status is EvaderStatus.ACTIVE]
        if not active:
            break
        certifier.begin_tick(pursuers, evaders)
        graph = build_game_graph(
            pursuers,
            [evaders[j] for j in active],
            G,
            cfg,
            evader_ids=active,
            certifier=_certifier_with_failures(certifier, log, t),
        )
        # A matched pairing stays guaranteed once certified (the winning
        # strategy keeps the safe distance positive), so keep its edge alive
        # even when the conservative threshold re-check lapses mid-turn.
        present = {(e.coalition, e.evader) for e in graph.edges}
        for ev, coal in prev_assignment.items():
            if ev not in active or (coal, ev) in present:
                continue
            try:
                sol = certifier.solve(coal, ev)
            except ErpsimError:
                continue
            if sol.rho > 0.0:
                graph.edges.append(
                    Edge(
                        coalition=coal,
                        evader=ev,
                        rho=sol.rho,
                        certificate=sticky_certs[(coal, ev)],
                    )
                )
        for e in graph.edges:
            sticky_certs[(e.coalition, e.evader)] = e.certificate
        conflicts = build_conflict_graph(graph)
        matching = solve_bip(graph, conflicts, scenario.z_mode)
        assignment = {ev: coal for coal, ev in matching.assignments}
        if assignment != prev_assignment:
            changed = sorted(
                ev
                for ev in set(assignment) | set(prev_assignment)
                if assignment.get(ev) != prev_assignment.get(ev)
            )
            actors: list[str] = []
            for ev in changed:
                actors.append(evader_id(ev))
                coal = assignment.get(ev)
                actors.append(coalition_id(coal) if coal is not None else "unmatched")
            log.events.append(Event(t=t, kind="MatchChange", actors=actors))
            prev_assignment = dict(assignment)

        view = WorldView(goal=G, pursuers=list(pursuers), evaders=list(evaders))
        e_controls: list[np.ndarray] = []
        for j, e in enumerate(evaders):
            if e.status is EvaderStatus.ACTIVE:
                u = np.asarray(strategies[j].control(t, e, view), dtype=np.float64)
                n = math.hypot(u[0], u[1])
                if n > 1.0:
                    u = u / n
            else:
                u = vec(0.0, 0.0)
            e_controls.append(u)

        p_controls = [0.0] * len(pursuers)
        matched_pursuers: set[int] = set()
        for ev, coal in sorted(assignment.items()):
            sol = certifier.sols.get((coal, ev))
            try:
                if len(coal) == 1:
                    pair = PairState(pursuers[coal[0]], evaders[ev])
                    u = pursuit_control_1v1(
                        pair, G, e_controls[ev], cfg, sol=sol, dt=scenario.dt
                    )
                    p_controls[coal[0]] = _clamp(u)
                else:
                    X = CoalitionState(tuple(pursuers[i] for i in coal), evaders[ev])
                    u1, u2 = pursuit_control_2v1(
                        X, G, e_controls[ev], cfg, sol=sol, dt=scenario.dt
                    )
                    p_controls[coal[0]] = _clamp(u1)
                    p_controls[coal[1]] = _clamp(u2)
            except ErpsimError as exc:
                logger.warning("strategy failure at t=%.3f for %s: %s", t, coal, exc)
                log.events.append(
                    Event(t=t, kind="SolverFailure", actors=[coalition_id(coal), evader_id(ev)])
                )
                for i in coal:
                    p_controls[i] = fallback_pursuit(pursuers[i], evaders[ev])
            matched_pursuers.update(coal)
        for i, p in enumerate(pursuers):
            if i in matched_pursuers:
                continue
            # plain pursuit of the nearest active evader
            best_j = min(
                active,
                key=lambda j: float(np.linalg.norm(evaders[j].pos - p.pos)),
            )
            p_controls[i] = fallback_pursuit(p, evaders[best_j])

        log.ticks.append(
            TickRecord(
                t=t,
                pursuers=[
                    (float(p.pos[0]), float(p.pos[1]), p.heading, p_controls[i])
                    for i, p in enumerate(pursuers)
                ],
                evaders=[
                    (
                        float(e.pos[0]),
                        float(e.pos[1]),
                        float(e_controls[j][0]),
                        float(e_controls[j][1]),
                        e.status.value,
                    )
                    for j, e in enumerate(evaders)
                ],
                edge_rhos={(e.coalition, e.evader): e.rho for e in graph.edges},
                matching=matching.assignments,
            )
        )

        pursuers = [
            step_pursuer(p, p_controls[i], scenario.dt) for i, p in enumerate(pursuers)
        ]
        for j in active:
            evaders[j] = step_evader(evaders[j], e_controls[j], scenario.dt)

        t_next = (step + 1) * scenario.dt
        for j in list(active):
            e = evaders[j]
            captured_by = [i for i, p in enumerate(pursuers) if capture_check(p, e)]
            if captured_by:
                evaders[j] = replace(e, status=EvaderStatus.CAPTURED)
                log.events.append(
                    Event(
                        t=t_next,
                        kind="Capture",
                        actors=[pursuer_id(captured_by[0]), evader_id(j)],
                    )
                )
            elif G.value(e.pos) <= 0.0:
                evaders[j] = replace(e, status=EvaderStatus.ARRIVED)
                log.events.append(Event(t=t_next, kind="Arrival", actors=[evader_id(j)]))

    log.final_pursuers = pursuers
    log.final_evaders = evaders
    return log


def _certifier_with_failures(certifier: _Certifier, log: TrajectoryLog, t: float):
    """Record a SolverFailure event before the graph builder drops the edge."""

    def run(coalition: tuple[int, ...], j: int) -> Certificate:
        try:
            return certifier(coalition, j)
        except ErpsimError:
            log.events.append(
                Event(t=t, kind="SolverFailure", actors=[coalition_id(coalition), evader_id(j)])
            )
            raise

    return run


__all__ = [
    "ConstantHeading",
    "EvaderStrategy",
    "Event",
    "GreedyToGoal",
    "RandomWalk",
    "Scenario",
    "Scripted",
    "TickRecord",
    "TrajectoryLog",
    "WorldView",
    "coalition_id",
    "evader_id",
    "fallback_pursuit",
    "pursuer_id",
    "run_simulation",
    "strategy_from_spec",
]
