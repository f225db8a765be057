"""Coalition-to-evader assignment.

Certified coalition/evader pairs form a bipartite graph; pairs of its edges
that share a pursuer conflict.  The assignment maximizing the number of
covered evaders (with a bounded tie-break on summed safe distances) is a
small binary integer program, solved exactly by depth-first branch and bound
with deterministic lexicographic ordering.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field

from .erp import Certificate, certify_1v1, certify_2v1
from .errors import ErpsimError
from .geometry import DEFAULT_CONFIG, NumericConfig
from .pef import PairState
from .safe_distance import CoalitionState
from .world import EvaderState, GoalRegion, PursuerState

logger = logging.getLogger("erpsim.allocation")


class ZMode(enum.Enum):
    ZERO = "zero"
    MAX_RHO = "max_rho"
    MIN_RHO = "min_rho"


@dataclass(frozen=True)
class Edge:
    """A certified coalition-evader pairing."""

    coalition: tuple[int, ...]
    evader: int
    rho: float
    certificate: Certificate


@dataclass
class GameGraph:
    """Bipartite winning graph: coalition vertices (size one and two), evader
    vertices, and one edge per certified pairing."""

    n_pursuers: int
    coalition_vertices: list[tuple[int, ...]]
    evader_vertices: list[int]
    edges: list[Edge] = field(default_factory=list)


@dataclass
class ConflictGraph:
    """Conflicts between game-graph edges: vertices are edge indices, an edge
    connects two assignments that involve a common pursuer."""

    n_edges: int
    conflicts: set[frozenset[int]] = field(default_factory=set)


@dataclass(frozen=True)
class Matching:
    assignments: tuple[tuple[tuple[int, ...], int], ...]
    objective: float
    z_mode: ZMode


def coalition_vertices(n_pursuers: int) -> list[tuple[int, ...]]:
    """All coalitions of size one or two, in lexicographic order."""
    singles = [(i,) for i in range(n_pursuers)]
    pairs = list(itertools.combinations(range(n_pursuers), 2))
    return singles + pairs


def build_game_graph(
    pursuers: list[PursuerState],
    evaders: list[EvaderState],
    G: GoalRegion,
    cfg: NumericConfig = DEFAULT_CONFIG,
    relaxed: bool = True,
    evader_ids: list[int] | None = None,
    certifier=None,
) -> GameGraph:
    """Certify every coalition of size at most two against every evader.

    ``certifier`` optionally replaces the certificate computation (the engine
    passes a caching wrapper); it must map (coalition, evader_id) to a
    Certificate.  Solver failures drop the edge with a warning.
    """
    ids = evader_ids if evader_ids is not None else list(range(len(evaders)))
    graph = GameGraph(
        n_pursuers=len(pursuers),
        coalition_vertices=coalition_vertices(len(pursuers)),
        evader_vertices=list(ids),
    )
    for coalition in graph.coalition_vertices:
        for ev_id, evader in zip(ids, evaders):
            try:
                if certifier is not None:
                    cert = certifier(coalition, ev_id)
                elif len(coalition) == 1:
                    cert = certify_1v1(
                        PairState(pursuers[coalition[0]], evader), G, relaxed=relaxed, cfg=cfg
                    )
                else:
                    X = CoalitionState(
                        tuple(pursuers[i] for i in coalition), evader
                    )
                    cert = certify_2v1(X, G, relaxed=relaxed, cfg=cfg)
            except ErpsimError as exc:
                logger.warning(
                    "certification failed for coalition %s vs evader %s: %s",
                    coalition,
                    ev_id,
                    exc,
                )
                continue
            if cert.certified:
                graph.edges.append(
                    Edge(coalition=coalition, evader=ev_id, rho=cert.observed_rho, certificate=cert)
                )
    return graph


def build_conflict_graph(graph: GameGraph) -> ConflictGraph:
    cg = ConflictGraph(n_edges=len(graph.edges))
    for a in range(len(graph.edges)):
        for b in range(a + 1, len(graph.edges)):
            if set(graph.edges[a].coalition) & set(graph.edges[b].coalition):
                cg.conflicts.add(frozenset((a, b)))
    return cg


def compute_L(graph: GameGraph) -> float:
    """Scale bound for the tie-break weights: one plus the largest certified
    safe distance (one when the graph is empty)."""
    if not graph.edges:
        return 1.0
    return 1.0 + max(e.rho for e in graph.edges)


def z_value(mode: ZMode, rho: float, L: float, n_pursuers: int, n_evaders: int) -> float:
    """Tie-break weight of one assignment; bounded so that any feasible sum
    stays below the value of covering one more evader."""
    if L <= rho:
        raise ValueError("scale bound must exceed every safe distance")
    if mode is ZMode.ZERO:
        return 0.0
    denom = min(n_pursuers, n_evaders) * L
    val = rho / denom
    return val if mode is ZMode.MAX_RHO else -val


def solve_bip(
    graph: GameGraph, conflicts: ConflictGraph, mode: ZMode = ZMode.ZERO
) -> Matching:
    """Exact maximizer of covered evaders plus tie-break weight.

    Depth-first branch and bound over edge inclusion in lexicographic edge
    order, include-branch first, pruned with an optimistic bound; ties resolve
    to the first optimum found, which makes the result deterministic and
    stable across calls.
    """
    edges = graph.edges
    n = len(edges)
    if n == 0:
        return Matching(assignments=(), objective=0.0, z_mode=mode)
    order = sorted(range(n), key=lambda k: (edges[k].coalition, edges[k].evader))
    L = compute_L(graph)
    n_e = max(len(graph.evader_vertices), 1)
    weights = [
        1.0 + z_value(mode, edges[k].rho, L, max(graph.n_pursuers, 1), n_e)
        for k in order
    ]
    conflict_sets: list[set[int]] = [set() for _ in range(n)]
    pos = {k: i for i, k in enumerate(order)}
    for pair in conflicts.conflicts:
        a, b = tuple(pair)
        conflict_sets[pos[a]].add(pos[b])
        conflict_sets[pos[b]].add(pos[a])

    best_obj = -1.0
    best_sel: list[int] = []
    max_w = max(weights)

    def feasible(sel: list[int], cand: int) -> bool:
        e_c = edges[order[cand]]
        for s in sel:
            e_s = edges[order[s]]
            if e_s.evader == e_c.evader or e_s.coalition == e_c.coalition:
                return False
            if cand in conflict_sets[s]:
                return False
        return True

    def dfs(idx: int, sel: list[int], obj: float) -> None:
        nonlocal best_obj, best_sel
        if obj > best_obj + 1e-12:
            best_obj = obj
            best_sel = list(sel)
        if idx >= n:
            return
        if obj + (n - idx) * max_w <= best_obj + 1e-12:
            return
        if feasible(sel, idx):
            sel.append(idx)
            dfs(idx + 1, sel, obj + weights[idx])
            sel.pop()
        dfs(idx + 1, sel, obj)

    dfs(0, [], 0.0)
    assignments = tuple(
        (edges[order[s]].coalition, edges[order[s]].evader) for s in sorted(best_sel)
    )
    return Matching(assignments=assignments, objective=best_obj, z_mode=mode)


__all__ = [
    "ZMode",
    "Edge",
    "GameGraph",
    "ConflictGraph",
    "Matching",
    "coalition_vertices",
    "build_game_graph",
    "build_conflict_graph",
    "compute_L",
    "z_value",
    "solve_bip",
]
