"""Minimum distance between a coalition's enclosure intersection and the goal
region: the solver, multiplier recovery, the instantaneous distance rate, and
coalition reduction.

The solver alternates exact projections between the two convex bodies (with
Dykstra's scheme for the enclosure intersection) and finishes with a local
polish, so the returned pair is accurate to near machine precision.  Built-in
goal kinds run through the compiled kernels; custom goals run the same
iteration in Python against the user callables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from . import kernels
from .errors import InvalidState, MaxIterExceeded, NotApplicable, SingularActiveSet
from .geometry import DEFAULT_CONFIG, NumericConfig, vec
from .pef import PairState, positional_gradients
from .world import EvaderState, GoalRegion, PursuerState, SpeedRatio

_REDUCE_TOL = 1e-6


@dataclass(frozen=True)
class CoalitionState:
    """One evader against a nonempty pursuit coalition, every pair uncaptured."""

    pursuers: tuple[PursuerState, ...]
    evader: EvaderState
    alphas: tuple[SpeedRatio, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "pursuers", tuple(self.pursuers))
        if not self.pursuers:
            raise InvalidState("coalition must contain at least one pursuer")
        if not self.alphas:
            object.__setattr__(
                self,
                "alphas",
                tuple(SpeedRatio(p.v_max / self.evader.v_max) for p in self.pursuers),
            )
        if len(self.alphas) != len(self.pursuers):
            raise InvalidState("one speed ratio per pursuer required")
        for p in self.pursuers:
            d = p.pos - self.evader.pos
            if math.hypot(d[0], d[1]) <= p.capture_radius:
                raise InvalidState("evader already within some capture range")

    def __len__(self) -> int:
        return len(self.pursuers)

    def pair(self, i: int) -> PairState:
        return PairState(self.pursuers[i], self.evader)

    def subcoalition(self, indices: tuple[int, ...]) -> "CoalitionState":
        return CoalitionState(
            pursuers=tuple(self.pursuers[i] for i in indices),
            evader=self.evader,
            alphas=tuple(self.alphas[i] for i in indices),
        )

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, float, float]:
        P = np.array([p.pos for p in self.pursuers], dtype=np.float64)
        al = np.array([a.alpha for a in self.alphas], dtype=np.float64)
        rs = np.array([p.capture_radius for p in self.pursuers], dtype=np.float64)
        return P, al, rs, float(self.evader.pos[0]), float(self.evader.pos[1])


@dataclass(frozen=True)
class EnclosureSolution:
    """Solution of the minimum-distance program.

    x_i is the closest point of the enclosure intersection, x_g the closest
    point of the goal region, rho their distance.  ``active`` holds the
    indices whose constraint is tight at x_i.  ``lambdas`` (one nonpositive
    multiplier per active index) and ``lambda_g`` are filled in by
    :func:`recover_multipliers`.
    """

    x_i: np.ndarray
    x_g: np.ndarray
    rho: float
    active: tuple[int, ...]
    lambdas: dict[int, float] = field(default_factory=dict)
    lambda_g: float = 0.0
    iterations: int = 0


def _constraint_values(X: CoalitionState, pt: np.ndarray) -> np.ndarray:
    P, al, rs, ex, ey = X.arrays()
    out = np.empty(len(X))
    for i in range(len(X)):
        out[i] = kernels.pef_value(
            float(pt[0]), float(pt[1]), P[i, 0], P[i, 1], ex, ey, al[i], rs[i]
        )
    return out


def _active_set(fvals: np.ndarray, eps_active: float) -> tuple[int, ...]:
    idx = [i for i in range(fvals.shape[0]) if abs(fvals[i]) <= eps_active]
    if len(idx) > 2:
        # at most two constraints can support the optimum; keep the tightest
        idx = sorted(idx, key=lambda i: abs(fvals[i]))[:2]
        idx.sort()
    return tuple(idx)


def _solve_custom_goal(
    X: CoalitionState, G: GoalRegion, cfg: NumericConfig, warm
) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Python twin of the compiled driver for goal regions without a kernel
    representation; same alternation, touching tests, and stagnation stop.
    The polish is left to the arc/corner pass in :func:`solve_safe_distance`.
    """
    P, al, rs, ex, ey = X.arrays()
    dyk_tol = cfg.eps_dist * 0.1
    if warm is not None:
        x0, x1, _ = kernels.project_intersection(
            float(warm[0][0]), float(warm[0][1]), P, al, rs, ex, ey, dyk_tol, 1000
        )
        x = vec(x0, x1)
    else:
        x = X.evader.pos.copy()
    if G.value(x) <= 0.0:
        return x, x, kernels.STATUS_TOUCHING, 0
    y = G.project(x, cfg)
    status = kernels.STATUS_MAXITER
    prev_move = math.inf
    stagnant = 0
    loose = 1e-6 * (1.0 + float(np.linalg.norm(x)))
    it = 0
    while it < cfg.max_iter:
        it += 1
        if float(_constraint_values(X, y).min()) >= 0.0:
            return y, y, kernels.STATUS_TOUCHING, it
        nx0, nx1, _ = kernels.project_intersection(
            float(y[0]), float(y[1]), P, al, rs, ex, ey, dyk_tol, 1000
        )
        nx = vec(nx0, nx1)
        if G.value(nx) <= 0.0:
            return nx, nx, kernels.STATUS_TOUCHING, it
        ny = G.project(nx, cfg)
        move = float(np.linalg.norm(nx - x) + np.linalg.norm(ny - y))
        x, y = nx, ny
        if move < cfg.eps_dist:
            status = kernels.STATUS_OK
            break
        if move < loose and move > 0.5 * prev_move:
            stagnant += 1
            if stagnant >= 5:
                status = kernels.STATUS_OK
                break
        else:
            stagnant = 0
        prev_move = move
    return x, y, status, it


def _polish_custom(
    x: np.ndarray, X: CoalitionState, G: GoalRegion, cfg: NumericConfig
) -> np.ndarray:
    """Arc/corner polish against a custom goal: secant on the tangency
    condition for the tightest constraint, corner Newton when two are tight."""
    P, al, rs, ex, ey = X.arrays()
    fvals = _constraint_values(X, x)
    order = np.argsort(np.abs(fvals))
    i1 = int(order[0])
    scale = 1.0 + float(np.linalg.norm(x))
    candidates = []

    def arc_refine(i: int) -> np.ndarray:
        ang0 = math.atan2(float(x[1]) - ey, float(x[0]) - ex)
        lo, hi = ang0 - 0.02, ang0 + 0.02

        def tangency(ang: float) -> tuple[float, np.ndarray]:
            bx, by, tx, ty = kernels._boundary_and_tangent(
                ang, P[i, 0], P[i, 1], ex, ey, al[i], rs[i]
            )
            b = vec(bx, by)
            g = G.project(b, cfg)
            return float((b - g) @ vec(tx, ty)), b

        a0, a1 = ang0, ang0 + 1e-7
        t0, _ = tangency(a0)
        b = x
        for _ in range(16):
            t1, b = tangency(a1)
            if t1 == t0:
                break
            a2 = min(hi, max(lo, a1 - t1 * (a1 - a0) / (t1 - t0)))
            a0, t0, a1 = a1, t1, a2
            if abs(a1 - a0) < 1e-15:
                break
        _, b = tangency(a1)
        return b

    candidates.append(arc_refine(i1))
    if len(X) > 1:
        i2 = int(order[1])
        if abs(fvals[i2]) < 1e-2 * scale:
            candidates.append(arc_refine(i2))
            cx, cy, ok = kernels._corner_newton(
                float(x[0]), float(x[1]), i1, i2, P, al, rs, ex, ey
            )
            if ok:
                candidates.append(vec(cx, cy))
    base_rho = float(np.linalg.norm(x - G.project(x, cfg)))
    best, best_rho = None, math.inf
    for q in candidates:
        if float(_constraint_values(X, q).min()) < -1e-9 * scale:
            continue
        rho_c = float(np.linalg.norm(q - G.project(q, cfg)))
        if rho_c < best_rho:
            best, best_rho = q, rho_c
    if best is not None and best_rho < base_rho + 1e-7 * scale:
        return best
    return x


def solve_safe_distance(
    X: CoalitionState,
    G: GoalRegion,
    cfg: NumericConfig = DEFAULT_CONFIG,
    warm: tuple[np.ndarray, np.ndarray] | None = None,
) -> EnclosureSolution:
    """Closest pair between the coalition's enclosure intersection and the goal.

    Returns the unique minimizing pair when the sets are disjoint, and a
    common point with rho = 0 when they overlap.  ``warm`` optionally seeds
    the iteration with a previous solution pair.
    """
    if G.kernel_kind is not None:
        P, al, rs, ex, ey = X.arrays()
        wx, wy, has_warm = 0.0, 0.0, False
        if warm is not None:
            wx, wy, has_warm = float(warm[0][0]), float(warm[0][1]), True
        xi0, xi1, xg0, xg1, status, it = kernels.solve_min_dist(
            P,
            al,
            rs,
            ex,
            ey,
            G.kernel_kind,
            G.kernel_params(),
            cfg.eps_dist,
            cfg.max_iter,
            wx,
            wy,
            has_warm,
        )
        x_i = vec(xi0, xi1)
        x_g = vec(xg0, xg1)
    else:
        x_i, x_g, status, it = _solve_custom_goal(X, G, cfg, warm)
        if status == kernels.STATUS_OK:
            x_i = _polish_custom(x_i, X, G, cfg)
            x_g = G.project(x_i, cfg)
    if status == kernels.STATUS_MAXITER:
        raise MaxIterExceeded(
            f"safe-distance solver did not converge in {cfg.max_iter} iterations"
        )
    if status == kernels.STATUS_TOUCHING:
        return EnclosureSolution(
            x_i=x_i, x_g=x_i.copy(), rho=0.0, active=(), iterations=it
        )
    rho = float(np.linalg.norm(x_i - x_g))
    fvals = _constraint_values(X, x_i)
    return EnclosureSolution(
        x_i=x_i,
        x_g=x_g,
        rho=rho,
        active=_active_set(fvals, cfg.eps_active),
        iterations=it,
    )


def recover_multipliers(
    sol: EnclosureSolution, X: CoalitionState, G: GoalRegion
) -> EnclosureSolution:
    """Fill in the stationarity multipliers for a solved instance.

    With one active constraint the multiplier is -1/|f_x|; with two, the 2x2
    stationarity system is solved directly.  The goal-side multiplier scales
    the goal gradient to the unit separation direction.
    """
    if sol.rho <= 0.0:
        raise NotApplicable("multipliers are defined only for separated sets")
    if len(sol.active) not in (1, 2):
        raise NotApplicable(f"unexpected active set {sol.active}")
    e_sep = (sol.x_i - sol.x_g) / sol.rho  # gradient of the distance in x_i
    lambdas: dict[int, float] = {i: 0.0 for i in range(len(X))}
    if len(sol.active) == 1:
        i = sol.active[0]
        grads = positional_gradients(sol.x_i, X.pair(i))
        d_f = float(np.linalg.norm(grads.f_x))
        lambdas[i] = -1.0 / d_f
    else:
        i, k = sol.active
        gi = positional_gradients(sol.x_i, X.pair(i)).f_x
        gk = positional_gradients(sol.x_i, X.pair(k)).f_x
        det = gi[0] * gk[1] - gi[1] * gk[0]
        if abs(det) < 1e-10 * float(np.linalg.norm(gi) * np.linalg.norm(gk)):
            raise SingularActiveSet("active constraint gradients are parallel")
        rhs = -e_sep
        lambdas[i] = float((rhs[0] * gk[1] - rhs[1] * gk[0]) / det)
        lambdas[k] = float((gi[0] * rhs[1] - gi[1] * rhs[0]) / det)
    g_grad = G.grad(sol.x_g)
    lambda_g = float(np.linalg.norm(e_sep) / max(np.linalg.norm(g_grad), 1e-300))
    return replace(sol, lambdas=lambdas, lambda_g=lambda_g)


def safe_distance_rate(
    sol: EnclosureSolution,
    X: CoalitionState,
    G: GoalRegion,
    pursuer_controls: list[float],
    evader_control: np.ndarray,
) -> float:
    """Instantaneous rate of change of the safe distance for given controls.

    Positive means the enclosure intersection is moving away from the goal.
    Requires multipliers recovered on ``sol``.
    """
    if sol.rho <= 0.0 or not sol.lambdas:
        raise NotApplicable("rate requires a separated, multiplier-recovered solution")
    u_e = np.asarray(evader_control, dtype=np.float64)
    xe_dot = X.evader.v_max * u_e
    rate = 0.0
    for i in sol.active:
        lam = sol.lambdas.get(i, 0.0)
        if lam == 0.0:
            continue
        p = X.pursuers[i]
        grads = positional_gradients(sol.x_i, X.pair(i))
        xp_dot = p.v_max * p.heading_dir
        theta_dot = p.v_max * float(pursuer_controls[i]) / p.kappa
        rate += lam * (
            float(grads.f_P @ xp_dot)
            + grads.f_theta * theta_dot
            + float(grads.f_E @ xe_dot)
        )
    return rate


def reduce_coalition(
    X: CoalitionState, G: GoalRegion, cfg: NumericConfig = DEFAULT_CONFIG
) -> tuple[tuple[int, ...], float]:
    """Find a subcoalition of at most two pursuers achieving the full
    coalition's program value.

    Enumerates singletons, then pairs, in index order and returns the first
    whose value matches within 1e-6 (one always exists when the full value is
    positive).  Raises NotApplicable when the sets already touch.
    """
    full = solve_safe_distance(X, G, cfg)
    if full.rho <= 0.0:
        raise NotApplicable("reduction applies only when the safe distance is positive")
    if len(X) == 1:
        return (0,), full.rho
    best: tuple[tuple[int, ...], float] | None = None
    subsets = [(i,) for i in range(len(X))] + list(combinations(range(len(X)), 2))
    for idx in subsets:
        sub_rho = solve_safe_distance(X.subcoalition(idx), G, cfg).rho
        if abs(sub_rho - full.rho) <= _REDUCE_TOL:
            return idx, sub_rho
        if best is None or sub_rho > best[1]:
            best = (idx, sub_rho)
    # numerically the theorem guarantees a hit above; fall back to the largest
    assert best is not None
    return best


__all__ = [
    "CoalitionState",
    "EnclosureSolution",
    "solve_safe_distance",
    "recover_multipliers",
    "safe_distance_rate",
    "reduce_coalition",
]
