"""Winning certificates and feedback pursuit strategies.

A state is certified when the safe distance exceeds a threshold assembled
from the players' parameters: the threshold budgets the worst-case shrinkage
of the safe distance while a pursuer turns onto the heading that points at
the closest enclosure point.  Aligned pursuers then hold that heading with a
turn rate computed from the closed-form velocity of the closest point, which
keeps the safe distance non-decreasing regardless of the evader's input.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, SingularActiveSet
from .geometry import DEFAULT_CONFIG, NumericConfig, rotate_cw, wrap_angle
from .pef import PairState, positional_gradients
from .safe_distance import (
    CoalitionState,
    EnclosureSolution,
    solve_safe_distance,
)
from .world import GoalRegion

EPS_ALIGN = 1e-6  # heading-vs-target tolerance for the aligned branch

_DENOM_EPS = 1e-9


class Theorem(enum.Enum):
    ONE_VS_ONE = "one_vs_one"
    TWO_VS_ONE_SCENARIO1 = "two_vs_one_scenario1"
    TWO_VS_ONE_SCENARIO2 = "two_vs_one_scenario2"
    RELAXED = "relaxed"


class Winner(enum.Enum):
    WIN_1V1 = "erp_win_1v1"
    WIN_2V1 = "erp_win_2v1"
    NOT_CERTIFIED = "not_certified"


@dataclass(frozen=True)
class WinningParams:
    """Static parameter gate for one pursuer: speed ratio and the ratio of
    capture radius to turning radius against its required bound."""

    alpha: float
    r_over_kappa: float
    cm_bound: float

    @property
    def margin(self) -> float:
        return self.r_over_kappa - self.cm_bound

    @property
    def passes(self) -> bool:
        return self.alpha > 3.0 and self.margin > 0.0

    @classmethod
    def for_pair(cls, pair: PairState) -> "WinningParams":
        alpha = pair.alpha
        bound = cm1(alpha) if alpha > 3.0 else math.inf
        return cls(
            alpha=alpha,
            r_over_kappa=pair.pursuer.capture_radius / pair.pursuer.kappa,
            cm_bound=bound,
        )


@dataclass(frozen=True)
class Certificate:
    """Outcome of a winning check: who wins, the safe-distance threshold that
    was required, and the observed value."""

    winner: Winner
    threshold: float
    observed_rho: float
    which_theorem: Theorem | None = None
    pursuer_index: int | None = None

    @property
    def certified(self) -> bool:
        return self.winner is not Winner.NOT_CERTIFIED


@dataclass(frozen=True)
class HeadingTarget:
    """Target heading per pursuer: the bearing of the closest enclosure point."""

    sigma: tuple[float, ...]


def cm1(alpha: float) -> float:
    """Required lower bound on capture-radius/turning-radius for one pursuer.

    Finite only for speed ratios above 3; diverges at 3 and tends to 1 for
    very fast pursuers.
    """
    if alpha <= 3.0:
        raise ValueError("bound defined only for speed ratios above 3")
    return 1.0 + (3.0 * alpha**2 + 4.0 * alpha - 3.0) / ((alpha - 1.0) ** 2 * (alpha - 3.0))


def cm2(alpha1: float, alpha2: float) -> float:
    """Two-pursuer analogue of :func:`cm1`: one plus the smaller of the two
    single-pursuer fractions."""
    if alpha1 <= 3.0 or alpha2 <= 3.0:
        raise ValueError("bound defined only for speed ratios above 3")
    return 1.0 + min(cm1(alpha1) - 1.0, cm1(alpha2) - 1.0)


def relaxed_ratio_bound(alpha: float) -> float:
    """Weaker capture-to-turning ratio bound valid once the pursuer heading is
    already aligned with the closest-point bearing."""
    if alpha <= 3.0:
        raise ValueError("bound defined only for speed ratios above 3")
    return (5.0 * alpha**2 - 9.0 * alpha + 8.0) / ((alpha - 1.0) * (alpha - 2.0) ** 2)


def threshold_1v1(alpha: float, r: float, kappa: float) -> float:
    """Safe distance needed to certify one pursuer from an arbitrary heading."""
    return (2.0 * math.pi * r / (alpha - 1.0)) / (r / kappa - cm1(alpha))


def threshold_2v1(
    alphas: tuple[float, float],
    rs: tuple[float, float],
    kappas: tuple[float, float],
    v_ps: tuple[float, float],
) -> float:
    """Safe distance needed to certify a cooperating pair from arbitrary
    headings; the inner max budgets the slower-turning pursuer, the outer min
    the slower escape of the closest point."""
    bound = cm2(*alphas)
    best = math.inf
    for ip in range(2):
        worst = 0.0
        for i in range(2):
            num = 2.0 * math.pi * rs[i] * v_ps[ip] / ((alphas[ip] - 1.0) * v_ps[i])
            worst = max(worst, num / (rs[i] / kappas[i] - bound))
        best = min(best, worst)
    return best


def sigma_heading(X: CoalitionState, sol: EnclosureSolution) -> HeadingTarget:
    """Bearing from each pursuer to the closest enclosure point."""
    sigmas = []
    for p in X.pursuers:
        d = sol.x_i - p.pos
        if np.hypot(d[0], d[1]) < 1e-12:
            raise DegenerateDenominator("closest point coincides with a pursuer")
        sigmas.append(wrap_angle(math.atan2(d[1], d[0])))
    return HeadingTarget(sigma=tuple(sigmas))


def _aligned(theta: float, sigma: float) -> bool:
    diff = wrap_angle(theta - sigma)
    return diff <= EPS_ALIGN or diff >= 2.0 * math.pi - EPS_ALIGN


def _state_in_aligned_set(
    X: CoalitionState, sol: EnclosureSolution
) -> bool:
    if sol.rho <= 0.0:
        return False
    target = sigma_heading(X, sol)
    return all(
        _aligned(p.heading, s) for p, s in zip(X.pursuers, target.sigma)
    )


def certify_1v1(
    pair: PairState,
    G: GoalRegion,
    relaxed: bool = False,
    cfg: NumericConfig = DEFAULT_CONFIG,
    sol: EnclosureSolution | None = None,
) -> Certificate:
    """Winning check for a single pursuer.

    The strict gate requires the parameter bound :func:`cm1` and a safe
    distance above :func:`threshold_1v1`.  With ``relaxed`` enabled, a state
    whose heading is already aligned with the closest-point bearing certifies
    under the weaker :func:`relaxed_ratio_bound` with any positive safe
    distance.
    """
    X = CoalitionState((pair.pursuer,), pair.evader)
    if sol is None:
        sol = solve_safe_distance(X, G, cfg)
    params = WinningParams.for_pair(pair)
    if params.passes:
        thr = threshold_1v1(params.alpha, pair.pursuer.capture_radius, pair.pursuer.kappa)
        if sol.rho > thr:
            return Certificate(
                winner=Winner.WIN_1V1,
                threshold=thr,
                observed_rho=sol.rho,
                which_theorem=Theorem.ONE_VS_ONE,
                pursuer_index=0,
            )
    if relaxed and params.alpha > 3.0:
        ratio = pair.pursuer.capture_radius / pair.pursuer.kappa
        if ratio >= relaxed_ratio_bound(params.alpha) and _state_in_aligned_set(X, sol):
            return Certificate(
                winner=Winner.WIN_1V1,
                threshold=0.0,
                observed_rho=sol.rho,
                which_theorem=Theorem.RELAXED,
                pursuer_index=0,
            )
    thr = (
        threshold_1v1(params.alpha, pair.pursuer.capture_radius, pair.pursuer.kappa)
        if params.passes
        else math.inf
    )
    return Certificate(
        winner=Winner.NOT_CERTIFIED,
        threshold=thr,
        observed_rho=sol.rho,
        which_theorem=None,
        pursuer_index=None,
    )


def certify_2v1(
    X: CoalitionState,
    G: GoalRegion,
    relaxed: bool = False,
    cfg: NumericConfig = DEFAULT_CONFIG,
    sol: EnclosureSolution | None = None,
    singleton_rhos: tuple[float, float] | None = None,
) -> Certificate:
    """Winning check for a two-pursuer coalition.

    When only one constraint supports the optimum the check reduces to the
    single-pursuer case (tried for the supporting pursuer first, then the
    other).  With two support constraints, both pursuers must pass the strict
    single-pursuer parameter gate and the safe distance must clear the
    cooperative threshold.  ``singleton_rhos`` optionally provides the two
    single-pursuer program values (the engine caches them) so support
    detection does not re-solve them.
    """
    if len(X) != 2:
        raise ValueError("certify_2v1 expects a coalition of exactly two pursuers")
    if sol is None:
        sol = solve_safe_distance(X, G, cfg)
    if sol.rho <= 0.0:
        return Certificate(
            winner=Winner.NOT_CERTIFIED,
            threshold=math.inf,
            observed_rho=0.0,
        )
    if singleton_rhos is None:
        singleton_rhos = (
            solve_safe_distance(X.subcoalition((0,)), G, cfg).rho,
            solve_safe_distance(X.subcoalition((1,)), G, cfg).rho,
        )
    # constraint i supports the optimum iff removing it (leaving the other
    # pursuer alone) strictly lowers the program value
    support = tuple(i for i in (0, 1) if singleton_rhos[1 - i] < sol.rho - 1e-6)
    if len(support) <= 1:
        first = support[0] if support else 0
        order = (first, 1 - first)
        cert = None
        for idx in order:
            cert = certify_1v1(X.pair(idx), G, relaxed=relaxed, cfg=cfg)
            if cert.certified:
                return Certificate(
                    winner=Winner.WIN_1V1,
                    threshold=cert.threshold,
                    observed_rho=cert.observed_rho,
                    which_theorem=Theorem.TWO_VS_ONE_SCENARIO1,
                    pursuer_index=idx,
                )
        return Certificate(
            winner=Winner.NOT_CERTIFIED,
            threshold=cert.threshold if cert else math.inf,
            observed_rho=sol.rho,
            which_theorem=None,
        )
    gates = [WinningParams.for_pair(X.pair(i)) for i in range(2)]
    if not all(g.passes for g in gates):
        return Certificate(
            winner=Winner.NOT_CERTIFIED,
            threshold=math.inf,
            observed_rho=sol.rho,
        )
    thr = threshold_2v1(
        alphas=(gates[0].alpha, gates[1].alpha),
        rs=tuple(p.capture_radius for p in X.pursuers),
        kappas=tuple(p.kappa for p in X.pursuers),
        v_ps=tuple(p.v_max for p in X.pursuers),
    )
    if sol.rho > thr:
        return Certificate(
            winner=Winner.WIN_2V1,
            threshold=thr,
            observed_rho=sol.rho,
            which_theorem=Theorem.TWO_VS_ONE_SCENARIO2,
        )
    if relaxed and _state_in_aligned_set(X, sol):
        # already on the aligned manifold: the threshold only budgets the
        # turn-in transient, and the parameter gates keep the aligned law
        # within the turn-rate limit, so any positive safe distance wins
        return Certificate(
            winner=Winner.WIN_2V1,
            threshold=0.0,
            observed_rho=sol.rho,
            which_theorem=Theorem.TWO_VS_ONE_SCENARIO2,
        )
    return Certificate(
        winner=Winner.NOT_CERTIFIED,
        threshold=thr,
        observed_rho=sol.rho,
    )


def xI_velocity_1v1(
    sol: EnclosureSolution,
    pair: PairState,
    G: GoalRegion,
    evader_velocity: np.ndarray,
) -> np.ndarray:
    """Velocity of the closest enclosure point while the pursuer holds the
    aligned heading and the evader moves with the given velocity.

    Derived by differentiating the optimality system of the distance program;
    valid while exactly one constraint is active and the denominator, which
    measures transversality of the active gradient against the goal normal,
    stays away from zero.
    """
    x_i, x_g = sol.x_i, sol.x_g
    p = pair.pursuer
    alpha = pair.alpha
    d_ip = float(np.linalg.norm(x_i - p.pos))
    d_ie = float(np.linalg.norm(x_i - pair.evader.pos))
    d_ig = float(np.linalg.norm(x_i - x_g))
    e_ip = (x_i - p.pos) / d_ip
    e_ie = (x_i - pair.evader.pos) / d_ie
    g_grad = G.grad(x_g)
    g_norm = float(np.linalg.norm(g_grad))
    e_ig = g_grad / g_norm
    hess = G.hess(x_g)
    d_f = float(np.linalg.norm(e_ip - alpha * e_ie))
    a2 = float(rotate_cw(e_ig) @ hess @ rotate_cw(e_ig)) / g_norm
    a1 = (
        rotate_cw(e_ip) * float(e_ip @ e_ig) / d_ip
        - alpha * rotate_cw(e_ie) * float(e_ie @ e_ig) / d_ie
        - d_f * a2 * rotate_cw(e_ig) / (1.0 + d_ig * a2)
    )
    denom = d_f * float(a1 @ rotate_cw(e_ig))
    if abs(denom) < _DENOM_EPS:
        raise DegenerateDenominator("closest-point velocity denominator vanished")
    xe_dot = np.asarray(evader_velocity, dtype=np.float64)
    c3 = alpha * rotate_cw(e_ie) * float(e_ie @ e_ig) / d_ie
    k1 = alpha * float(e_ie @ xe_dot) - p.v_max
    k2 = float(c3 @ xe_dot)
    return (k1 * rotate_cw(a1) - k2 * d_f * rotate_cw(e_ig)) / denom


def xI_velocity_2v1(
    sol: EnclosureSolution,
    X: CoalitionState,
    evader_velocity: np.ndarray,
) -> np.ndarray:
    """Velocity of the closest enclosure point for a cooperating pair with
    both constraints active and both headings aligned."""
    if len(X) != 2:
        raise ValueError("xI_velocity_2v1 expects a two-pursuer coalition")
    x_i = sol.x_i
    e_pos = X.evader.pos
    d_ie = float(np.linalg.norm(x_i - e_pos))
    e_ie = (x_i - e_pos) / d_ie
    xe_dot = np.asarray(evader_velocity, dtype=np.float64)
    a = []
    for i in range(2):
        p = X.pursuers[i]
        d_ip = float(np.linalg.norm(x_i - p.pos))
        e_ip = (x_i - p.pos) / d_ip
        a.append(e_ip - X.alphas[i].alpha * e_ie)
    denom = float(a[0] @ rotate_cw(a[1]))
    if abs(denom) < _DENOM_EPS:
        raise DegenerateDenominator("active gradients are (anti)parallel")
    k = [
        X.alphas[i].alpha * float(e_ie @ xe_dot) - X.pursuers[i].v_max
        for i in range(2)
    ]
    return (rotate_cw(a[0]) * k[1] - rotate_cw(a[1]) * k[0]) / denom


def _aligned_turn_rate(
    p_index: int, X: CoalitionState, sol: EnclosureSolution, xi_dot: np.ndarray
) -> float:
    p = X.pursuers[p_index]
    d_ip = float(np.linalg.norm(sol.x_i - p.pos))
    e_ip = (sol.x_i - p.pos) / d_ip
    return -(p.kappa / p.v_max) * float(rotate_cw(e_ip) @ xi_dot) / d_ip


def _bang_bang(theta: float, sigma: float) -> float:
    s = math.sin(sigma - theta)
    if s > 0.0:
        return 1.0
    if s < 0.0:
        return -1.0
    # exactly aligned is handled by the caller; antipodal gets a fixed side
    return 1.0


def _heading_error(theta: float, sigma: float) -> float:
    """Signed smallest rotation from theta to sigma, in (-pi, pi]."""
    d = math.fmod(sigma - theta, 2.0 * math.pi)
    if d > math.pi:
        d -= 2.0 * math.pi
    elif d <= -math.pi:
        d += 2.0 * math.pi
    return d


def _tracking_control(
    p_index: int,
    X: CoalitionState,
    sol: EnclosureSolution,
    xi_dot: np.ndarray | None,
    sigma: float,
    dt: float,
) -> float:
    """Discrete-time realization of the two-branch law for one step of
    length dt.

    Full-rate turning would chatter around the target bearing at one step's
    amplitude and never reach the aligned branch, so within one step's reach
    the turn input is the aligned feedforward plus a deadbeat correction,
    saturating to the full-rate branch beyond.
    """
    p = X.pursuers[p_index]
    err = _heading_error(p.heading, sigma)
    u_ff = 0.0
    if xi_dot is not None:
        u_ff = _aligned_turn_rate(p_index, X, sol, xi_dot)
    if abs(err) <= EPS_ALIGN:
        return max(-1.0, min(1.0, u_ff))
    window = 1.5 * p.v_max * dt / p.kappa
    if abs(err) <= window:
        return max(-1.0, min(1.0, u_ff + (p.kappa / p.v_max) * err / dt))
    return _bang_bang(p.heading, sigma)


def pursuit_control_1v1(
    pair: PairState,
    G: GoalRegion,
    evader_control: np.ndarray,
    cfg: NumericConfig = DEFAULT_CONFIG,
    sol: EnclosureSolution | None = None,
    dt: float | None = None,
) -> float:
    """Feedback turn input for a lone pursuer.

    Aligned heading: hold the closest-point bearing using its closed-form
    velocity.  Otherwise: turn at full rate toward that bearing.  Degenerate
    closed-form denominators fall back to the full-rate branch for the step.
    With ``dt`` given, the full-rate branch is realized discretely (see
    :func:`_tracking_control`) so a simulated pursuer can actually settle
    onto the aligned branch instead of chattering around it.
    """
    X = CoalitionState((pair.pursuer,), pair.evader)
    if sol is None:
        sol = solve_safe_distance(X, G, cfg)
    sigma = sigma_heading(X, sol).sigma[0]
    theta = pair.pursuer.heading
    xi_dot: np.ndarray | None = None
    if sol.rho > 0.0:
        xe_dot = pair.evader.v_max * np.asarray(evader_control, dtype=np.float64)
        try:
            xi_dot = xI_velocity_1v1(sol, pair, G, xe_dot)
        except DegenerateDenominator:
            xi_dot = None
    if dt is not None:
        return _tracking_control(0, X, sol, xi_dot, sigma, dt)
    if sol.rho > 0.0 and _aligned(theta, sigma):
        if xi_dot is None:
            return _bang_bang(theta, sigma)
        return _aligned_turn_rate(0, X, sol, xi_dot)
    return _bang_bang(theta, sigma)


def pursuit_control_2v1(
    X: CoalitionState,
    G: GoalRegion,
    evader_control: np.ndarray,
    cfg: NumericConfig = DEFAULT_CONFIG,
    sol: EnclosureSolution | None = None,
    dt: float | None = None,
) -> tuple[float, float]:
    """Cooperative feedback turn inputs for a two-pursuer coalition.

    With two active constraints, aligned pursuers use the shared closest-point
    velocity; a misaligned pursuer turns at full rate toward its bearing.
    With a single active constraint the supporting pursuer runs the
    lone-pursuer law and the other steers onto its own bearing.  ``dt``
    selects the discrete-time realization as in :func:`pursuit_control_1v1`.
    """
    if len(X) != 2:
        raise ValueError("pursuit_control_2v1 expects a two-pursuer coalition")
    if sol is None:
        sol = solve_safe_distance(X, G, cfg)
    target = sigma_heading(X, sol)
    thetas = [p.heading for p in X.pursuers]
    xe_dot = X.evader.v_max * np.asarray(evader_control, dtype=np.float64)
    xi_dot: np.ndarray | None = None
    if sol.rho > 0.0 and len(sol.active) == 2:
        try:
            xi_dot = xI_velocity_2v1(sol, X, xe_dot)
        except DegenerateDenominator:
            xi_dot = None
    elif sol.rho > 0.0 and len(sol.active) == 1:
        lead = sol.active[0]
        try:
            xi_dot = xI_velocity_1v1(sol, X.pair(lead), G, xe_dot)
        except DegenerateDenominator:
            xi_dot = None
    if dt is not None:
        return (
            _tracking_control(0, X, sol, xi_dot, target.sigma[0], dt),
            _tracking_control(1, X, sol, xi_dot, target.sigma[1], dt),
        )
    controls: list[float] = []
    for i in range(2):
        if sol.rho > 0.0 and xi_dot is not None and _aligned(thetas[i], target.sigma[i]):
            controls.append(_aligned_turn_rate(i, X, sol, xi_dot))
        elif _aligned(thetas[i], target.sigma[i]):
            controls.append(0.0)
        else:
            controls.append(_bang_bang(thetas[i], target.sigma[i]))
    return controls[0], controls[1]


__all__ = [
    "Certificate",
    "HeadingTarget",
    "Theorem",
    "Winner",
    "WinningParams",
    "cm1",
    "cm2",
    "relaxed_ratio_bound",
    "threshold_1v1",
    "threshold_2v1",
    "certify_1v1",
    "certify_2v1",
    "sigma_heading",
    "xI_velocity_1v1",
    "xI_velocity_2v1",
    "pursuit_control_1v1",
    "pursuit_control_2v1",
]
