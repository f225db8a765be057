"""Player kinematics, goal-region geometry, and capture/arrival predicates.

Pursuers are turn-rate-limited cars (constant forward speed, bounded turn
rate); evaders move with simple bounded-speed motion.  The protected goal
region is a compact convex set given implicitly by a twice differentiable
function g with {g <= 0} the region.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import kernels
from .errors import MaxIterExceeded
from .geometry import DEFAULT_CONFIG, NumericConfig, vec, wrap_angle

_CTRL_EPS = 1e-9


class EvaderStatus(enum.Enum):
    ACTIVE = "active"
    CAPTURED = "captured"
    ARRIVED = "arrived"


@dataclass(frozen=True)
class PursuerState:
    """A car-like pursuer: position, heading, speed, minimum turning radius,
    and capture radius."""

    pos: np.ndarray
    heading: float
    v_max: float
    kappa: float
    capture_radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "pos", np.asarray(self.pos, dtype=np.float64))
        if not np.all(np.isfinite(self.pos)):
            raise ValueError("pursuer position must be finite")
        if self.v_max <= 0.0 or self.kappa <= 0.0 or self.capture_radius <= 0.0:
            raise ValueError("v_max, kappa and capture_radius must be positive")
        object.__setattr__(self, "heading", wrap_angle(float(self.heading)))

    @property
    def heading_dir(self) -> np.ndarray:
        return vec(math.cos(self.heading), math.sin(self.heading))


@dataclass(frozen=True)
class EvaderState:
    """A simple-motion evader: position, top speed, and life-cycle status."""

    pos: np.ndarray
    v_max: float
    status: EvaderStatus = EvaderStatus.ACTIVE

    def __post_init__(self) -> None:
        object.__setattr__(self, "pos", np.asarray(self.pos, dtype=np.float64))
        if not np.all(np.isfinite(self.pos)):
            raise ValueError("evader position must be finite")
        if self.v_max <= 0.0:
            raise ValueError("v_max must be positive")


@dataclass(frozen=True)
class SpeedRatio:
    """Pursuer-to-evader speed ratio; faster pursuers only."""

    alpha: float

    def __post_init__(self) -> None:
        if not self.alpha > 1.0:
            raise ValueError("speed ratio must exceed 1")


class GoalRegion:
    """Convex region {g <= 0} with gradient and Hessian access.

    Subclasses provide ``value``/``grad``/``hess`` and an orthogonal
    ``project``; the built-in disk and ellipse use closed-form or
    one-dimensional projections, arbitrary convex regions use Newton
    iteration on the projection optimality system.
    """

    kernel_kind: int | None = None  # set for kinds the compiled solver handles

    def value(self, y: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project(self, z: np.ndarray, cfg: NumericConfig = DEFAULT_CONFIG) -> np.ndarray:
        raise NotImplementedError

    def kernel_params(self) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class DiskGoal(GoalRegion):
    center: np.ndarray
    radius: float
    kernel_kind = kernels.GOAL_DISK

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64))
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")

    def value(self, y: np.ndarray) -> float:
        d = y - self.center
        return float(d @ d - self.radius**2)

    def grad(self, y: np.ndarray) -> np.ndarray:
        return 2.0 * (y - self.center)

    def hess(self, y: np.ndarray) -> np.ndarray:
        return 2.0 * np.eye(2)

    def project(self, z: np.ndarray, cfg: NumericConfig = DEFAULT_CONFIG) -> np.ndarray:
        x, y = kernels.goal_project_builtin(
            float(z[0]), float(z[1]), kernels.GOAL_DISK, self.kernel_params()
        )
        return vec(x, y)

    def kernel_params(self) -> np.ndarray:
        return np.array([self.center[0], self.center[1], self.radius, 0.0])


@dataclass(frozen=True)
class EllipseGoal(GoalRegion):
    """Axis-aligned ellipse ((y1-c1)/a)^2 + ((y2-c2)/b)^2 <= 1."""

    center: np.ndarray
    semi_axes: tuple[float, float]
    kernel_kind = kernels.GOAL_ELLIPSE

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64))
        if min(self.semi_axes) <= 0.0:
            raise ValueError("semi-axes must be positive")

    def value(self, y: np.ndarray) -> float:
        a, b = self.semi_axes
        d = y - self.center
        return float((d[0] / a) ** 2 + (d[1] / b) ** 2 - 1.0)

    def grad(self, y: np.ndarray) -> np.ndarray:
        a, b = self.semi_axes
        d = y - self.center
        return vec(2.0 * d[0] / a**2, 2.0 * d[1] / b**2)

    def hess(self, y: np.ndarray) -> np.ndarray:
        a, b = self.semi_axes
        return np.diag([2.0 / a**2, 2.0 / b**2])

    def project(self, z: np.ndarray, cfg: NumericConfig = DEFAULT_CONFIG) -> np.ndarray:
        x, y = kernels.goal_project_builtin(
            float(z[0]), float(z[1]), kernels.GOAL_ELLIPSE, self.kernel_params()
        )
        return vec(x, y)

    def kernel_params(self) -> np.ndarray:
        a, b = self.semi_axes
        return np.array([self.center[0], self.center[1], a, b])


@dataclass(frozen=True)
class CustomGoal(GoalRegion):
    """Convex region from user callables.

    ``interior_hint`` must be a point with g < 0; it seeds the boundary search
    for projections.  The callables must be reentrant.  Gradient/Hessian
    consistency is spot-checked against finite differences on construction.
    """

    g: Callable[[np.ndarray], float]
    g_grad: Callable[[np.ndarray], np.ndarray]
    g_hess: Callable[[np.ndarray], np.ndarray]
    interior_hint: np.ndarray = field(default_factory=lambda: vec(0.0, 0.0))
    kernel_kind = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "interior_hint", np.asarray(self.interior_hint, dtype=np.float64)
        )
        if self.g(self.interior_hint) >= 0.0:
            raise ValueError("interior_hint must satisfy g < 0")
        self._check_derivatives()

    def _check_derivatives(self) -> None:
        rng = np.random.default_rng(0)
        h = 1e-5
        for _ in range(3):
            y = self.interior_hint + rng.normal(scale=1.0, size=2)
            fd_grad = np.array(
                [
                    (self.g(y + vec(h, 0)) - self.g(y - vec(h, 0))) / (2 * h),
                    (self.g(y + vec(0, h)) - self.g(y - vec(0, h))) / (2 * h),
                ]
            )
            scale = 1.0 + float(np.abs(fd_grad).max())
            if np.abs(fd_grad - self.g_grad(y)).max() > 1e-4 * scale:
                raise ValueError("grad callable is inconsistent with g")
            fd_hess = np.column_stack(
                [
                    (self.g_grad(y + vec(h, 0)) - self.g_grad(y - vec(h, 0))) / (2 * h),
                    (self.g_grad(y + vec(0, h)) - self.g_grad(y - vec(0, h))) / (2 * h),
                ]
            )
            hscale = 1.0 + float(np.abs(fd_hess).max())
            if np.abs(fd_hess - self.g_hess(y)).max() > 1e-4 * hscale:
                raise ValueError("hessian callable is inconsistent with grad")

    def value(self, y: np.ndarray) -> float:
        return float(self.g(y))

    def grad(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.g_grad(y), dtype=np.float64)

    def hess(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.g_hess(y), dtype=np.float64)

    def project(self, z: np.ndarray, cfg: NumericConfig = DEFAULT_CONFIG) -> np.ndarray:
        if self.value(z) <= 0.0:
            return np.asarray(z, dtype=np.float64).copy()
        # bracket the boundary on the segment hint -> z, bisect to a seed
        lo, hi = 0.0, 1.0
        a = self.interior_hint
        d = z - a
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self.value(a + mid * d) > 0.0:
                hi = mid
            else:
                lo = mid
        y = a + 0.5 * (lo + hi) * d
        lam = float(np.linalg.norm(z - y) / max(np.linalg.norm(self.grad(y)), 1e-12))
        # Newton on the projection system y + lam*grad(y) - z = 0, g(y) = 0
        for _ in range(min(cfg.max_iter, 200)):
            gy = self.grad(y)
            F = np.array([*(y + lam * gy - z), self.value(y)])
            if np.abs(F).max() < 1e-12 * (1.0 + float(np.linalg.norm(z))):
                return y
            J = np.zeros((3, 3))
            J[:2, :2] = np.eye(2) + lam * self.hess(y)
            J[:2, 2] = gy
            J[2, :2] = gy
            try:
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError as exc:
                raise MaxIterExceeded("projection Newton system is singular") from exc
            y = y + step[:2]
            lam = lam + step[2]
        raise MaxIterExceeded("custom goal projection did not converge")

    def kernel_params(self) -> np.ndarray:
        raise NotImplementedError("custom goals are handled outside the compiled solver")


def goal_eval(G: GoalRegion, y: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian of the goal function at a point."""
    y = np.asarray(y, dtype=np.float64)
    return G.value(y), G.grad(y), G.hess(y)


def project_to_goal(
    G: GoalRegion, z: np.ndarray, cfg: NumericConfig = DEFAULT_CONFIG
) -> np.ndarray:
    """Closest point of the goal region to z (z itself when inside)."""
    return G.project(np.asarray(z, dtype=np.float64), cfg)


def step_pursuer(s: PursuerState, u: float, dt: float) -> PursuerState:
    """Advance a pursuer one step under constant turn input u in [-1, 1].

    Integrates the circular arc exactly; Euler drift would break the
    heading-alignment invariants the strategies rely on.
    """
    if abs(u) > 1.0 + _CTRL_EPS:
        raise ValueError(f"turn input {u} outside [-1, 1]")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    u = min(1.0, max(-1.0, u))
    theta = s.heading
    if abs(u) < 1e-14:
        new_pos = s.pos + s.v_max * dt * vec(math.cos(theta), math.sin(theta))
        return replace(s, pos=new_pos)
    omega = s.v_max * u / s.kappa
    theta1 = theta + omega * dt
    radius = s.kappa / u
    new_pos = s.pos + radius * vec(
        math.sin(theta1) - math.sin(theta), -math.cos(theta1) + math.cos(theta)
    )
    return replace(s, pos=new_pos, heading=wrap_angle(theta1))


def step_evader(s: EvaderState, u: np.ndarray, dt: float) -> EvaderState:
    """Advance an evader one step under a control in the unit disk."""
    u = np.asarray(u, dtype=np.float64)
    if float(np.hypot(u[0], u[1])) > 1.0 + _CTRL_EPS:
        raise ValueError("evader control outside the unit disk")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    return replace(s, pos=s.pos + s.v_max * dt * u)


def capture_check(p: PursuerState, e: EvaderState) -> bool:
    """True when the evader is within the pursuer's capture radius."""
    d = p.pos - e.pos
    return float(np.hypot(d[0], d[1])) <= p.capture_radius


def speed_ratio(p: PursuerState, e: EvaderState) -> SpeedRatio:
    return SpeedRatio(p.v_max / e.v_max)


__all__ = [
    "EvaderState",
    "EvaderStatus",
    "PursuerState",
    "SpeedRatio",
    "GoalRegion",
    "DiskGoal",
    "EllipseGoal",
    "CustomGoal",
    "goal_eval",
    "project_to_goal",
    "step_pursuer",
    "step_evader",
    "capture_check",
    "speed_ratio",
]
