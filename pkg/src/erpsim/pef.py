"""Positional pursuit enclosure function.

For a pursuer/evader pair the function f(x) = |x - x_P| - alpha*|x - x_E| - r
has a compact, strictly convex superlevel set {f >= 0} that always contains
the evader while the pair is uncaptured.  Its boundary admits a polar
parameterization around the evader which the projection and plotting code
exploit.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidState
from .geometry import DEFAULT_CONFIG, NumericConfig, polar_dir, vec
from .world import EvaderState, PursuerState

_COINCIDENCE_EPS = 1e-12


@dataclass(frozen=True)
class PairState:
    """One pursuer against one evader, with the evader outside capture range."""

    pursuer: PursuerState
    evader: EvaderState

    def __post_init__(self) -> None:
        d = self.pursuer.pos - self.evader.pos
        if math.hypot(d[0], d[1]) <= self.pursuer.capture_radius:
            raise InvalidState("evader already within capture range")
        if not self.alpha > 1.0:
            raise InvalidState("pursuer must be strictly faster than the evader")

    @property
    def alpha(self) -> float:
        return self.pursuer.v_max / self.evader.v_max

    def raw(self) -> tuple[float, float, float, float, float, float]:
        """(px, py, ex, ey, alpha, r) for the kernels."""
        p = self.pursuer.pos
        e = self.evader.pos
        return float(p[0]), float(p[1]), float(e[0]), float(e[1]), self.alpha, self.pursuer.capture_radius


@dataclass(frozen=True)
class PefGradients:
    """Partial derivatives of an enclosure function at a point: with respect to
    the point itself, the pursuer position, the pursuer heading, and the evader
    position."""

    f_x: np.ndarray
    f_P: np.ndarray
    f_theta: float
    f_E: np.ndarray


class PefInterface(ABC):
    """Enclosure-function contract: a value and its gradients.

    Implementations must have a compact, strictly convex superlevel set
    {f >= 0} containing the evader, and be differentiable on (a neighborhood
    of) the zero level set.
    """

    @abstractmethod
    def value(self, x: np.ndarray, X: PairState) -> float: ...

    @abstractmethod
    def gradients(self, x: np.ndarray, X: PairState) -> PefGradients: ...


def positional_value(x: np.ndarray, X: PairState) -> float:
    """Enclosure value |x - x_P| - alpha*|x - x_E| - r at a point."""
    px, py, ex, ey, alpha, r = X.raw()
    return kernels.pef_value(float(x[0]), float(x[1]), px, py, ex, ey, alpha, r)


def positional_gradients(x: np.ndarray, X: PairState) -> PefGradients:
    """Gradients of the positional enclosure value.

    Heading never enters the positional function, so f_theta is zero.  Points
    coinciding with the pursuer or the evader are rejected; the zero level set
    never touches either, so this only guards misuse.
    """
    px, py, ex, ey, alpha, _ = X.raw()
    dxp = vec(float(x[0]) - px, float(x[1]) - py)
    dxe = vec(float(x[0]) - ex, float(x[1]) - ey)
    dp = math.hypot(dxp[0], dxp[1])
    de = math.hypot(dxe[0], dxe[1])
    if dp < _COINCIDENCE_EPS or de < _COINCIDENCE_EPS:
        raise ValueError("gradients undefined at the pursuer or evader position")
    e_xp = dxp / dp
    e_xe = dxe / de
    return PefGradients(
        f_x=e_xp - alpha * e_xe,
        f_P=-e_xp,
        f_theta=0.0,
        f_E=alpha * e_xe,
    )


class PositionalPef(PefInterface):
    """The shipped enclosure function; other families can plug in through
    :class:`PefInterface` but none are provided."""

    def value(self, x: np.ndarray, X: PairState) -> float:
        return positional_value(x, X)

    def gradients(self, x: np.ndarray, X: PairState) -> PefGradients:
        return positional_gradients(x, X)


def boundary_radius(psi: float, psi0: float, X: PairState) -> float:
    """Distance from the evader to the enclosure boundary along the direction
    at angle psi + psi0.  Strictly positive and finite for valid pairs."""
    px, py, ex, ey, alpha, r = X.raw()
    return kernels.boundary_rho(psi + psi0, px, py, ex, ey, alpha, r)


def boundary_points(psis: np.ndarray, X: PairState, psi0: float = 0.0) -> np.ndarray:
    """Boundary samples x_E + rho(psi)*e(psi) for an array of angles, as an
    (n, 2) array.  Used by oracle comparisons and plotting."""
    px, py, ex, ey, alpha, r = X.raw()
    angs = np.asarray(psis, dtype=np.float64) + psi0
    rho = kernels.boundary_rho_many(angs, px, py, ex, ey, alpha, r)
    return np.column_stack([ex + rho * np.cos(angs), ey + rho * np.sin(angs)])


def boundary_point(psi: float, psi0: float, X: PairState) -> np.ndarray:
    rho = boundary_radius(psi, psi0, X)
    return X.evader.pos + rho * polar_dir(psi, psi0)


def project_to_enclosure(
    z: np.ndarray, X: PairState, cfg: NumericConfig = DEFAULT_CONFIG
) -> np.ndarray:
    """Closest point of the enclosure region to z (z itself when inside)."""
    px, py, ex, ey, alpha, r = X.raw()
    x0, x1 = kernels.project_enclosure(float(z[0]), float(z[1]), px, py, ex, ey, alpha, r)
    return vec(x0, x1)


__all__ = [
    "PairState",
    "PefGradients",
    "PefInterface",
    "PositionalPef",
    "positional_value",
    "positional_gradients",
    "boundary_radius",
    "boundary_point",
    "boundary_points",
    "project_to_enclosure",
]
