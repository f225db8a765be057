"""Planar vector helpers and shared numeric tolerances.

Points and directions are plain numpy float64 arrays of shape (2,).  Every
module compares against the same epsilons, centralized in
:class:`NumericConfig`, because the active-set and multiplier logic downstream
is tolerance-sensitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def vec(x: float, y: float) -> np.ndarray:
    """Build a 2-D point/direction as a float64 array."""
    return np.array([x, y], dtype=np.float64)


def rotate_cw(v: np.ndarray) -> np.ndarray:
    """Rotate a vector clockwise by a quarter turn: (x, y) -> (y, -x)."""
    return np.array([v[1], -v[0]], dtype=np.float64)


def polar_dir(psi: float, psi0: float) -> np.ndarray:
    """Unit direction at angle psi + psi0."""
    a = psi + psi0
    return np.array([math.cos(a), math.sin(a)], dtype=np.float64)


def norm(v: np.ndarray) -> float:
    return math.hypot(v[0], v[1])


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize; raises on (near-)zero input rather than guessing a direction."""
    n = math.hypot(v[0], v[1])
    if n < 1e-300:
        raise ValueError("cannot normalize zero vector")
    return v / n


def wrap_angle(theta: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    out = math.fmod(theta, TWO_PI)
    if out < 0.0:
        out += TWO_PI
    # fmod can return TWO_PI - tiny; the comparison above keeps it in range
    if out >= TWO_PI:
        out -= TWO_PI
    return out


@dataclass(frozen=True)
class NumericConfig:
    """Solver tolerances shared across modules.

    eps_active: threshold for deciding a constraint is active at the solution.
    eps_dist: convergence threshold on iterate displacement in the
        minimum-distance solver.
    max_iter: iteration cap for iterative solvers.
    """

    eps_active: float = 1e-7
    eps_dist: float = 1e-9
    max_iter: int = 10000

    def __post_init__(self) -> None:
        if not (self.eps_active > 0.0 and self.eps_dist > 0.0):
            raise ValueError("tolerances must be strictly positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_CONFIG = NumericConfig()
