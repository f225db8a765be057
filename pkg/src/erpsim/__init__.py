"""Multiplayer reach-avoid pursuit games with turn-rate-limited pursuers.

Pursuers defend a compact convex goal region against faster-turning but
slower evaders.  The library certifies winning states through enclosure
regions that provably contain an evader, synthesizes the feedback pursuit
strategies attached to those certificates, assigns pursuit coalitions to
evaders with an exact matching solver, and runs receding-horizon simulations.
"""

from .allocation import (
    ConflictGraph,
    Edge,
    GameGraph,
    Matching,
    ZMode,
    build_conflict_graph,
    build_game_graph,
    solve_bip,
    z_value,
)
from .engine import (
    ConstantHeading,
    EvaderStrategy,
    Event,
    GreedyToGoal,
    RandomWalk,
    Scenario,
    Scripted,
    TickRecord,
    TrajectoryLog,
    fallback_pursuit,
    run_simulation,
)
from .erp import (
    Certificate,
    HeadingTarget,
    Theorem,
    Winner,
    WinningParams,
    certify_1v1,
    certify_2v1,
    cm1,
    cm2,
    pursuit_control_1v1,
    pursuit_control_2v1,
    relaxed_ratio_bound,
    sigma_heading,
    threshold_1v1,
    threshold_2v1,
    xI_velocity_1v1,
    xI_velocity_2v1,
)
from .errors import (
    DegenerateDenominator,
    ErpsimError,
    InvalidState,
    MaxIterExceeded,
    NotApplicable,
    SingularActiveSet,
)
from .geometry import NumericConfig, polar_dir, rotate_cw, vec
from .pef import (
    PairState,
    PefGradients,
    PefInterface,
    PositionalPef,
    boundary_radius,
    positional_gradients,
    positional_value,
    project_to_enclosure,
)
from .safe_distance import (
    CoalitionState,
    EnclosureSolution,
    recover_multipliers,
    reduce_coalition,
    safe_distance_rate,
    solve_safe_distance,
)
from .scenario_io import load_scenario, save_scenario
from .world import (
    CustomGoal,
    DiskGoal,
    EllipseGoal,
    EvaderState,
    EvaderStatus,
    GoalRegion,
    PursuerState,
    SpeedRatio,
    capture_check,
    goal_eval,
    project_to_goal,
    step_evader,
    step_pursuer,
)

__version__ = "0.1.0"
