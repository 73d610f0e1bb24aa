"""Co-optimization of solar array sizing, thruster operating modes, and
low-thrust interplanetary trajectories by smoothed direct transcription."""

from .continuation import (
    ComparisonRow,
    ContinuationSchedule,
    ContinuationTrace,
    MissionSolution,
    compare_modesets,
    initial_guess,
    run_continuation,
)
from .errors import (
    ConfigurationError,
    ContinuationAbortError,
    DegenerateOrbitError,
    IntegrationFailureError,
    ThrottleTableError,
)
from .mee import CartesianState, FullState, MeeState, mee_rates, mee_to_cartesian, rk4_step
from .power import (
    PowerPlantConfig,
    SmoothingParams,
    available_power_piecewise,
    available_power_smooth,
    solar_array_power,
)
from .solver import KktReport, SolveResult, SolverOptions, kkt_report, solve, solve_with_scipy
from .thruster import (
    ActivationVector,
    ModeSet,
    ThrottleMode,
    activation_vector,
    blended_output,
    build_mode_set,
    load_throttle_table,
)
from .transcription import (
    DecisionLayout,
    DecisionPoint,
    MassBreakdown,
    MassBudgetConfig,
    MissionConfig,
    NlpProblem,
    StateBounds,
    assemble,
    derivatives,
    mass_breakdown,
    objective,
    time_grid,
)
from .units import CanonicalUnits
from .validation import (
    ValidationReport,
    ValidationThresholds,
    audit,
    hard_mode_index,
    repropagate,
)

__version__ = "0.1.0"
