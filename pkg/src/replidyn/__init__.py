"""Replicator dynamics of the SN / NS / NP social interaction game."""

from .dynamics import (
    IntegratorConfig,
    Outcome,
    Trajectory,
    classify_terminal,
    from_lv,
    integrate,
    integrate_lv,
    lv_rhs,
    replicator_rhs,
    to_lv,
)
from .equilibria import (
    StabilityClass,
    StationaryState,
    pareto_report,
    stationary_states,
)
from .model import (
    ModelParams,
    SimplexPoint,
    build_payoff_matrix,
    check_assumptions,
    ep_np,
    ep_ns,
    ep_sn,
    mean_payoff,
    normalize,
    normalized_matrix,
)
from .regimes import classify_regime, estimate_basins, prediction_check

__version__ = "0.1.0"
