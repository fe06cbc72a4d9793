"""Closed-loop geosteering decision support.

Maintains an ensemble of layered earth models, assimilates look-around EM
measurements while drilling, and recommends steer/stop decisions by dynamic
programming over all realizations under a weighted multi-objective value
function.
"""

__version__ = "0.1.0"

from .geomodel import (
    EarthRealization,
    Ensemble,
    GeostatParams,
    generate_ensemble,
    generate_truth,
    layer_query,
    load_preset,
    resistivity_at,
)
from .em_forward import MeasurementVector, ToolSpec, observe, simulate
from .enkf import assimilate, innovation_stats
from .objectives import (
    ALTERNATIVE_WEIGHTS,
    PRIMARY_WEIGHTS,
    Constraints,
    ObjectiveWeights,
    Segment,
    dogleg_ok,
    drilling_cost,
    inclination,
    position_value,
    sand_value,
    segment_value,
    trajectory_value,
)
from .optimizer import (
    DecisionGrid,
    DPState,
    PolicyTable,
    Recommendation,
    optimal_trajectory,
    robust_decision,
    solve_realization,
    theoretical_maximum,
)
from .steering_loop import (
    Action,
    CaseMetrics,
    SessionConfig,
    SteeringSession,
    create_replay_session,
    create_session,
    evaluate_case,
    run_auto,
    restore_session,
    session_snapshot,
    set_weights,
    step,
)
from .bench import compare_gamma, run_bench, run_scenario

__all__ = [
    "EarthRealization",
    "Ensemble",
    "GeostatParams",
    "generate_ensemble",
    "generate_truth",
    "layer_query",
    "load_preset",
    "resistivity_at",
    "MeasurementVector",
    "ToolSpec",
    "observe",
    "simulate",
    "assimilate",
    "innovation_stats",
    "ALTERNATIVE_WEIGHTS",
    "PRIMARY_WEIGHTS",
    "Constraints",
    "ObjectiveWeights",
    "Segment",
    "dogleg_ok",
    "drilling_cost",
    "inclination",
    "position_value",
    "sand_value",
    "segment_value",
    "trajectory_value",
    "DecisionGrid",
    "DPState",
    "PolicyTable",
    "Recommendation",
    "optimal_trajectory",
    "robust_decision",
    "solve_realization",
    "theoretical_maximum",
    "Action",
    "CaseMetrics",
    "SessionConfig",
    "SteeringSession",
    "create_replay_session",
    "create_session",
    "evaluate_case",
    "run_auto",
    "restore_session",
    "session_snapshot",
    "set_weights",
    "step",
    "compare_gamma",
    "run_bench",
    "run_scenario",
]
