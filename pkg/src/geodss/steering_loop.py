"""Closed-loop steering engine: measure, assimilate, optimize, decide, drill.

A session owns a hidden synthetic truth, the evolving ensemble, the drilled
trajectory and the latest recommendation. Decisions are taken either
automatically (accept the recommendation) or by a human override; the truth
is only ever read to synthesize noisy measurements and to grade the finished
well, never by the decision path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .em_forward import MeasurementVector, ToolSpec, observe
from .enkf import assimilate
from .geomodel import (
    EarthRealization,
    Ensemble,
    GeostatParams,
    generate_ensemble,
    generate_truth,
    layer_query,
    load_preset,
)
from .objectives import (
    DELTA_X_DECISION,
    PRIMARY_WEIGHTS,
    Constraints,
    ConstraintViolation,
    ObjectiveWeights,
    Segment,
    dogleg_ok,
    inclination,
    trajectory_value,
)
from .optimizer import (
    DecisionGrid,
    Recommendation,
    optimal_trajectory,
    robust_decision,
    solve_realization,
)

DRILLING = "DRILLING"
STOPPED = "STOPPED"
COMPLETED = "COMPLETED"


@dataclass(frozen=True)
class Action:
    """A committed decision: steer to a target depth, or stop the well."""

    kind: str  # "steer" | "stop"
    target_z: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("steer", "stop"):
            raise ValueError("action kind must be 'steer' or 'stop'")
        if self.kind == "steer" and self.target_z is None:
            raise ValueError("steer actions need a target depth")

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "steer":
            out["target_z"] = self.target_z
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Action":
        return cls(kind=data["kind"], target_z=data.get("target_z"))


@dataclass(frozen=True)
class SessionConfig:
    """Everything a session needs, including the three seed streams."""

    geostat: GeostatParams = GeostatParams()
    tool: ToolSpec = ToolSpec()
    weights: ObjectiveWeights = PRIMARY_WEIGHTS
    constraints: Constraints = Constraints()
    gamma: float = 1.0
    ensemble_size: int = 100
    horizontal_length: float = 350.0
    start_height: float = 15.0
    start_inclination: float = 80.0
    seeds: tuple[int, int, int] = (101, 202, 303)  # ensemble, truth, noise
    truth_preset: Optional[str] = None
    assimilation_enabled: bool = True
    perfect_information: bool = False  # ensemble = copies of the truth
    z_grid: tuple[float, float, float] = (-30.0, 16.0, 0.25)  # min, max, spacing

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        if self.ensemble_size < 2:
            raise ValueError("ensemble_size must be at least 2")
        if self.horizontal_length <= 0:
            raise ValueError("horizontal_length must be positive")
        if not 0.0 < self.start_inclination <= 90.0:
            raise ValueError("start_inclination must be in (0, 90] degrees")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "z_grid", tuple(float(v) for v in self.z_grid))

    @property
    def n_steps(self) -> int:
        """Decision intervals covering the horizontal length (rounded up)."""
        return int(math.ceil(self.horizontal_length / DELTA_X_DECISION))

    @property
    def start_z(self) -> float:
        return self.geostat.boundary_means[0] + self.start_height

    def to_dict(self) -> dict:
        return {
            "geostat": self.geostat.to_dict(),
            "tool": self.tool.to_dict(),
            "weights": self.weights.to_dict(),
            "constraints": self.constraints.to_dict(),
            "gamma": self.gamma,
            "ensemble_size": self.ensemble_size,
            "horizontal_length": self.horizontal_length,
            "start_height": self.start_height,
            "start_inclination": self.start_inclination,
            "seeds": list(self.seeds),
            "truth_preset": self.truth_preset,
            "assimilation_enabled": self.assimilation_enabled,
            "perfect_information": self.perfect_information,
            "z_grid": list(self.z_grid),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        kwargs = {}
        if "geostat" in data:
            kwargs["geostat"] = GeostatParams.from_dict(data["geostat"])
        if "tool" in data:
            kwargs["tool"] = ToolSpec.from_dict(data["tool"])
        if "weights" in data:
            kwargs["weights"] = ObjectiveWeights.from_dict(data["weights"])
        if "constraints" in data:
            kwargs["constraints"] = Constraints.from_dict(data["constraints"])
        for key in (
            "gamma", "ensemble_size", "horizontal_length", "start_height",
            "start_inclination", "truth_preset", "assimilation_enabled",
            "perfect_information",
        ):
            if key in data:
                kwargs[key] = data[key]
        if "seeds" in data:
            kwargs["seeds"] = tuple(data["seeds"])
        if "z_grid" in data:
            kwargs["z_grid"] = tuple(data["z_grid"])
        return cls(**kwargs)


@dataclass(frozen=True, eq=False)
class SteeringSession:
    """State of one closed-loop operation (immutable; steps return new ones)."""

    config: SessionConfig
    truth: Optional[EarthRealization]
    ensemble: Ensemble
    weights: ObjectiveWeights
    drilled: tuple[tuple[float, float], ...]
    bit_inclination: float
    status: str
    recommendation: Optional[Recommendation]
    history: tuple[dict, ...] = ()
    measurement_queue: Optional[tuple[MeasurementVector, ...]] = None

    @property
    def bit(self) -> tuple[float, float]:
        return self.drilled[-1]

    @property
    def steps_done(self) -> int:
        return len(self.drilled) - 1

    def x_nodes(self) -> np.ndarray:
        """Full decision-column abscissas, anchored once at the start."""
        return DELTA_X_DECISION * np.arange(self.config.n_steps + 1)

    def z_nodes(self) -> np.ndarray:
        z_min, z_max, dz = self.config.z_grid
        nz = int(round((z_max - z_min) / dz)) + 1
        return z_min + dz * np.arange(nz)

    def _z_index(self, z: float) -> int:
        z_min, z_max, dz = self.config.z_grid
        i = int(round((z - z_min) / dz))
        z_nodes = self.z_nodes()
        if not 0 <= i < z_nodes.size or abs(float(z_nodes[i]) - z) > dz / 2:
            raise ValueError(f"depth {z} is outside the decision grid")
        return i

    def grid(self) -> DecisionGrid:
        """Decision grid for the remaining columns, rooted at the bit."""
        k = self.steps_done
        return DecisionGrid(
            x_nodes=self.x_nodes()[k:],
            z_nodes=self.z_nodes(),
            constraints=self.config.constraints,
            root_z_index=self._z_index(self.bit[1]),
            root_inclination=self.bit_inclination,
        )

    def full_grid(self) -> DecisionGrid:
        """The whole-operation grid rooted at the start state."""
        return DecisionGrid(
            x_nodes=self.x_nodes(),
            z_nodes=self.z_nodes(),
            constraints=self.config.constraints,
            root_z_index=self._z_index(self._snap_start_z()),
            root_inclination=self.config.start_inclination,
        )

    def _snap_start_z(self) -> float:
        z_min, _, dz = self.config.z_grid
        return float(self.z_nodes()[int(round((self.config.start_z - z_min) / dz))])


@dataclass(frozen=True)
class CaseMetrics:
    """Truth-relative grading of a finished well."""

    achieved_value: float
    theoretical_max: float
    relative: Optional[float]  # percent; None when the maximum is zero
    landed_layer: str  # "top" | "bottom" | "none" (or "sand<i>" off-preset)
    landing_optimal: bool
    stands_in_target: int

    def to_dict(self) -> dict:
        return {
            "achieved_value": self.achieved_value,
            "theoretical_max": self.theoretical_max,
            "relative": self.relative,
            "landed_layer": self.landed_layer,
            "landing_optimal": self.landing_optimal,
            "stands_in_target": self.stands_in_target,
        }


def _step_seed(noise_seed: int, step_index: int, purpose: int):
    return [noise_seed & 0x7FFFFFFF, step_index, purpose]


def create_session(config: SessionConfig) -> SteeringSession:
    """Sample truth and prior ensemble, place the bit, recommend from the prior.

    No measurement is taken at the start: the first stations are out of the
    tool's reach, so the first decision is prior-driven.
    """
    ens_seed, truth_seed, _ = config.seeds
    if config.truth_preset is not None:
        truth = load_preset(config.truth_preset)
    else:
        truth = generate_truth(config.geostat, truth_seed)
    if config.perfect_information:
        ensemble = Ensemble(members=(truth,) * config.ensemble_size)
    else:
        ensemble = generate_ensemble(config.geostat, config.ensemble_size, ens_seed)
    session = SteeringSession(
        config=config,
        truth=truth,
        ensemble=ensemble,
        weights=config.weights,
        drilled=((0.0, 0.0),),  # placeholder, replaced below after snapping
        bit_inclination=config.start_inclination,
        status=DRILLING,
        recommendation=None,
    )
    start = (0.0, session._snap_start_z())
    session = replace(session, drilled=(start,))
    rec = robust_decision(session.grid(), ensemble, session.weights, config.gamma)
    return replace(session, recommendation=rec)


def create_replay_session(
    config: SessionConfig, measurements: Sequence[MeasurementVector]
) -> SteeringSession:
    """A session without a truth that consumes pre-recorded measurements."""
    ens_seed, _, _ = config.seeds
    ensemble = generate_ensemble(config.geostat, config.ensemble_size, ens_seed)
    session = SteeringSession(
        config=config,
        truth=None,
        ensemble=ensemble,
        weights=config.weights,
        drilled=((0.0, 0.0),),
        bit_inclination=config.start_inclination,
        status=DRILLING,
        recommendation=None,
        measurement_queue=tuple(measurements),
    )
    start = (0.0, session._snap_start_z())
    session = replace(session, drilled=(start,))
    rec = robust_decision(session.grid(), ensemble, session.weights, config.gamma)
    return replace(session, recommendation=rec)


def _resolve_action(session: SteeringSession, override) -> tuple[Action, str]:
    if override is None:
        rec = session.recommendation
        if rec is None or rec.action == "stop":
            return Action("stop"), "auto"
        return Action("steer", rec.target_z), "auto"
    if isinstance(override, Action):
        return override, "human"
    raise TypeError("override must be an Action or None")


def _validate_steer(session: SteeringSession, target_z: float) -> tuple[float, Segment]:
    grid = session.grid()
    zi = session._z_index(target_z)
    target = float(grid.z_nodes[zi])
    bit = session.bit
    if target > bit[1]:
        raise ConstraintViolation("climbing segment: target is above the bit")
    seg = Segment(bit, (float(grid.x_nodes[1]), target))
    if not dogleg_ok(session.bit_inclination, seg, session.config.constraints):
        raise ConstraintViolation(
            f"dogleg: target {target} needs more than "
            f"{session.config.constraints.max_dogleg} degrees of turn"
        )
    return target, seg


def step(session: SteeringSession, override: Optional[Action] = None) -> SteeringSession:
    """Commit one decision: drill a stand (or stop), measure, assimilate,
    and recompute the recommendation. Infeasible overrides are rejected with
    the session unchanged."""
    if session.status != DRILLING:
        raise RuntimeError(f"session is {session.status}, not drilling")
    action, decided_by = _resolve_action(session, override)
    cfg = session.config

    if action.kind == "stop":
        record = {
            "step": session.steps_done,
            "decided_by": decided_by,
            "action": action.to_dict(),
            "measurement": None,
            "assimilation": None,
        }
        return replace(
            session,
            status=STOPPED,
            recommendation=None,
            history=session.history + (record,),
        )

    target, seg = _validate_steer(session, action.target_z)
    new_point = (seg.x1, target)
    drilled = session.drilled + (new_point,)
    new_inclination = inclination(seg)
    k_done = len(drilled) - 1

    if k_done >= cfg.n_steps:
        record = {
            "step": k_done,
            "decided_by": decided_by,
            "action": Action("steer", target).to_dict(),
            "measurement": None,
            "assimilation": None,
        }
        return replace(
            session,
            drilled=drilled,
            bit_inclination=new_inclination,
            status=COMPLETED,
            recommendation=None,
            history=session.history + (record,),
        )

    # measure at the new bit, then assimilate before the next decision
    if session.measurement_queue is not None:
        if not session.measurement_queue:
            raise RuntimeError("replay session ran out of recorded measurements")
        measurement = session.measurement_queue[0]
        queue = session.measurement_queue[1:]
    else:
        measurement = observe(
            session.truth, new_point, cfg.tool, _step_seed(cfg.seeds[2], k_done, 0)
        )
        queue = None

    diagnostics = None
    ensemble = session.ensemble
    if cfg.assimilation_enabled:
        ensemble, diagnostics = assimilate(
            ensemble,
            new_point,
            measurement,
            cfg.tool,
            _step_seed(cfg.seeds[2], k_done, 1),
            return_diagnostics=True,
        )

    moved = replace(
        session,
        drilled=drilled,
        bit_inclination=new_inclination,
        ensemble=ensemble,
        measurement_queue=queue,
    )
    rec = robust_decision(moved.grid(), ensemble, session.weights, cfg.gamma)
    record = {
        "step": k_done,
        "decided_by": decided_by,
        "action": Action("steer", target).to_dict(),
        "measurement": measurement.to_dict(),
        "assimilation": diagnostics,
        "recommendation": rec.to_dict(),
    }
    return replace(moved, recommendation=rec, history=session.history + (record,))


def set_weights(session: SteeringSession, weights: ObjectiveWeights) -> SteeringSession:
    """Swap objective weights and recompute the recommendation in place."""
    if not isinstance(weights, ObjectiveWeights):
        weights = ObjectiveWeights(**weights)
    record = {"weights": weights.to_dict()}
    out = replace(session, weights=weights, history=session.history + (record,))
    if session.status == DRILLING:
        rec = robust_decision(out.grid(), out.ensemble, weights, session.config.gamma)
        out = replace(out, recommendation=rec)
    return out


def _stand_layer(truth: EarthRealization, a, b):
    """Layer fully containing a stand (midpoint and both ends), else None."""
    mid = layer_query(truth, (a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0)
    if not mid.in_reservoir:
        return None
    for x, z in (a, b):
        if layer_query(truth, x, z).layer != mid.layer:
            return None
    return mid.layer


def _landing_layer(truth: EarthRealization, points: Sequence[tuple[float, float]]):
    """Sand layer of the final run of >= 2 consecutive full stands, else None.

    The final run is the sustained drilling the well ends with; earlier
    lingering (e.g. crossing a thick sand on the way down) is not a landing.
    """
    layers = [
        _stand_layer(truth, a, b) for a, b in zip(points[:-1], points[1:])
    ]
    landed = None
    for a, b in zip(layers[:-1], layers[1:]):
        if a is not None and a == b:
            landed = a
    stands = sum(1 for q in layers if landed is not None and q == landed)
    return landed, stands


def _layer_label(truth: EarthRealization, layer: Optional[int]) -> str:
    if layer is None:
        return "none"
    sands = truth.sand_layers
    if layer == sands[0]:
        return "top"
    if layer == sands[-1]:
        return "bottom"
    return f"sand{layer}"


def evaluate_case(session: SteeringSession) -> CaseMetrics:
    """Grade a finished session against its synthetic truth.

    The achieved value re-prices the drilled trajectory under the truth with
    the session's current weights; the denominator is the truth-optimal value
    from the same start state.
    """
    if session.status == DRILLING:
        raise RuntimeError("evaluate_case needs a finished session")
    if session.truth is None:
        raise RuntimeError("replay sessions carry no truth to grade against")
    truth = session.truth
    weights = session.weights
    policy = solve_realization(session.full_grid(), truth, weights, gamma=1.0)
    theoretical = policy.root_value
    achieved = (
        trajectory_value(session.drilled, truth, weights, gamma=1.0)
        if len(session.drilled) > 1
        else 0.0
    )
    optimal_points = optimal_trajectory(policy, truth)
    landed, stands = _landing_layer(truth, session.drilled)
    target, _ = _landing_layer(truth, optimal_points)
    relative = 100.0 * achieved / theoretical if theoretical > 0 else None
    return CaseMetrics(
        achieved_value=achieved,
        theoretical_max=theoretical,
        relative=relative,
        landed_layer=_layer_label(truth, landed),
        landing_optimal=landed == target,
        stands_in_target=stands,
    )


def run_auto(session: SteeringSession, max_steps: Optional[int] = None) -> SteeringSession:
    """Follow recommendations until the session finalizes."""
    steps = 0
    while session.status == DRILLING:
        session = step(session)
        steps += 1
        if max_steps is not None and steps >= max_steps:
            break
    return session


def session_snapshot(session: SteeringSession) -> dict:
    """JSON-serializable record sufficient to rebuild the session by replay."""
    return {
        "config": session.config.to_dict(),
        "status": session.status,
        "drilled": [list(p) for p in session.drilled],
        "weights": session.weights.to_dict(),
        "history": list(session.history),
    }


def restore_session(snapshot: dict) -> SteeringSession:
    """Rebuild a session by replaying its recorded decisions and weights."""
    config = SessionConfig.from_dict(snapshot["config"])
    session = create_session(config)
    for record in snapshot["history"]:
        if "weights" in record and "action" not in record:
            session = set_weights(session, ObjectiveWeights.from_dict(record["weights"]))
        else:
            action = Action.from_dict(record["action"])
            override = None if record.get("decided_by") == "auto" else action
            session = step(session, override)
    return session
