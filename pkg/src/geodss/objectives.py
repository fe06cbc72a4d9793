"""Trajectory-segment value functions and drilling constraints.

Values are expressed in equivalent meters of reference sand drilled: one unit
is the net present value of a stand positioned along a one-meter-thick sand.
Position value is proportional to local sand thickness and doubles inside the
sweet-spot band below the sand roof; sand quality is a constant per layer;
drilling cost is proportional to arc length. Segment integrals use midpoint
quadrature, refined when a layer boundary or sweet-spot edge crosses the
segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .geomodel import EarthRealization, boundaries_at_many

#: Horizontal distance between decision points (m); normalizes the unit scale.
DELTA_X_DECISION = 28.56
#: Sweet-spot band below the sand roof (m): value doubles inside it.
SWEET_SPOT_BAND = (0.75, 2.25)
#: Sand-quality values: top/intermediate sands and the bottom sand.
SAND_VALUE_TOP = 7.0
SAND_VALUE_BOTTOM = 14.0
#: Drilling cost per meter of arc length, in units.
COST_PER_METER = 0.003
#: Midpoint quadrature points per segment, and the refinement multiplier
#: applied when the integrand has a breakpoint inside the segment's span.
N_QUAD = 16
REFINE_FACTOR = 8


class ConstraintViolation(ValueError):
    """A segment violates the drilling constraints."""


@dataclass(frozen=True)
class Segment:
    """A straight well segment from start to end (meters, z positive up)."""

    start: tuple[float, float]
    end: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "end", (float(self.end[0]), float(self.end[1])))

    @property
    def x0(self) -> float:
        return self.start[0]

    @property
    def z0(self) -> float:
        return self.start[1]

    @property
    def x1(self) -> float:
        return self.end[0]

    @property
    def z1(self) -> float:
        return self.end[1]


@dataclass(frozen=True)
class ObjectiveWeights:
    """Non-negative weights of the position, sand-quality and cost objectives."""

    w_position: float = 1.0
    w_sand: float = 0.0
    w_cost: float = 1.0

    def __post_init__(self):
        for name in ("w_position", "w_sand", "w_cost"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and non-negative")
            object.__setattr__(self, name, v)

    def to_dict(self) -> dict:
        return {"w_position": self.w_position, "w_sand": self.w_sand, "w_cost": self.w_cost}

    @classmethod
    def from_dict(cls, data: dict) -> "ObjectiveWeights":
        return cls(
            w_position=data.get("w_position", 1.0),
            w_sand=data.get("w_sand", 0.0),
            w_cost=data.get("w_cost", 1.0),
        )


#: Default weighting: position and cost only.
PRIMARY_WEIGHTS = ObjectiveWeights(1.0, 0.0, 1.0)
#: Alternative weighting prioritizing sand quality.
ALTERNATIVE_WEIGHTS = ObjectiveWeights(0.3, 0.7, 1.0)


@dataclass(frozen=True)
class Constraints:
    """Dogleg severity per stand and maximum inclination, in degrees."""

    max_dogleg: float = 2.0
    max_inclination: float = 90.0

    def __post_init__(self):
        if self.max_dogleg <= 0 or self.max_inclination <= 0:
            raise ValueError("constraints must be positive")

    def to_dict(self) -> dict:
        return {"max_dogleg": self.max_dogleg, "max_inclination": self.max_inclination}

    @classmethod
    def from_dict(cls, data: dict) -> "Constraints":
        return cls(
            max_dogleg=data.get("max_dogleg", 2.0),
            max_inclination=data.get("max_inclination", 90.0),
        )


def inclination_from_drop(dx: float, drop: float) -> float:
    """Inclination (degrees from vertical) of a segment advancing dx, dropping drop."""
    if drop < 0:
        raise ConstraintViolation("climbing segment: end is above start")
    if drop == 0.0:
        return 90.0
    return math.degrees(math.atan(dx / drop))


def inclination(segment: Segment) -> float:
    """Inclination of a segment in degrees; 90 is horizontal."""
    dx = segment.x1 - segment.x0
    if dx <= 0:
        raise ValueError("segment must advance in x")
    return inclination_from_drop(dx, segment.z0 - segment.z1)


def dogleg_ok(prev_inclination: float, segment: Segment, constraints: Constraints) -> bool:
    """Whether a segment is drillable after a segment at prev_inclination."""
    inc = inclination(segment)
    return (
        abs(inc - prev_inclination) <= constraints.max_dogleg
        and inc <= constraints.max_inclination
    )


def layer_value_tables(model: EarthRealization) -> tuple[np.ndarray, np.ndarray]:
    """Per-layer sand flags and sand-quality values for a model.

    The deepest sand carries the bottom-sand value; every other sand carries
    the top-sand value; shales are zero.
    """
    sand_mask = np.zeros(model.n_layers, dtype=bool)
    sand_vals = np.zeros(model.n_layers)
    sands = model.sand_layers
    for i in sands:
        sand_mask[i] = True
        sand_vals[i] = SAND_VALUE_BOTTOM if i == sands[-1] else SAND_VALUE_TOP
    return sand_mask, sand_vals


def _segment_integrals(
    model: EarthRealization,
    x0: float,
    z0: float,
    x1: float,
    z1: float,
    n_quad: int,
    sweet_lo: float,
    sweet_hi: float,
) -> tuple[float, float]:
    """Midpoint-rule integrals of the position and sand integrands, scaled.

    Delegates the integrand to the compiled kernels the optimizer tables use,
    so a segment evaluated here is bit-identical to the same segment inside a
    policy table. Quadrature refines by REFINE_FACTOR when a boundary or
    sweet-band edge crosses the segment line.
    """
    if x1 <= x0:
        raise ValueError("segment must advance in x")
    sand_mask, sand_vals = layer_value_tables(model)
    ends = boundaries_at_many(model, np.array([x0, 0.5 * (x0 + x1), x1])).T
    n = n_quad
    if _kernels.crossing(ends, z0, z1, sand_mask, sweet_lo, sweet_hi):
        n = n_quad * REFINE_FACTOR
    t = (np.arange(n) + 0.5) / n
    bounds_q = boundaries_at_many(model, x0 + (x1 - x0) * t).T
    acc_p, acc_s = _kernels.segment_integrals(
        bounds_q, z0, z1, sand_mask, sand_vals, sweet_lo, sweet_hi
    )
    scale = (x1 - x0) / (n * DELTA_X_DECISION)
    return acc_p * scale, acc_s * scale


def position_value(
    segment: Segment,
    model: EarthRealization,
    n_quad: int = N_QUAD,
    sweet_spot: tuple[float, float] = SWEET_SPOT_BAND,
) -> float:
    """Sand-thickness exposure of a segment, doubled in the sweet spot."""
    p, _ = _segment_integrals(
        model, segment.x0, segment.z0, segment.x1, segment.z1,
        n_quad, sweet_spot[0], sweet_spot[1],
    )
    return p


def sand_value(segment: Segment, model: EarthRealization, n_quad: int = N_QUAD) -> float:
    """Sand-quality exposure of a segment (constant per sand layer)."""
    _, s = _segment_integrals(
        model, segment.x0, segment.z0, segment.x1, segment.z1,
        n_quad, SWEET_SPOT_BAND[0], SWEET_SPOT_BAND[1],
    )
    return s


def drilling_cost(segment: Segment) -> float:
    """Drilling cost of a segment (non-positive), proportional to arc length."""
    dx = segment.x1 - segment.x0
    dz = segment.z1 - segment.z0
    return -COST_PER_METER * math.sqrt(dx * dx + dz * dz)


ExtraObjective = tuple[float, Callable[[Segment, EarthRealization], float]]


def segment_value(
    segment: Segment,
    model: EarthRealization,
    weights: ObjectiveWeights,
    n_quad: int = N_QUAD,
    extra: Sequence[ExtraObjective] = (),
) -> float:
    """Weighted multi-objective value of one segment.

    Additional objectives can be registered as (weight, fn(segment, model))
    pairs; they contribute weight * fn to the sum.
    """
    p, s = _segment_integrals(
        model, segment.x0, segment.z0, segment.x1, segment.z1,
        n_quad, SWEET_SPOT_BAND[0], SWEET_SPOT_BAND[1],
    )
    value = weights.w_position * p + weights.w_sand * s + weights.w_cost * drilling_cost(segment)
    for w, fn in extra:
        value += w * fn(segment, model)
    return value


def trajectory_value(
    points: Sequence[tuple[float, float]],
    model: EarthRealization,
    weights: ObjectiveWeights,
    gamma: float = 1.0,
    extra: Sequence[ExtraObjective] = (),
) -> float:
    """Accumulated (optionally discounted) value of a piecewise-linear path.

    Folds right-to-left in the same association order as the optimizer's
    recursion, so at gamma=1 a replayed optimal path reproduces the planned
    value bit-for-bit.
    """
    value = 0.0
    for a, b in reversed(list(zip(points[:-1], points[1:]))):
        value = segment_value(Segment(a, b), model, weights, extra=extra) + gamma * value
    return value
