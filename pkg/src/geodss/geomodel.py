"""Layer-cake earth models and geostatistical prior/truth sampling.

Depths are in meters with z positive upward; the expected reservoir top sits
at z = 0. A model is a stack of layers separated by boundary-depth curves
sampled at shared knots along the lateral (x) axis; each layer carries one
known resistivity. Sand layers alternate with shales: shale above, between
and below the sands.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

#: Minimum layer thickness (m) enforced by the crossing repair.
MIN_LAYER_THICKNESS = 0.01


class GenerationError(RuntimeError):
    """The Gaussian-field sampler could not produce a valid field."""


class DomainError(ValueError):
    """A query point lies outside a model's lateral extent."""


@dataclass(frozen=True)
class GeostatParams:
    """Prior parameters for boundary-depth uncertainty.

    ``boundary_means`` are ordered top-down (strictly decreasing depths);
    ``layer_resistivities`` has one entry per layer, i.e. one more than the
    boundary count. The spatial covariance along x is
    ``sill * exp(-3h/range)`` (effective-range convention) plus a nugget on
    the diagonal, and boundaries b, b' are cross-correlated by
    ``adjacent_correlation ** |b - b'|``.
    """

    boundary_means: tuple[float, ...] = (0.0, -5.3, -13.3, -20.1)
    sill: float = 2.5
    range: float = 350.0
    nugget: float = 0.0
    adjacent_correlation: float = 0.7
    knot_spacing: float = 28.56
    x_extent: tuple[float, float] = (-50.0, 420.0)
    layer_resistivities: tuple[float, ...] = (10.0, 150.0, 10.0, 250.0, 10.0)

    def __post_init__(self):
        object.__setattr__(self, "boundary_means", tuple(float(v) for v in self.boundary_means))
        object.__setattr__(self, "x_extent", tuple(float(v) for v in self.x_extent))
        object.__setattr__(
            self, "layer_resistivities", tuple(float(v) for v in self.layer_resistivities)
        )
        means = self.boundary_means
        if len(means) < 1:
            raise ValueError("at least one boundary is required")
        if len(means) > 1 and not np.all(np.diff(means) < 0):
            raise ValueError("boundary_means must be strictly decreasing (top-down)")
        if self.sill < 0:
            raise ValueError("sill must be non-negative")
        if self.range <= 0:
            raise ValueError("range must be positive")
        if self.nugget < 0:
            raise ValueError("nugget must be non-negative")
        if not 0.0 <= self.adjacent_correlation <= 1.0:
            raise ValueError("adjacent_correlation must be in [0, 1]")
        if self.knot_spacing <= 0:
            raise ValueError("knot_spacing must be positive")
        if self.x_extent[1] <= self.x_extent[0]:
            raise ValueError("x_extent must be an increasing interval")
        if len(self.layer_resistivities) != len(means) + 1:
            raise ValueError("layer count must equal boundary count + 1")

    def knots(self) -> np.ndarray:
        """Knot abscissas spanning x_extent, one per knot_spacing."""
        x0, x1 = self.x_extent
        n = int(math.ceil((x1 - x0) / self.knot_spacing))
        knots = x0 + self.knot_spacing * np.arange(n + 1, dtype=float)
        if knots[-1] < x1:  # guard against float shortfall at the far end
            knots = np.append(knots, x0 + self.knot_spacing * (n + 1))
        return knots

    def to_dict(self) -> dict:
        return {
            "boundary_means": list(self.boundary_means),
            "sill": self.sill,
            "range": self.range,
            "nugget": self.nugget,
            "adjacent_correlation": self.adjacent_correlation,
            "knot_spacing": self.knot_spacing,
            "x_extent": list(self.x_extent),
            "layer_resistivities": list(self.layer_resistivities),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GeostatParams":
        known = {f: data[f] for f in (
            "boundary_means", "sill", "range", "nugget", "adjacent_correlation",
            "knot_spacing", "x_extent", "layer_resistivities") if f in data}
        return cls(**known)


@dataclass(frozen=True, eq=False)
class EarthRealization:
    """One layer-cake model: boundary-depth curves at shared knots.

    Immutable after construction; the backing arrays are marked read-only so
    realizations can be shared freely across parallel work.
    """

    knots_x: np.ndarray
    boundary_depths: np.ndarray  # shape [boundary, knot], ordered top-down
    layer_resistivities: tuple[float, ...]

    def __post_init__(self):
        knots = np.ascontiguousarray(self.knots_x, dtype=float)
        depths = np.ascontiguousarray(self.boundary_depths, dtype=float)
        if knots.ndim != 1 or depths.ndim != 2 or depths.shape[1] != knots.shape[0]:
            raise ValueError("boundary_depths must be [boundary, knot] matching knots_x")
        if not np.all(np.diff(knots) > 0):
            raise ValueError("knots_x must be strictly increasing")
        if depths.shape[0] > 1 and not np.all(np.diff(depths, axis=0) < 0):
            raise ValueError("boundaries cross: depths must strictly decrease per knot")
        if not np.all(np.isfinite(depths)):
            raise ValueError("boundary depths must be finite")
        if len(self.layer_resistivities) != depths.shape[0] + 1:
            raise ValueError("layer count must equal boundary count + 1")
        knots.flags.writeable = False
        depths.flags.writeable = False
        object.__setattr__(self, "knots_x", knots)
        object.__setattr__(self, "boundary_depths", depths)
        object.__setattr__(
            self, "layer_resistivities", tuple(float(v) for v in self.layer_resistivities)
        )

    @property
    def n_boundaries(self) -> int:
        return self.boundary_depths.shape[0]

    @property
    def n_layers(self) -> int:
        return self.n_boundaries + 1

    @property
    def x_min(self) -> float:
        return float(self.knots_x[0])

    @property
    def x_max(self) -> float:
        return float(self.knots_x[-1])

    @property
    def sand_layers(self) -> tuple[int, ...]:
        """Indices of sand layers (odd indices between the outer shales)."""
        return tuple(i for i in range(1, self.n_layers - 1, 2))

    def to_dict(self) -> dict:
        return {
            "knots_x": self.knots_x.tolist(),
            "boundary_depths": self.boundary_depths.tolist(),
            "layer_resistivities": list(self.layer_resistivities),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EarthRealization":
        return cls(
            knots_x=np.asarray(data["knots_x"], dtype=float),
            boundary_depths=np.asarray(data["boundary_depths"], dtype=float),
            layer_resistivities=tuple(data["layer_resistivities"]),
        )


@dataclass(frozen=True, eq=False)
class Ensemble:
    """A set of realizations with per-member probability weights."""

    members: tuple[EarthRealization, ...]
    weights: np.ndarray = None

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("ensemble must contain at least one member")
        ref = members[0]
        for m in members[1:]:
            if not np.array_equal(m.knots_x, ref.knots_x):
                raise ValueError("all members must share knots_x")
            if m.layer_resistivities != ref.layer_resistivities:
                raise ValueError("all members must share layer_resistivities")
        if self.weights is None:
            w = np.full(len(members), 1.0 / len(members))
        else:
            w = np.asarray(self.weights, dtype=float).copy()
            if w.shape != (len(members),):
                raise ValueError("weights must have one entry per member")
            if np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be finite and non-negative")
            total = w.sum()
            if total <= 0:
                raise ValueError("weights must not all be zero")
            w = w / total
        assert abs(w.sum() - 1.0) <= 1e-12
        w.flags.writeable = False
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return len(self.members)

    def to_dict(self) -> dict:
        return {
            "members": [m.to_dict() for m in self.members],
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Ensemble":
        return cls(
            members=tuple(EarthRealization.from_dict(m) for m in data["members"]),
            weights=np.asarray(data["weights"], dtype=float),
        )


class LayerQuery(NamedTuple):
    """Layer membership of a point: index, reservoir flag, local geometry."""

    layer: int
    in_reservoir: bool
    thickness: float
    below_roof: float


def repair_depths(depths: np.ndarray) -> np.ndarray:
    """Re-sort boundaries per knot and separate them to the minimum thickness.

    Values are sorted top-down, pushed apart to MIN_LAYER_THICKNESS where they
    cross or pinch, and shifted back so the per-knot mean is preserved.
    """
    rep = -np.sort(-np.asarray(depths, dtype=float), axis=0)
    if rep.shape[0] > 1:
        means = rep.mean(axis=0)
        for b in range(1, rep.shape[0]):
            np.minimum(rep[b], rep[b - 1] - MIN_LAYER_THICKNESS, out=rep[b])
        rep += means - rep.mean(axis=0)
    return rep


def _psd_sqrt(mat: np.ndarray, what: str) -> np.ndarray:
    """Symmetric PSD square root by eigendecomposition, with a jitter floor."""
    vals, vecs = np.linalg.eigh(mat)
    tol = 1e-10 * max(float(vals[-1]), 1.0)
    if float(vals[0]) < -tol:
        raise GenerationError(f"{what} covariance is not positive semi-definite")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def _covariance_factors(params: GeostatParams, knots: np.ndarray):
    h = np.abs(knots[:, None] - knots[None, :])
    cx = params.sill * np.exp(-3.0 * h / params.range)
    cx[np.diag_indices_from(cx)] += params.nugget
    nb = len(params.boundary_means)
    steps = np.abs(np.arange(nb)[:, None] - np.arange(nb)[None, :])
    cb = np.asarray(params.adjacent_correlation, dtype=float) ** steps
    return cb, cx


def _sample_members(params: GeostatParams, n: int, rng: np.random.Generator):
    knots = params.knots()
    cb, cx = _covariance_factors(params, knots)
    bsq = _psd_sqrt(cb, "cross-boundary")
    csq = _psd_sqrt(cx, "spatial")
    means = np.asarray(params.boundary_means, dtype=float)
    z = rng.standard_normal((n, means.size, knots.size))
    fields = np.einsum("ab,nbk,kc->nac", bsq, z, csq)
    members = []
    for i in range(n):
        depths = repair_depths(means[:, None] + fields[i])
        members.append(
            EarthRealization(
                knots_x=knots,
                boundary_depths=depths,
                layer_resistivities=params.layer_resistivities,
            )
        )
    return members


def generate_ensemble(params: GeostatParams, n: int, seed: int) -> Ensemble:
    """Sample a prior ensemble of n realizations, deterministic given seed."""
    if n < 2:
        raise ValueError("ensemble size must be at least 2")
    rng = np.random.default_rng(seed)
    return Ensemble(members=tuple(_sample_members(params, n, rng)))


def generate_truth(params: GeostatParams, seed: int) -> EarthRealization:
    """Sample one synthetic truth from the same prior (independent stream)."""
    rng = np.random.default_rng(seed)
    return _sample_members(params, 1, rng)[0]


def _check_extent(model: EarthRealization, x: float) -> None:
    if x < model.x_min or x > model.x_max:
        raise DomainError(
            f"x={x} outside model extent [{model.x_min}, {model.x_max}]"
        )


def boundaries_at(model: EarthRealization, x: float) -> np.ndarray:
    """Boundary depths at x (piecewise-linear between knots), top-down."""
    _check_extent(model, x)
    out = np.empty(model.n_boundaries)
    for b in range(model.n_boundaries):
        out[b] = np.interp(x, model.knots_x, model.boundary_depths[b])
    return out


def boundaries_at_many(model: EarthRealization, xs: np.ndarray) -> np.ndarray:
    """Boundary depths at several abscissas; shape [boundary, len(xs)]."""
    xs = np.asarray(xs, dtype=float)
    _check_extent(model, float(xs.min()))
    _check_extent(model, float(xs.max()))
    out = np.empty((model.n_boundaries, xs.size))
    for b in range(model.n_boundaries):
        out[b] = np.interp(xs, model.knots_x, model.boundary_depths[b])
    return out


def layer_index_from_bounds(bounds_desc: np.ndarray, z) -> np.ndarray | int:
    """Index of the layer containing z; a boundary belongs to the layer below."""
    zs = np.asarray(z)
    counts = (bounds_desc.reshape((-1,) + (1,) * zs.ndim) >= zs).sum(axis=0)
    return counts if zs.ndim else int(counts)


def resistivity_at(model: EarthRealization, x: float, z: float) -> float:
    """Resistivity of the layer containing (x, z)."""
    bounds = boundaries_at(model, x)
    return model.layer_resistivities[layer_index_from_bounds(bounds, z)]


def resistivity_profile(model: EarthRealization, x: float, zs: np.ndarray) -> np.ndarray:
    """Vectorized resistivity_at for many depths at one x."""
    bounds = boundaries_at(model, x)
    layers = layer_index_from_bounds(bounds, np.asarray(zs, dtype=float))
    return np.asarray(model.layer_resistivities)[layers]


def layer_query(model: EarthRealization, x: float, z: float) -> LayerQuery:
    """Containing layer of (x, z) with its thickness and depth below roof.

    The outer half-spaces report infinite thickness; below_roof is infinite
    above the first boundary and measured from that layer's roof otherwise.
    """
    bounds = boundaries_at(model, x)
    layer = layer_index_from_bounds(bounds, z)
    nb = model.n_boundaries
    roof = math.inf if layer == 0 else float(bounds[layer - 1])
    floor = -math.inf if layer == nb else float(bounds[layer])
    return LayerQuery(
        layer=layer,
        in_reservoir=layer in model.sand_layers,
        thickness=roof - floor,
        below_roof=roof - z,
    )


def mean_model(params: GeostatParams) -> EarthRealization:
    """The prior-mean realization (zero-variance field)."""
    knots = params.knots()
    means = np.asarray(params.boundary_means, dtype=float)
    return EarthRealization(
        knots_x=knots,
        boundary_depths=np.repeat(means[:, None], knots.size, axis=1),
        layer_resistivities=params.layer_resistivities,
    )


PRESET_NAMES = ("top_thicker", "bottom_thicker")


def load_preset(name: str) -> EarthRealization:
    """Load a fixture truth scenario by name."""
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; available: {PRESET_NAMES}")
    ref = importlib.resources.files("geodss") / "fixtures" / f"{name}.json"
    return EarthRealization.from_dict(json.loads(ref.read_text()))
