"""Synthetic look-around EM tool: directional apparent-resistivity channels.

Each channel averages the resistivity profile above (up) or below (down) the
tool over the depth of investigation with a normalized triangular kernel
w(s) = 2 (doi - s) / doi**2, integrated by a composite midpoint rule.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geomodel import DomainError, EarthRealization, boundaries_at, layer_index_from_bounds

#: Midpoint-rule subintervals used for the kernel integral.
N_SUBINTERVALS = 64


@dataclass(frozen=True)
class Channel:
    direction: str  # "up" or "down"
    kernel: str = "triangular"

    def __post_init__(self):
        if self.direction not in ("up", "down"):
            raise ValueError("channel direction must be 'up' or 'down'")
        if self.kernel != "triangular":
            raise ValueError("only the triangular kernel is implemented")


@dataclass(frozen=True)
class ToolSpec:
    """Tool geometry and noise model."""

    doi: float = 5.0
    channels: tuple[Channel, ...] = (Channel("up"), Channel("down"))
    noise_variance: float = 0.5

    def __post_init__(self):
        if self.doi <= 0:
            raise ValueError("doi must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")
        object.__setattr__(self, "channels", tuple(self.channels))

    def to_dict(self) -> dict:
        return {
            "doi": self.doi,
            "channels": [{"direction": c.direction, "kernel": c.kernel} for c in self.channels],
            "noise_variance": self.noise_variance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ToolSpec":
        channels = tuple(
            Channel(c["direction"], c.get("kernel", "triangular"))
            for c in data.get("channels", ({"direction": "up"}, {"direction": "down"}))
        )
        return cls(
            doi=data.get("doi", 5.0),
            channels=channels,
            noise_variance=data.get("noise_variance", 0.5),
        )


@dataclass(frozen=True)
class MeasurementVector:
    """Per-station channel readings (dimensionless apparent resistivity)."""

    station: tuple[float, float]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "station", (float(self.station[0]), float(self.station[1])))
        values = tuple(float(v) for v in self.values)
        if not all(np.isfinite(values)):
            raise ValueError("measurement values must be finite")
        object.__setattr__(self, "values", values)

    def to_dict(self) -> dict:
        return {"station": list(self.station), "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: dict) -> "MeasurementVector":
        return cls(station=tuple(data["station"]), values=tuple(data["values"]))


def _kernel_nodes(doi: float):
    """Midpoints and weights of the triangular kernel quadrature."""
    ds = doi / N_SUBINTERVALS
    s = (np.arange(N_SUBINTERVALS) + 0.5) * ds
    w = 2.0 * (doi - s) / (doi * doi) * ds
    return s, w


def simulate(model: EarthRealization, station: tuple[float, float], tool: ToolSpec) -> MeasurementVector:
    """Noise-free channel readings of the tool at a station."""
    x, z = float(station[0]), float(station[1])
    bounds = boundaries_at(model, x)  # raises DomainError outside extent
    s, w = _kernel_nodes(tool.doi)
    resist = np.asarray(model.layer_resistivities)
    values = []
    for ch in tool.channels:
        sign = 1.0 if ch.direction == "up" else -1.0
        layers = layer_index_from_bounds(bounds, z + sign * s)
        values.append(float(np.dot(w, resist[layers])))
    return MeasurementVector(station=(x, z), values=tuple(values))


def simulate_members(
    members: Sequence[EarthRealization], station: tuple[float, float], tool: ToolSpec
) -> np.ndarray:
    """Channel readings for many members at once; shape [channel, member].

    All members must share knots_x and layer_resistivities (ensemble layout).
    """
    x, z = float(station[0]), float(station[1])
    ref = members[0]
    if x < ref.x_min or x > ref.x_max:
        raise DomainError(f"x={x} outside model extent [{ref.x_min}, {ref.x_max}]")
    knots = ref.knots_x
    i = min(int(np.searchsorted(knots, x, side="right")) - 1, knots.size - 2)
    i = max(i, 0)
    t = (x - knots[i]) / (knots[i + 1] - knots[i])
    stacked = np.stack([m.boundary_depths for m in members])  # [n, nb, nk]
    bounds = stacked[:, :, i] * (1.0 - t) + stacked[:, :, i + 1] * t  # [n, nb]
    s, w = _kernel_nodes(tool.doi)
    resist = np.asarray(ref.layer_resistivities)
    out = np.empty((len(tool.channels), len(members)))
    for c, ch in enumerate(tool.channels):
        sign = 1.0 if ch.direction == "up" else -1.0
        zs = z + sign * s  # [q]
        layers = (bounds[:, :, None] >= zs[None, None, :]).sum(axis=1)  # [n, q]
        out[c] = resist[layers] @ w
    return out


def observe(
    truth: EarthRealization, station: tuple[float, float], tool: ToolSpec, seed: int
) -> MeasurementVector:
    """Noisy truth measurement: simulate plus seeded Gaussian channel noise."""
    clean = simulate(truth, station, tool)
    if tool.noise_variance == 0.0:
        return clean
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, np.sqrt(tool.noise_variance), len(clean.values))
    return MeasurementVector(
        station=clean.station, values=tuple(np.asarray(clean.values) + noise)
    )


def write_measurement_csv(path, measurements: Iterable[MeasurementVector]) -> None:
    """Export a measurement log as CSV (x, z, channel_up, channel_down)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "z", "channel_up", "channel_down"])
        for m in measurements:
            writer.writerow([repr(m.station[0]), repr(m.station[1])] + [repr(v) for v in m.values])
