"""Visualization payloads: point-cloud rasters and per-member value views.

These are the data behind the interactive console: a raster of ensemble-mean
resistivity, each member's optimal trajectory conditioned on the recommended
first step, and the distribution of predicted whole-well values whose mean
backs the recommendation banner.
"""

from __future__ import annotations

import numpy as np

from .geomodel import Ensemble, boundaries_at_many
from .objectives import trajectory_value
from .steering_loop import SteeringSession

POINTCLOUD_DX = 2.0
POINTCLOUD_DZ = 0.25


def pointcloud(
    ensemble: Ensemble,
    x_min: float,
    x_max: float,
    z_min: float,
    z_max: float,
    cell_dx: float = POINTCLOUD_DX,
    cell_dz: float = POINTCLOUD_DZ,
) -> dict:
    """Raster of per-cell ensemble-average resistivity, row-major top row first."""
    nx = max(1, int(np.ceil((x_max - x_min) / cell_dx)))
    nz = max(1, int(np.ceil((z_max - z_min) / cell_dz)))
    xc = x_min + (np.arange(nx) + 0.5) * cell_dx
    zc = z_min + (np.arange(nz) + 0.5) * cell_dz
    members = ensemble.members
    resist = np.asarray(members[0].layer_resistivities)
    bounds = np.stack([boundaries_at_many(m, xc) for m in members])  # [n, nb, nx]
    layers = (bounds[:, :, :, None] >= zc[None, None, None, :]).sum(axis=1)  # [n, nx, nz]
    mean = resist[layers].mean(axis=0).T  # [nz, nx]
    return {
        "nx": nx,
        "nz": nz,
        "origin": [float(x_min), float(z_min)],
        "spacing": [float(cell_dx), float(cell_dz)],
        "values": [float(v) for v in mean[::-1].ravel()],  # top row first
    }


def member_value_distribution(session: SteeringSession) -> tuple[np.ndarray, float]:
    """Per-member predicted whole-well values and their probability-weighted mean.

    Each member's value is what it has earned along the drilled trajectory so
    far plus its optimal continuation conditioned on the recommended first
    step. On a fresh session the mean therefore equals the recommendation's
    expected value exactly.
    """
    rec = session.recommendation
    members = session.ensemble.members
    weights = session.weights
    gamma = session.config.gamma
    if len(session.drilled) > 1:
        drilled = np.array(
            [trajectory_value(session.drilled, m, weights, gamma=1.0) for m in members]
        )
    else:
        drilled = np.zeros(len(members))
    if rec is None:
        future = np.zeros(len(members))
    else:
        future = np.array([p.predicted_value for p in rec.conditioned])
    values = drilled + future
    mean = float(np.dot(session.ensemble.weights, values))
    return values, mean


def state_view(session: SteeringSession, version: int) -> dict:
    """Full client-facing state: bit, trajectories, values, uncertainty raster."""
    rec = session.recommendation
    values, mean = member_value_distribution(session)
    z_min, z_max, _ = session.config.z_grid
    x_nodes = session.x_nodes()
    per_real = []
    if rec is not None:
        for p in rec.conditioned:
            per_real.append(
                {
                    "trajectory": [[float(a), float(b)] for a, b in p.trajectory],
                    "predicted_value": None,  # filled below with the whole-well value
                }
            )
    for i, entry in enumerate(per_real):
        entry["predicted_value"] = float(values[i])
    return {
        "version": version,
        "status": session.status,
        "bit": {
            "x": float(session.bit[0]),
            "z": float(session.bit[1]),
            "inclination": float(session.bit_inclination),
        },
        "drilled": [[float(a), float(b)] for a, b in session.drilled],
        "recommendation": rec.to_dict() if rec is not None else None,
        "weights": session.weights.to_dict(),
        "per_realization": per_real,
        "value_cdf": sorted(float(v) for v in values),
        "cdf_mean": mean,
        "pointcloud": pointcloud(
            session.ensemble, float(x_nodes[0]), float(x_nodes[-1]), z_min, z_max
        ),
        "realization_count": session.ensemble.size,
    }
