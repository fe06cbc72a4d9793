"""Perturbed-observation ensemble Kalman update of boundary-depth states.

The state vector stacks every boundary-depth value at every knot; the
observation operator is the EM forward model evaluated per member at the
current station. Gains are global (no localization or inflation).
"""

from __future__ import annotations

import numpy as np

from .em_forward import MeasurementVector, ToolSpec, simulate_members
from .geomodel import EarthRealization, Ensemble, repair_depths


class AssimilationError(RuntimeError):
    """The Kalman solve failed (singular innovation covariance)."""


def kalman_update(
    states: np.ndarray,
    simulated: np.ndarray,
    observed: np.ndarray,
    noise_variance: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float]:
    """Perturbed-observation Kalman update of a state matrix.

    states: [state_dim, n] prior columns; simulated: [obs_dim, n] modelled
    data per member; observed: [obs_dim] measured values. Observations are
    perturbed per member with the measurement noise statistics. Returns the
    updated states and the Frobenius norm of the gain.
    """
    states = np.asarray(states, dtype=float)
    simulated = np.asarray(simulated, dtype=float)
    observed = np.asarray(observed, dtype=float)
    if states.ndim != 2 or simulated.ndim != 2 or states.shape[1] != simulated.shape[1]:
        raise ValueError("states and simulated must be matrices with matching member counts")
    if observed.shape != (simulated.shape[0],):
        raise ValueError("observed length must match the simulated channel count")
    n = states.shape[1]
    if n < 2:
        raise ValueError("ensemble size must be at least 2")

    anomalies = states - states.mean(axis=1, keepdims=True)
    d_anom = simulated - simulated.mean(axis=1, keepdims=True)
    c_yd = anomalies @ d_anom.T / (n - 1)
    c_dd = d_anom @ d_anom.T / (n - 1)
    r = noise_variance * np.eye(simulated.shape[0])
    perturbed = observed[:, None] + rng.normal(
        0.0, np.sqrt(noise_variance), size=simulated.shape
    )
    try:
        gain = np.linalg.solve(c_dd + r, c_yd.T).T
    except np.linalg.LinAlgError:
        if not c_yd.any():
            return states.copy(), 0.0  # zero cross-covariance: no update
        raise AssimilationError("innovation covariance is singular") from None
    return states + gain @ (perturbed - simulated), float(np.linalg.norm(gain))


def assimilate(
    ensemble: Ensemble,
    station: tuple[float, float],
    observed: MeasurementVector,
    tool: ToolSpec,
    seed: int,
    return_diagnostics: bool = False,
):
    """One incremental Bayesian update of the ensemble from a measurement.

    Returns the updated ensemble (weights unchanged, crossing repair applied
    per member); with return_diagnostics, also a JSON-friendly record of the
    innovation norms and gain magnitude.
    """
    if ensemble.size < 2:
        raise ValueError("ensemble size must be at least 2")
    if len(observed.values) != len(tool.channels):
        raise ValueError("measurement channel count does not match the tool")
    members = ensemble.members
    shape = members[0].boundary_depths.shape
    states = np.stack([m.boundary_depths.ravel() for m in members], axis=1)
    simulated = simulate_members(members, station, tool)
    rng = np.random.default_rng(seed)
    updated, gain_norm = kalman_update(
        states, simulated, np.asarray(observed.values), tool.noise_variance, rng
    )
    new_members = tuple(
        EarthRealization(
            knots_x=members[0].knots_x,
            boundary_depths=repair_depths(updated[:, j].reshape(shape)),
            layer_resistivities=members[0].layer_resistivities,
        )
        for j in range(ensemble.size)
    )
    result = Ensemble(members=new_members, weights=ensemble.weights)
    if not return_diagnostics:
        return result
    rms_before, rms_after = innovation_stats(ensemble, result, station, observed, tool)
    diagnostics = {
        "station": [float(station[0]), float(station[1])],
        "innovation_rms_before": rms_before,
        "innovation_rms_after": rms_after,
        "gain_frobenius": gain_norm,
    }
    return result, diagnostics


def innovation_stats(
    before: Ensemble,
    after: Ensemble,
    station: tuple[float, float],
    observed: MeasurementVector,
    tool: ToolSpec,
) -> tuple[float, float]:
    """RMS data mismatch over members and channels, before and after."""
    obs = np.asarray(observed.values)[:, None]

    def rms(ens: Ensemble) -> float:
        sim = simulate_members(ens.members, station, tool)
        return float(np.sqrt(np.mean((obs - sim) ** 2)))

    return rms(before), rms(after)
