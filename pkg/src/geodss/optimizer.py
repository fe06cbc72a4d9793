"""Two-step decision algorithm on the discrete trajectory grid.

Step one solves, per realization, a backward value recursion over
(decision point, depth, incoming inclination) states: the best of stopping
(zero) or any dogleg-feasible next depth, with future value discounted by
gamma. Step two picks the single immediate action (stop or one target depth)
that maximizes the probability-weighted expected value across realizations;
only that first step is committed.

The incoming inclination is encoded as the drop (in depth steps) from the
previous node, which is exact on the grid; the root carries the true bit
inclination. Grids should use binary-representable depth spacing (the
default 0.25 m) so that equal-geometry segments share identical floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _kernels
from .geomodel import EarthRealization, Ensemble, boundaries_at_many
from .objectives import (
    COST_PER_METER,
    DELTA_X_DECISION,
    N_QUAD,
    REFINE_FACTOR,
    SWEET_SPOT_BAND,
    Constraints,
    ObjectiveWeights,
    Segment,
    inclination_from_drop,
    layer_value_tables,
    segment_value,
)

STOP = -1


@dataclass(frozen=True, eq=False)
class DecisionGrid:
    """Discretized trajectory states ahead of the bit.

    x_nodes are the decision-point abscissas (uniform spacing, first node at
    the bit); z_nodes the candidate depths (ascending, uniform spacing). The
    root state is the bit: its depth index and true incoming inclination.
    """

    x_nodes: np.ndarray
    z_nodes: np.ndarray
    constraints: Constraints
    root_z_index: int
    root_inclination: float

    def __post_init__(self):
        x = np.ascontiguousarray(self.x_nodes, dtype=float)
        z = np.ascontiguousarray(self.z_nodes, dtype=float)
        if x.size < 1 or z.size < 2:
            raise ValueError("grid needs at least one x node and two depths")
        if x.size > 1:
            dx = np.diff(x)
            if not np.allclose(dx, dx[0], rtol=1e-9, atol=1e-9) or dx[0] <= 0:
                raise ValueError("x_nodes must be uniformly increasing")
        dz = np.diff(z)
        if not np.allclose(dz, dz[0], rtol=1e-9, atol=1e-9) or dz[0] <= 0:
            raise ValueError("z_nodes must be uniformly increasing")
        if not 0 <= self.root_z_index < z.size:
            raise ValueError("bit state outside grid")
        if not 0.0 < self.root_inclination <= 90.0:
            raise ValueError("root inclination must be in (0, 90] degrees")
        x.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "x_nodes", x)
        object.__setattr__(self, "z_nodes", z)

    @classmethod
    def build(
        cls,
        x_start: float,
        n_steps: int,
        bit_z: float,
        bit_inclination: float,
        constraints: Constraints = Constraints(),
        z_min: float = -30.0,
        z_max: float = 16.0,
        dz: float = 0.25,
        dx: float = DELTA_X_DECISION,
    ) -> "DecisionGrid":
        """Grid of n_steps decision intervals starting at the bit."""
        x_nodes = x_start + dx * np.arange(n_steps + 1)
        nz = int(round((z_max - z_min) / dz)) + 1
        z_nodes = z_min + dz * np.arange(nz)
        root = int(round((bit_z - z_min) / dz))
        if not 0 <= root < nz or abs(z_nodes[root] - bit_z) > 1e-9:
            raise ValueError(f"bit depth {bit_z} is not a grid node")
        return cls(
            x_nodes=x_nodes,
            z_nodes=z_nodes,
            constraints=constraints,
            root_z_index=root,
            root_inclination=bit_inclination,
        )

    @property
    def n_steps(self) -> int:
        return self.x_nodes.size - 1

    @property
    def n_depths(self) -> int:
        return self.z_nodes.size

    @property
    def dz(self) -> float:
        return float(self.z_nodes[1] - self.z_nodes[0])


@dataclass(frozen=True)
class DPState:
    """A grid state: decision index, depth index, previous depth index.

    prev_z_index None marks the root, whose incoming inclination is the true
    bit inclination rather than a grid drop.
    """

    k: int
    z_index: int
    prev_z_index: Optional[int] = None

    def drop(self) -> Optional[int]:
        return None if self.prev_z_index is None else self.prev_z_index - self.z_index


class _GridTables:
    """Geometry shared by every realization on one grid: inclinations per
    column and drop, dogleg windows per state, reachability, needed pairs."""

    def __init__(self, grid: DecisionGrid):
        K = grid.n_steps
        nd = grid.n_depths
        dz = grid.dz
        cons = grid.constraints
        alpha = np.empty((K, nd))
        for k in range(K):
            dxk = float(grid.x_nodes[k + 1] - grid.x_nodes[k])
            for d in range(nd):
                alpha[k, d] = inclination_from_drop(dxk, float(grid.z_nodes[d] - grid.z_nodes[0]))
        win_lo = np.ones((K, nd), dtype=np.int64)
        win_hi = np.zeros((K, nd), dtype=np.int64)
        for k in range(1, K):
            mask = np.abs(alpha[k][None, :] - alpha[k - 1][:, None]) <= cons.max_dogleg
            mask &= alpha[k][None, :] <= cons.max_inclination
            any_row = mask.any(axis=1)
            win_lo[k] = np.where(any_row, mask.argmax(axis=1), 1)
            win_hi[k] = np.where(any_row, nd - 1 - mask[:, ::-1].argmax(axis=1), 0)
        rmask = (np.abs(alpha[0] - grid.root_inclination) <= cons.max_dogleg) & (
            alpha[0] <= cons.max_inclination
        )
        if rmask.any():
            self.root_lo = int(rmask.argmax())
            self.root_hi = int(nd - 1 - rmask[::-1].argmax())
        else:
            self.root_lo, self.root_hi = 1, 0
        self.alpha = alpha
        self.win_lo = win_lo
        self.win_hi = win_hi
        self.reach, self.need_s = _kernels.reach_and_need(
            K, nd, nd, win_lo, win_hi, self.root_lo, self.root_hi, grid.root_z_index
        )
        # quadrature abscissas per column, as offsets shared by every member
        t16 = (np.arange(N_QUAD) + 0.5) / N_QUAD
        tf = (np.arange(N_QUAD * REFINE_FACTOR) + 0.5) / (N_QUAD * REFINE_FACTOR)
        xq = []
        for k in range(K):
            x0 = float(grid.x_nodes[k])
            x1 = float(grid.x_nodes[k + 1])
            xq.append(
                np.concatenate(
                    [x0 + (x1 - x0) * t16, x0 + (x1 - x0) * tf,
                     np.array([x0, 0.5 * (x0 + x1), x1])]
                )
            )
        self.x_quad = np.concatenate(xq) if K else np.empty(0)

    def member_bounds(self, model: EarthRealization, K: int):
        """Boundary depths at every quadrature abscissa, split per column."""
        nb = model.n_boundaries
        nf = N_QUAD * REFINE_FACTOR
        per_col = N_QUAD + nf + 3
        flat = boundaries_at_many(model, self.x_quad)  # [nb, K*per_col]
        cols = flat.reshape(nb, K, per_col).transpose(1, 2, 0)  # [K, per_col, nb]
        bounds_cols = np.ascontiguousarray(cols[:, :N_QUAD, :])
        bounds_fine = np.ascontiguousarray(cols[:, N_QUAD:N_QUAD + nf, :])
        bounds_ends = np.ascontiguousarray(cols[:, N_QUAD + nf:, :])
        return bounds_cols, bounds_fine, bounds_ends


@dataclass(frozen=True, eq=False)
class PolicyTable:
    """Memoized values and successors of one realization's recursion."""

    grid: DecisionGrid
    model: EarthRealization
    weights: ObjectiveWeights
    gamma: float
    values: np.ndarray  # [K+1, nz, nd]
    successors: np.ndarray  # [K, nz, nd] int16, STOP = -1
    reach: np.ndarray
    root_value: float
    root_successor: int
    root_utilities: np.ndarray  # u over feasible first drops, -inf elsewhere

    def _state_indices(self, state: DPState) -> tuple[int, int, int]:
        if state.k == 0:
            if state.prev_z_index is not None or state.z_index != self.grid.root_z_index:
                raise KeyError("level-0 states other than the root are not solved")
            return 0, state.z_index, -1
        drop = state.drop()
        if drop is None or drop < 0:
            raise KeyError("non-root states need prev_z_index at or above z_index")
        if not (0 <= state.k <= self.grid.n_steps) or not (
            0 <= state.z_index < self.grid.n_depths
        ):
            raise KeyError("state outside grid")
        if state.k < self.grid.n_steps and not self.reach[state.k, state.z_index, drop]:
            raise KeyError(f"state {state} was not reachable, hence not solved")
        return state.k, state.z_index, drop

    def value(self, state: DPState) -> float:
        """Optimal future value at a solved state (0 at the grid end)."""
        k, zi, drop = self._state_indices(state)
        if k == 0:
            return self.root_value
        if k == self.grid.n_steps:
            return 0.0
        return float(self.values[k, zi, drop])

    def successor(self, state: DPState) -> int:
        """Optimal next depth index, or STOP (-1)."""
        k, zi, drop = self._state_indices(state)
        if k == 0:
            first = self.root_successor
            return STOP if first < 0 else zi - first
        if k == self.grid.n_steps:
            return STOP
        nxt = int(self.successors[k, zi, drop])
        return STOP if nxt < 0 else zi - nxt


@dataclass(frozen=True)
class PerRealization:
    """One member's optimal trajectory and its predicted value."""

    trajectory: np.ndarray  # [points, 2] of (x, z)
    predicted_value: float


@dataclass(frozen=True)
class Recommendation:
    """The committed first step and the evidence behind it."""

    action: str  # "steer" | "stop"
    target_z: Optional[float]
    inclination_deg: Optional[float]
    expected_value: float
    per_realization: tuple[PerRealization, ...]
    conditioned: tuple[PerRealization, ...]  # first step forced to the action

    def to_dict(self) -> dict:
        out = {"action": self.action, "expected_value": self.expected_value}
        if self.action == "steer":
            out["target_z"] = self.target_z
            out["inclination_deg"] = self.inclination_deg
        return out


def _kernel_args(tables: _GridTables, grid: DecisionGrid, weights, gamma, sand_mask, sand_vals):
    return dict(
        z_nodes=grid.z_nodes,
        x_nodes=grid.x_nodes,
        sand_mask=sand_mask,
        sand_vals=sand_vals,
        w_pos=weights.w_position,
        w_sand=weights.w_sand,
        w_cost=weights.w_cost,
        gamma=gamma,
        sweet_lo=SWEET_SPOT_BAND[0],
        sweet_hi=SWEET_SPOT_BAND[1],
        delta_x=DELTA_X_DECISION,
        cost_per_meter=COST_PER_METER,
        alpha=tables.alpha,
        win_lo=tables.win_lo,
        win_hi=tables.win_hi,
        root_lo=tables.root_lo,
        root_hi=tables.root_hi,
        root_zi=grid.root_z_index,
        root_alpha=grid.root_inclination,
        reach=tables.reach,
        need_s=tables.need_s,
    )


def _check_gamma(gamma: float) -> float:
    # gamma=0 is admitted as the myopic limit
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("discount factor must be in [0, 1]")
    return float(gamma)


def solve_realization(
    grid: DecisionGrid,
    model: EarthRealization,
    weights: ObjectiveWeights,
    gamma: float = 1.0,
) -> PolicyTable:
    """Backward recursion for one realization; memoized over grid states."""
    gamma = _check_gamma(gamma)
    if grid.n_steps < 1:
        raise ValueError("grid must contain at least one decision step")
    tables = _GridTables(grid)
    sand_mask, sand_vals = layer_value_tables(model)
    bc, bf, be = tables.member_bounds(model, grid.n_steps)
    S, V, succ, u_root, v1_row, root_value, root_succ = _kernels.solve_tables(
        bounds_cols=bc, bounds_fine=bf, bounds_ends=be,
        **_kernel_args(tables, grid, weights, gamma, sand_mask, sand_vals),
    )
    return PolicyTable(
        grid=grid,
        model=model,
        weights=weights,
        gamma=gamma,
        values=V,
        successors=succ,
        reach=tables.reach,
        root_value=float(root_value),
        root_successor=int(root_succ),
        root_utilities=u_root,
    )


def optimal_trajectory(
    policy: PolicyTable, model: EarthRealization, from_state: Optional[DPState] = None
) -> np.ndarray:
    """Follow successors from a state until STOP or the grid end; [(x, z)]."""
    if model is not policy.model:
        raise ValueError("policy was solved for a different realization")
    grid = policy.grid
    if from_state is None:
        from_state = DPState(0, grid.root_z_index, None)
    state = from_state
    points = [(float(grid.x_nodes[state.k]), float(grid.z_nodes[state.z_index]))]
    k, zi = state.k, state.z_index
    prev = state.prev_z_index
    while k < grid.n_steps:
        nxt = policy.successor(DPState(k, zi, prev))
        if nxt == STOP:
            break
        prev, zi, k = zi, nxt, k + 1
        points.append((float(grid.x_nodes[k]), float(grid.z_nodes[zi])))
    return np.asarray(points)


def _index_traj_to_points(grid: DecisionGrid, idx_traj: np.ndarray) -> np.ndarray:
    points = []
    for k, zi in enumerate(idx_traj):
        if zi < 0:
            break
        points.append((float(grid.x_nodes[k]), float(grid.z_nodes[zi])))
    return np.asarray(points)


def robust_decision(
    grid: DecisionGrid,
    ensemble: Ensemble,
    weights: ObjectiveWeights,
    gamma: float = 1.0,
    bit_state: Optional[tuple[float, float]] = None,
) -> Recommendation:
    """Expected-value argmax over the immediate alternatives (stop or one
    dogleg-feasible target depth), using each member's solved recursion for
    the value beyond the first step. Only this first step is committed.

    bit_state optionally overrides the grid root as (z, inclination_deg).
    """
    gamma = _check_gamma(gamma)
    if ensemble.size == 0:
        raise ValueError("ensemble must not be empty")
    if grid.n_steps < 1:
        raise ValueError("grid must contain at least one decision step")
    if bit_state is not None:
        z, inc = bit_state
        root = int(round((z - grid.z_nodes[0]) / grid.dz))
        if not 0 <= root < grid.n_depths or abs(grid.z_nodes[root] - z) > 1e-9:
            raise ValueError(f"bit depth {z} is not a grid node")
        grid = replace(grid, root_z_index=root, root_inclination=float(inc))

    n = ensemble.size
    psi = ensemble.weights
    members = ensemble.members
    root_zi = grid.root_z_index
    K = grid.n_steps
    tables = _GridTables(grid)
    sand_mask, sand_vals = layer_value_tables(members[0])

    nb = members[0].n_boundaries
    nf = N_QUAD * REFINE_FACTOR
    bc = np.empty((n, K, N_QUAD, nb))
    bf = np.empty((n, K, nf, nb))
    be = np.empty((n, K, 3, nb))
    for j, m in enumerate(members):
        bc[j], bf[j], be[j] = tables.member_bounds(m, K)

    root_values, root_succs, u_roots, v1_rows, alt_trajs = _kernels.solve_batch(
        bounds_cols_all=bc, bounds_fine_all=bf, bounds_ends_all=be,
        **_kernel_args(tables, grid, weights, gamma, sand_mask, sand_vals),
    )

    # Immediate alternatives, with the first-segment value recomputed through
    # the scalar objective path (bit-identical to the tables by construction).
    x0 = float(grid.x_nodes[0])
    x1 = float(grid.x_nodes[1])
    z_bit = float(grid.z_nodes[root_zi])
    drops = [
        dp
        for dp in range(tables.root_lo, min(tables.root_hi, root_zi) + 1)
    ]
    expected = {}
    s_cols = {}
    for dp in drops:
        target = float(grid.z_nodes[root_zi - dp])
        seg = Segment((x0, z_bit), (x1, target))
        svals = np.array([segment_value(seg, m, weights) for m in members])
        s_cols[dp] = svals
        expected[dp] = float(np.dot(psi, svals + gamma * v1_rows[:, dp]))

    best_dp = None
    best_val = -math.inf
    best_da = math.inf
    for dp in drops:
        da = abs(float(tables.alpha[0, dp]) - grid.root_inclination)
        v = expected[dp]
        if v > best_val or (v == best_val and da < best_da):
            best_val, best_dp, best_da = v, dp, da

    per_realization = []
    for j in range(n):
        own = int(root_succs[j])
        if own < 0:
            traj = np.asarray([(x0, z_bit)])
        else:
            traj = _index_traj_to_points(grid, alt_trajs[j, own])
        per_realization.append(
            PerRealization(trajectory=traj, predicted_value=float(root_values[j]))
        )

    if best_dp is None or best_val <= 0.0:
        conditioned = tuple(
            PerRealization(trajectory=np.asarray([(x0, z_bit)]), predicted_value=0.0)
            for _ in range(n)
        )
        return Recommendation(
            action="stop",
            target_z=None,
            inclination_deg=None,
            expected_value=0.0,
            per_realization=tuple(per_realization),
            conditioned=conditioned,
        )

    conditioned = tuple(
        PerRealization(
            trajectory=_index_traj_to_points(grid, alt_trajs[j, best_dp]),
            predicted_value=float(s_cols[best_dp][j] + gamma * v1_rows[j, best_dp]),
        )
        for j in range(n)
    )
    return Recommendation(
        action="steer",
        target_z=float(grid.z_nodes[root_zi - best_dp]),
        inclination_deg=float(tables.alpha[0, best_dp]),
        expected_value=best_val,
        per_realization=tuple(per_realization),
        conditioned=conditioned,
    )


def theoretical_maximum(
    grid: DecisionGrid, truth: EarthRealization, weights: ObjectiveWeights
) -> float:
    """Value of the trajectory optimized against the known truth (gamma=1).

    Defines the 100% denominator of the relative-value metric.
    """
    return solve_realization(grid, truth, weights, gamma=1.0).root_value
