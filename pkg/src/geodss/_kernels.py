"""Compiled numerical kernels shared by the objective and optimizer modules.

The segment-integral code here is the single implementation of the value
integrands: the scalar objective functions call it with one segment's
quadrature nodes and the optimizer's dynamic program calls it for whole
state tables, so both produce bit-identical values. Set NUMBA_DISABLE_JIT=1
to run the same code uncompiled.
"""

from __future__ import annotations

import os

import numpy as np
from numba import config, njit, prange

# fork-safe member-level threading (bench workers fork); env still overrides
config.THREADING_LAYER = os.environ.get("NUMBA_THREADING_LAYER", "workqueue")


@njit(cache=True)
def fp_fs_at(bounds_desc, sand_mask, sand_vals, z, sweet_lo, sweet_hi):
    """Position and sand integrands at depth z for one boundary stack.

    A point exactly on a boundary belongs to the layer below; the sweet-spot
    band test is inclusive at both edges.
    """
    nb = bounds_desc.shape[0]
    layer = 0
    for b in range(nb):
        if bounds_desc[b] >= z:
            layer += 1
        else:
            break
    if layer == 0:
        roof = np.inf
    else:
        roof = bounds_desc[layer - 1]
    if layer == nb:
        floor = -np.inf
    else:
        floor = bounds_desc[layer]
    fs = sand_vals[layer]
    if not sand_mask[layer]:
        return 0.0, fs
    h = roof - floor
    z_roof = roof - z
    if (z_roof >= sweet_lo) and (z_roof <= sweet_hi):
        return 2.0 * h, fs
    return h, fs


@njit(cache=True)
def segment_integrals(bounds_q, z0, z1, sand_mask, sand_vals, sweet_lo, sweet_hi):
    """Midpoint-rule accumulators of both integrands along one segment.

    bounds_q holds the boundary depths at the quadrature abscissas, one row
    per node in ascending order; the accumulation order is part of the
    contract (see module docstring).
    """
    n = bounds_q.shape[0]
    acc_p = 0.0
    acc_s = 0.0
    for q in range(n):
        t = (q + 0.5) / n
        zq = z0 + (z1 - z0) * t
        fp, fs = fp_fs_at(bounds_q[q], sand_mask, sand_vals, zq, sweet_lo, sweet_hi)
        acc_p += fp
        acc_s += fs
    return acc_p, acc_s


@njit(cache=True)
def crossing(bounds3, z0, z1, sand_mask, sweet_lo, sweet_hi):
    """Whether a breakpoint curve crosses or touches the segment line.

    bounds3 holds boundary depths at the segment start, midpoint and end.
    Curves are every boundary plus the sweet-band edges below each sand roof.
    """
    nb = bounds3.shape[1]
    z_line = np.empty(3)
    z_line[0] = z0
    z_line[1] = 0.5 * (z0 + z1)
    z_line[2] = z1
    for b in range(nb):
        lo = np.inf
        hi = -np.inf
        for i in range(3):
            d = bounds3[i, b] - z_line[i]
            if d < lo:
                lo = d
            if d > hi:
                hi = d
        if lo <= 0.0 and hi >= 0.0:
            return True
    n_layers = nb + 1
    for layer in range(1, n_layers - 1):
        if not sand_mask[layer]:
            continue
        for e in range(2):
            off = sweet_lo if e == 0 else sweet_hi
            lo = np.inf
            hi = -np.inf
            for i in range(3):
                d = (bounds3[i, layer - 1] - off) - z_line[i]
                if d < lo:
                    lo = d
                if d > hi:
                    hi = d
            if lo <= 0.0 and hi >= 0.0:
                return True
    return False


@njit(cache=True)
def solve_tables(
    z_nodes,
    x_nodes,
    bounds_cols,
    bounds_fine,
    bounds_ends,
    sand_mask,
    sand_vals,
    w_pos,
    w_sand,
    w_cost,
    gamma,
    sweet_lo,
    sweet_hi,
    delta_x,
    cost_per_meter,
    alpha,
    win_lo,
    win_hi,
    root_lo,
    root_hi,
    root_zi,
    root_alpha,
    reach,
    need_s,
):
    """Backward value recursion for one realization over the decision grid.

    States are (level k, depth index zi, incoming drop index d_in); a drop of
    d means the previous node sits d depth-steps above. Values clip at zero
    (the stop branch); a successor of -1 means stop. Tie-breaks: larger value,
    then smaller inclination change, then shallower target.
    """
    K = x_nodes.shape[0] - 1
    nz = z_nodes.shape[0]
    nd = nz
    S = np.full((K, nz, nd), -np.inf)
    for k in range(K):
        x0 = x_nodes[k]
        x1 = x_nodes[k + 1]
        dxk = x1 - x0
        for zi in range(nz):
            for dp in range(zi + 1):
                if not need_s[k, zi, dp]:
                    continue
                z0 = z_nodes[zi]
                z1v = z_nodes[zi - dp]
                if crossing(bounds_ends[k], z0, z1v, sand_mask, sweet_lo, sweet_hi):
                    acc_p, acc_s = segment_integrals(
                        bounds_fine[k], z0, z1v, sand_mask, sand_vals, sweet_lo, sweet_hi
                    )
                    nq = bounds_fine.shape[1]
                else:
                    acc_p, acc_s = segment_integrals(
                        bounds_cols[k], z0, z1v, sand_mask, sand_vals, sweet_lo, sweet_hi
                    )
                    nq = bounds_cols.shape[1]
                scale = dxk / (nq * delta_x)
                dz_seg = z1v - z0
                cost = -cost_per_meter * np.sqrt(dxk * dxk + dz_seg * dz_seg)
                S[k, zi, dp] = (
                    w_pos * (acc_p * scale) + w_sand * (acc_s * scale) + w_cost * cost
                )

    V = np.zeros((K + 1, nz, nd))
    succ = np.full((K, nz, nd), -1, np.int16)
    for k in range(K - 1, 0, -1):
        for zi in range(nz):
            for din in range(nd):
                if not reach[k, zi, din]:
                    continue
                a_in = alpha[k - 1, din]
                lo = win_lo[k, din]
                hi = win_hi[k, din]
                if hi > zi:
                    hi = zi
                best = -np.inf
                bestd = -1
                bestda = np.inf
                for dp in range(lo, hi + 1):
                    u = S[k, zi, dp] + gamma * V[k + 1, zi - dp, dp]
                    da = abs(alpha[k, dp] - a_in)
                    if u > best or (u == best and da < bestda):
                        best = u
                        bestd = dp
                        bestda = da
                if best > 0.0:
                    V[k, zi, din] = best
                    succ[k, zi, din] = bestd

    u_root = np.full(nd, -np.inf)
    v1_row = np.full(nd, -np.inf)
    hi = root_hi if root_hi <= root_zi else root_zi
    best = -np.inf
    bestd = -1
    bestda = np.inf
    for dp in range(root_lo, hi + 1):
        u = S[0, root_zi, dp] + gamma * V[1, root_zi - dp, dp]
        u_root[dp] = u
        v1_row[dp] = V[1, root_zi - dp, dp]
        da = abs(alpha[0, dp] - root_alpha)
        if u > best or (u == best and da < bestda):
            best = u
            bestd = dp
            bestda = da
    if best > 0.0:
        root_value = best
        root_succ = bestd
    else:
        root_value = 0.0
        root_succ = -1
    return S, V, succ, u_root, v1_row, root_value, root_succ


@njit(cache=True)
def trajectory_from(succ, root_zi, first_drop, K):
    """Depth indices of the path taking first_drop then following successors.

    Entries after a stop (or past the grid end) stay -1.
    """
    out = np.full(K + 1, -1, np.int16)
    out[0] = root_zi
    if first_drop < 0:
        return out
    zi = root_zi - first_drop
    d = first_drop
    out[1] = zi
    for k in range(1, K):
        nxt = succ[k, zi, d]
        if nxt < 0:
            break
        zi = zi - nxt
        d = nxt
        out[k + 1] = zi
    return out


@njit(cache=True)
def reach_and_need(K, nz, nd, win_lo, win_hi, root_lo, root_hi, root_zi):
    """Forward reachability from the root and the segment pairs the DP needs."""
    reach = np.zeros((K, nz, nd), np.bool_)
    need = np.zeros((K, nz, nd), np.bool_)
    hi0 = root_hi if root_hi <= root_zi else root_zi
    for dp in range(root_lo, hi0 + 1):
        need[0, root_zi, dp] = True
        if K > 1:
            reach[1, root_zi - dp, dp] = True
    for k in range(1, K):
        for zi in range(nz):
            for din in range(nd):
                if not reach[k, zi, din]:
                    continue
                lo = win_lo[k, din]
                hi = win_hi[k, din]
                if hi > zi:
                    hi = zi
                for dp in range(lo, hi + 1):
                    need[k, zi, dp] = True
                    if k + 1 < K:
                        reach[k + 1, zi - dp, dp] = True
    return reach, need


@njit(cache=True, parallel=True)
def solve_batch(
    z_nodes,
    x_nodes,
    bounds_cols_all,
    bounds_fine_all,
    bounds_ends_all,
    sand_mask,
    sand_vals,
    w_pos,
    w_sand,
    w_cost,
    gamma,
    sweet_lo,
    sweet_hi,
    delta_x,
    cost_per_meter,
    alpha,
    win_lo,
    win_hi,
    root_lo,
    root_hi,
    root_zi,
    root_alpha,
    reach,
    need_s,
):
    """solve_tables over every ensemble member, reduced to what the robust
    step needs: root values/successors, root-alternative utilities, the
    level-1 values behind each alternative, and the successor paths for every
    feasible first drop."""
    n = bounds_cols_all.shape[0]
    K = x_nodes.shape[0] - 1
    nd = z_nodes.shape[0]
    root_values = np.zeros(n)
    root_succs = np.full(n, -1, np.int64)
    u_roots = np.full((n, nd), -np.inf)
    v1_rows = np.full((n, nd), -np.inf)
    alt_trajs = np.full((n, nd, K + 1), -1, np.int16)
    hi0 = root_hi if root_hi <= root_zi else root_zi
    for j in prange(n):
        S, V, succ, u_root, v1_row, rv, rs = solve_tables(
            z_nodes,
            x_nodes,
            bounds_cols_all[j],
            bounds_fine_all[j],
            bounds_ends_all[j],
            sand_mask,
            sand_vals,
            w_pos,
            w_sand,
            w_cost,
            gamma,
            sweet_lo,
            sweet_hi,
            delta_x,
            cost_per_meter,
            alpha,
            win_lo,
            win_hi,
            root_lo,
            root_hi,
            root_zi,
            root_alpha,
            reach,
            need_s,
        )
        root_values[j] = rv
        root_succs[j] = rs
        u_roots[j] = u_root
        v1_rows[j] = v1_row
        for dp in range(root_lo, hi0 + 1):
            alt_trajs[j, dp] = trajectory_from(succ, root_zi, dp, K)
    return root_values, root_succs, u_roots, v1_rows, alt_trajs
