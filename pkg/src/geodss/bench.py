"""Statistical benchmark harness and scripted scenario replays.

Runs fully automatic steering over many seeded synthetic cases and aggregates
the value achieved relative to each case's theoretical maximum, plus landing
statistics. Case seeds derive from the master seed by a fixed splitmix64
mixing function so runs reproduce byte-identically across machines.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import multiprocessing
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .em_forward import MeasurementVector, write_measurement_csv
from .geomodel import layer_query
from .objectives import ALTERNATIVE_WEIGHTS
from .steering_loop import (
    COMPLETED,
    DRILLING,
    CaseMetrics,
    SessionConfig,
    create_session,
    evaluate_case,
    run_auto,
    session_snapshot,
    set_weights,
    step,
)
from . import viewdata

_M64 = (1 << 64) - 1

#: Documented in bench output headers; do not change without versioning.
SEED_DERIVATION = (
    "case seed(stream) = splitmix64(((master & 0xffffffff) << 34) ^ (case_index << 2) ^ stream); "
    "streams: 0=ensemble, 1=truth, 2=noise"
)


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def case_seeds(master_seed: int, case_index: int) -> tuple[int, int, int]:
    """Per-case (ensemble, truth, noise) seeds from the master seed."""
    base = ((master_seed & 0xFFFFFFFF) << 34) ^ (case_index << 2)
    return tuple(_splitmix64(base ^ stream) for stream in range(3))


@dataclass(frozen=True)
class CaseRow:
    """One benchmark case's outcome."""

    index: int
    seeds: tuple[int, int, int]
    status: str
    metrics: CaseMetrics

    def to_dict(self) -> dict:
        out = {"index": self.index, "seeds": list(self.seeds), "status": self.status}
        out.update(self.metrics.to_dict())
        return out


@dataclass(frozen=True)
class BenchResult:
    """Per-case rows plus aggregates recomputable from them."""

    rows: tuple[CaseRow, ...]
    mean_relative: Optional[float]
    landing_optimal_rate: Optional[float]
    histogram: tuple[dict, ...]
    undefined_count: int
    config: SessionConfig
    master_seed: int

    def to_dict(self) -> dict:
        return {
            "seed_derivation": SEED_DERIVATION,
            "master_seed": self.master_seed,
            "cases": len(self.rows),
            "ensemble_size": self.config.ensemble_size,
            "gamma": self.config.gamma,
            "mean_relative": self.mean_relative,
            "landing_optimal_rate": self.landing_optimal_rate,
            "undefined_count": self.undefined_count,
            "histogram": list(self.histogram),
            "rows": [r.to_dict() for r in self.rows],
        }


def aggregate(rows: Sequence[CaseRow]) -> tuple[Optional[float], Optional[float], tuple[dict, ...], int]:
    """Aggregates from per-case rows; undefined-metric cases are excluded."""
    defined = [r for r in rows if r.metrics.relative is not None]
    undefined = len(rows) - len(defined)
    if not defined:
        return None, None, (), undefined
    rel = np.array([r.metrics.relative for r in defined])
    mean_rel = float(rel.mean())
    rate = 100.0 * sum(1 for r in defined if r.metrics.landing_optimal) / len(defined)
    bins = []
    for b in range(10):
        lo, hi = 10.0 * b, 10.0 * (b + 1)
        if b < 9:
            members = [r for r in defined if lo <= (r.metrics.relative or 0.0) < hi]
        else:  # the last bin is closed: [90, 100]
            members = [r for r in defined if lo <= (r.metrics.relative or 0.0) <= hi]
        landed = {}
        for r in members:
            landed[r.metrics.landed_layer] = landed.get(r.metrics.landed_layer, 0) + 1
        bins.append(
            {
                "bin": [lo, hi],
                "count": len(members),
                "landing_optimal": sum(1 for r in members if r.metrics.landing_optimal),
                "landed": landed,
            }
        )
    return mean_rel, rate, tuple(bins), undefined


def run_case(config: SessionConfig, master_seed: int, index: int) -> CaseRow:
    """One fully automatic closed-loop case with derived seeds."""
    seeds = case_seeds(master_seed, index)
    session = create_session(replace(config, seeds=seeds))
    session = run_auto(session)
    return CaseRow(index=index, seeds=seeds, status=session.status, metrics=evaluate_case(session))


def _run_case_worker(args) -> CaseRow:
    config_dict, master_seed, index = args
    import numba

    if os.environ.get("GEODSS_WORKER_SINGLE_THREAD") == "1":
        numba.set_num_threads(1)
    return run_case(SessionConfig.from_dict(config_dict), master_seed, index)


def run_bench(
    cases: int,
    config: SessionConfig,
    gamma: float,
    seed: int,
    workers: int = 1,
    progress=None,
) -> BenchResult:
    """Run the statistical study: `cases` automatic sessions, aggregated.

    Cases are independent; with workers > 1 they run in parallel processes,
    and rows are ordered by case index regardless of completion order.
    """
    if cases < 1:
        raise ValueError("cases must be at least 1")
    config = replace(config, gamma=gamma)
    rows: list[Optional[CaseRow]] = [None] * cases
    if workers > 1:
        os.environ["GEODSS_WORKER_SINGLE_THREAD"] = "1"
        args = [(config.to_dict(), seed, i) for i in range(cases)]
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=workers, mp_context=multiprocessing.get_context("spawn")
        ) as pool:
            for row in pool.map(_run_case_worker, args):
                rows[row.index] = row
                if progress:
                    progress(row)
    else:
        for i in range(cases):
            rows[i] = run_case(config, seed, i)
            if progress:
                progress(rows[i])
    rows = tuple(rows)
    mean_rel, rate, hist, undefined = aggregate(rows)
    return BenchResult(
        rows=rows,
        mean_relative=mean_rel,
        landing_optimal_rate=rate,
        histogram=hist,
        undefined_count=undefined,
        config=config,
        master_seed=seed,
    )


CSV_COLUMNS = (
    "case_index",
    "seed_ensemble",
    "seed_truth",
    "seed_noise",
    "status",
    "achieved_value",
    "theoretical_max",
    "relative",
    "landed_layer",
    "landing_optimal",
    "stands_in_target",
)


def bench_csv(result: BenchResult) -> str:
    """Deterministic CSV with aggregate header comments."""
    buf = io.StringIO()
    buf.write(f"# geodss bench: cases={len(result.rows)} ensemble={result.config.ensemble_size} "
              f"gamma={result.config.gamma!r} master_seed={result.master_seed}\n")
    buf.write(f"# seed_derivation: {SEED_DERIVATION}\n")
    buf.write(f"# mean_relative={result.mean_relative!r} "
              f"landing_optimal_rate={result.landing_optimal_rate!r} "
              f"undefined={result.undefined_count}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in result.rows:
        m = r.metrics
        writer.writerow(
            [
                r.index,
                r.seeds[0],
                r.seeds[1],
                r.seeds[2],
                r.status,
                repr(m.achieved_value),
                repr(m.theoretical_max),
                repr(m.relative) if m.relative is not None else "",
                m.landed_layer,
                int(m.landing_optimal),
                m.stands_in_target,
            ]
        )
    return buf.getvalue()


def compare_gamma(
    cases: int,
    config: SessionConfig,
    gamma_a: float,
    gamma_b: float,
    seed: int,
    workers: int = 1,
    progress=None,
) -> dict:
    """Paired study: same case seeds under two discount factors."""
    res_a = run_bench(cases, config, gamma_a, seed, workers, progress)
    res_b = run_bench(cases, config, gamma_b, seed, workers, progress)
    paired = [
        (ra.metrics.relative, rb.metrics.relative)
        for ra, rb in zip(res_a.rows, res_b.rows)
        if ra.metrics.relative is not None and rb.metrics.relative is not None
    ]
    delta = float(np.mean([b - a for a, b in paired])) if paired else None
    return {
        "gamma_a": gamma_a,
        "gamma_b": gamma_b,
        "mean_relative_a": res_a.mean_relative,
        "mean_relative_b": res_b.mean_relative,
        "paired_mean_delta": delta,
        "result_a": res_a,
        "result_b": res_b,
    }


SCENARIO_PRESETS = ("top_thicker", "bottom_thicker", "reweight_midrun")

#: Demonstration seeds for the scripted scenarios (single curated cases).
DEFAULT_SCENARIO_SEEDS = (42, 0, 23)


def run_scenario(preset: str, config: Optional[SessionConfig] = None, out_dir=None) -> dict:
    """Scripted single-case replay with per-step frame dumps.

    reweight_midrun runs the thicker-top truth and switches the weights to
    the sand-quality preset at the step where the bit enters the top sand.
    """
    if preset not in SCENARIO_PRESETS:
        raise ValueError(f"unknown preset {preset!r}; available: {SCENARIO_PRESETS}")
    if config is None:
        config = SessionConfig(ensemble_size=100, seeds=DEFAULT_SCENARIO_SEEDS)
    truth_name = "top_thicker" if preset == "reweight_midrun" else preset
    config = replace(config, truth_preset=truth_name)
    session = create_session(config)
    truth = session.truth

    frames = []
    reweighted_at = None
    cdf_mean_before = None
    cdf_mean_after = None
    version = 1
    frames.append(viewdata.state_view(session, version))
    while session.status == DRILLING:
        if preset == "reweight_midrun" and reweighted_at is None:
            q = layer_query(truth, session.bit[0], session.bit[1])
            if q.in_reservoir and q.layer == truth.sand_layers[0]:
                _, cdf_mean_before = viewdata.member_value_distribution(session)
                session = set_weights(session, ALTERNATIVE_WEIGHTS)
                _, cdf_mean_after = viewdata.member_value_distribution(session)
                reweighted_at = session.steps_done
                version += 1
                frames.append(viewdata.state_view(session, version))
        session = step(session)
        version += 1
        frames.append(viewdata.state_view(session, version))

    metrics = evaluate_case(session)
    report = {
        "preset": preset,
        "truth_preset": truth_name,
        "status": session.status,
        "steps": session.steps_done,
        "metrics": metrics.to_dict(),
        "reweighted_at_step": reweighted_at,
        "cdf_mean_before_switch": cdf_mean_before,
        "cdf_mean_after_switch": cdf_mean_after,
    }
    if out_dir is not None:
        out = Path(out_dir)
        (out / "frames").mkdir(parents=True, exist_ok=True)
        for i, frame in enumerate(frames):
            (out / "frames" / f"step_{i:02d}.json").write_text(json.dumps(frame))
        (out / "report.json").write_text(json.dumps(report, indent=1))
        measurements = [
            MeasurementVector.from_dict(rec["measurement"])
            for rec in session.history
            if rec.get("measurement") is not None
        ]
        write_measurement_csv(out / "measurements.csv", measurements)
        (out / "session.json").write_text(json.dumps(session_snapshot(session)))
    return report
