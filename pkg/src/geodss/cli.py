"""Command-line harness: statistical benchmarks, scenario replays, serving."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import click

from .bench import SCENARIO_PRESETS, bench_csv, compare_gamma, run_bench, run_scenario
from .steering_loop import SessionConfig


@click.group()
def main():
    """Geosteering decision-support engine."""


def _load_config(config_path) -> SessionConfig:
    if config_path is None:
        return SessionConfig()
    return SessionConfig.from_dict(json.loads(Path(config_path).read_text()))


@main.command()
@click.option("--cases", type=int, required=True, help="Number of synthetic cases.")
@click.option("--ensemble", type=int, default=100, show_default=True, help="Members per case.")
@click.option("--gamma", type=float, default=1.0, show_default=True, help="Discount factor.")
@click.option("--seed", type=int, default=0, show_default=True, help="Master seed.")
@click.option("--out", "out_csv", type=click.Path(dir_okay=False), required=True,
              help="Per-case CSV output path.")
@click.option("--json", "out_json", type=click.Path(dir_okay=False), default=None,
              help="Optional aggregate JSON output path.")
@click.option("--compare-gamma", "gamma_b", type=float, default=None,
              help="Also run the same seeds at this discount factor and report the paired delta.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Parallel case workers (processes).")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Session config JSON overriding the defaults.")
def bench(cases, ensemble, gamma, seed, out_csv, out_json, gamma_b, workers, config_path):
    """Run the automatic-steering statistical study."""
    if cases < 1:
        raise click.UsageError("--cases must be at least 1")
    if not 0.0 < gamma <= 1.0:
        raise click.UsageError("--gamma must be in (0, 1]")
    config = replace(_load_config(config_path), ensemble_size=ensemble)

    def progress(row):
        rel = row.metrics.relative
        click.echo(
            f"case {row.index:3d}: {row.status:9s} relative="
            f"{'undefined' if rel is None else format(rel, '.1f') + '%'} "
            f"landed={row.metrics.landed_layer}",
            err=True,
        )

    if gamma_b is not None:
        comp = compare_gamma(cases, config, gamma, gamma_b, seed, workers, progress)
        result = comp["result_a"]
        extra = {
            "compare": {
                "gamma_a": comp["gamma_a"],
                "gamma_b": comp["gamma_b"],
                "mean_relative_a": comp["mean_relative_a"],
                "mean_relative_b": comp["mean_relative_b"],
                "paired_mean_delta": comp["paired_mean_delta"],
            }
        }
        click.echo(
            f"paired delta (gamma {gamma} -> {gamma_b}): "
            f"{comp['paired_mean_delta']:+.2f} points "
            f"({comp['mean_relative_a']:.1f}% -> {comp['mean_relative_b']:.1f}%)"
        )
        result_b = comp["result_b"]
        Path(out_csv).with_suffix(".gamma_b.csv").write_text(bench_csv(result_b))
    else:
        result = run_bench(cases, config, gamma, seed, workers, progress)
        extra = {}

    Path(out_csv).write_text(bench_csv(result))
    if out_json:
        payload = result.to_dict()
        payload.update(extra)
        Path(out_json).write_text(json.dumps(payload, indent=1))
    click.echo(
        f"mean relative value: "
        f"{'undefined' if result.mean_relative is None else format(result.mean_relative, '.2f') + '%'}"
        f" | landing-optimal rate: "
        f"{'undefined' if result.landing_optimal_rate is None else format(result.landing_optimal_rate, '.1f') + '%'}"
        f" | undefined cases: {result.undefined_count}/{len(result.rows)}"
    )
    if result.undefined_count * 10 > len(result.rows):
        click.echo("more than 10% of cases had undefined metrics", err=True)
        sys.exit(3)


@main.command()
@click.option("--preset", type=click.Choice(SCENARIO_PRESETS), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True,
              help="Directory for per-step frames and the report.")
@click.option("--ensemble", type=int, default=100, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
def scenario(preset, out_dir, ensemble, config_path):
    """Replay a scripted scenario and dump per-step frames."""
    from .bench import DEFAULT_SCENARIO_SEEDS

    if config_path is None:
        config = SessionConfig(ensemble_size=ensemble, seeds=DEFAULT_SCENARIO_SEEDS)
    else:
        config = replace(_load_config(config_path), ensemble_size=ensemble)
    report = run_scenario(preset, config, out_dir)
    click.echo(json.dumps(report, indent=1))


@main.command()
@click.option("--port", type=int, default=None, help="Port (default: GEODSS_PORT or 8000).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--snapshot-dir", type=click.Path(file_okay=False), default=None,
              help="Persist and reload session snapshots here.")
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Serve a built web console from this directory at /.")
def serve(port, host, snapshot_dir, ui_dir):
    """Host the interactive steering service."""
    import uvicorn

    from .service import create_app

    if port is None:
        port = int(os.environ.get("GEODSS_PORT", "8000"))
    app = create_app(snapshot_dir=snapshot_dir, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
