"""Command-line entry points.

Exit codes: 0 on success, 1 on configuration problems, 2 on runtime failures.
Thread count for grid evaluation comes from the DERASIM_THREADS environment
variable.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import ConfigError
from .experiments import load_config, run as run_experiment, validate as validate_config


@click.group()
def main():
    """Competitive DER aggregation experiments."""


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", default=None, help="Output directory (defaults to the config's output_dir or ./results).")
def run(config, out_dir):
    """Run the experiment described by CONFIG and write CSV/JSON artifacts."""
    try:
        cfg = load_config(config)
        target = out_dir or cfg.get("output_dir", "results")
        outputs = run_experiment(cfg, target)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 2
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(2)
    for path in outputs:
        click.echo(str(path))


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
def validate(config):
    """Check CONFIG without running it; list every problem found."""
    try:
        cfg = load_config(config)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    problems = validate_config(cfg)
    if problems:
        for problem in problems:
            click.echo(problem)
        sys.exit(1)
    click.echo("ok")


@main.command("clear")
@click.argument("network", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_file", default=None, help="Write the clearing outcome JSON here instead of stdout.")
def clear_cmd(network, out_file):
    """Clear the wholesale market defined in the NETWORK JSON file.

    The file carries {buses, lines, shift} and optionally a "prosumers"
    array of {bus, alpha, beta, d_min, d_max, g, c_inj, c_wd} records.
    """
    try:
        data = json.loads(Path(network).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    cfg = {
        "experiment": "clear_once",
        "network": {k: data[k] for k in ("buses", "lines", "shift") if k in data},
        "prosumers": data.get("prosumers", []),
    }
    try:
        from .experiments import run_clear_once

        out_dir = Path(out_file).parent if out_file else Path(".")
        paths = run_clear_once(cfg, out_dir)
        if out_file:
            paths[0].rename(out_file)
            click.echo(out_file)
        else:
            click.echo(paths[0].read_text())
            paths[0].unlink()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:  # noqa: BLE001
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(2)


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", default=None, help="Output directory.")
def benefit(config, out_dir):
    """Compute access benefit curves from CONFIG (forces the benefit experiment)."""
    try:
        cfg = load_config(config)
        cfg["experiment"] = "benefit_curve"
        target = out_dir or cfg.get("output_dir", "results")
        outputs = run_experiment(cfg, target)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:  # noqa: BLE001
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(2)
    for path in outputs:
        click.echo(str(path))


if __name__ == "__main__":
    main()
