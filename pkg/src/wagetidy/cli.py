"""Command-line driver for the cleaning pipeline and the explorer."""

from __future__ import annotations

import logging
import sys
from typing import Any

import click

from .config import ConfigError, PipelineConfig, load_config
from .pipeline import (
    StageError,
    StageResult,
    config_lock,
    run_adjust,
    run_all,
    run_compare,
    run_ingest,
    run_repair,
    run_subset,
    run_tidy,
    run_validate,
)

logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


def _config_options(func):
    """Every config key gets a CLI flag with the identical name."""
    options = [
        click.option("--config", "config_path", type=click.Path(), default=None,
                     help="Key/value config file."),
        click.option("--raw-csv", default=None, help="Raw wide extract CSV."),
        click.option("--original-csv", default=None,
                     help="Published original dropout subset CSV."),
        click.option("--cpi-csv", default=None, help="CPI table CSV (year,index)."),
        click.option("--expectations-file", default=None,
                     help="Published-totals expectations JSON."),
        click.option("--out-dir", default=None, help="Stage output directory."),
        click.option("--vintage", default=None, help="Data vintage tag."),
        click.option("--seed", type=int, default=None, help="Sampling seed."),
        click.option("--base-year", type=int, default=None,
                     help="Base year for inflation adjustment."),
        click.option("--port", type=int, default=None, help="Explorer port."),
        click.option("--age-filter/--no-age-filter", default=None,
                     help="Restrict the dropout subset to ages 14-17 in 1979."),
        click.option("--dropout-include-females/--no-dropout-include-females",
                     default=None, help="Let females into the dropout subset."),
        click.option("--weight-threshold", type=float, default=None,
                     help="Robustness-weight threshold for replacement."),
        click.option("--huber-c", type=float, default=None, help="Huber tuning constant."),
        click.option("--max-iterations", type=int, default=None, help="IRLS iteration cap."),
        click.option("--convergence-tol", type=float, default=None,
                     help="IRLS coefficient-change stop tolerance."),
        click.option("--scale-floor", type=float, default=None,
                     help="Lower bound on the robust residual scale."),
        click.option("--min-points-for-repair", type=int, default=None,
                     help="Minimum observations before a series is repaired."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _build_config(config_path: str | None, **overrides: Any) -> PipelineConfig:
    try:
        return load_config(config_path, overrides)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc


def _echo_result(result: StageResult) -> None:
    counts = ", ".join(f"{k}={v}" for k, v in result.counts.items())
    click.echo(f"[{result.stage}] {counts}")
    for name in result.outputs:
        click.echo(f"  wrote {name}")


@click.group()
def main() -> None:
    """Clean wide NLSY79 survey extracts into tidy longitudinal wage
    tables: ingest, tidy, validate, repair, subset, compare, adjust, or
    run them all; serve starts the threshold explorer API."""


def _stage_command(name: str, runner):
    @main.command(name=name)
    @_config_options
    def _cmd(config_path: str | None, **overrides: Any) -> None:
        cfg = _build_config(config_path, **overrides)
        try:
            with config_lock(cfg):
                _echo_result(runner(cfg))
        except StageError as exc:
            raise click.ClickException(str(exc)) from exc

    _cmd.__doc__ = f"Run the {name} stage."
    return _cmd


_stage_command("ingest", run_ingest)
_stage_command("tidy", run_tidy)
_stage_command("repair", run_repair)
_stage_command("subset", run_subset)
_stage_command("compare", run_compare)
_stage_command("adjust", run_adjust)


@main.command()
@_config_options
def validate(config_path: str | None, **overrides: Any) -> None:
    """Run the IDA checks; exit nonzero when any check fails."""
    cfg = _build_config(config_path, **overrides)
    try:
        with config_lock(cfg):
            result, report = run_validate(cfg)
    except StageError as exc:
        raise click.ClickException(str(exc)) from exc
    _echo_result(result)
    for check in report.checks:
        click.echo(f"  [{check.status}] {check.name}")
    if report.failed:
        click.echo("validation FAILED")
        sys.exit(1)
    click.echo("validation passed")


@main.command(name="all")
@_config_options
def run_everything(config_path: str | None, **overrides: Any) -> None:
    """Run the full value chain raw -> input -> valid."""
    cfg = _build_config(config_path, **overrides)
    try:
        with config_lock(cfg):
            results, report = run_all(cfg)
    except StageError as exc:
        raise click.ClickException(str(exc)) from exc
    for result in results:
        _echo_result(result)
    if report.failed:
        click.echo("validation FAILED")
        sys.exit(1)


@main.command()
@_config_options
@click.option("--ui-dir", default=None, help="Built UI assets to serve at /.")
def serve(config_path: str | None, ui_dir: str | None, **overrides: Any) -> None:
    """Serve the threshold-explorer API over the tidied wages table."""
    import uvicorn

    from .api import build_app

    cfg = _build_config(config_path, **overrides)
    try:
        app = build_app(cfg, ui_dir=ui_dir)
    except StageError as exc:
        raise click.ClickException(str(exc)) from exc
    uvicorn.run(app, host="127.0.0.1", port=cfg.port, log_level="info")


if __name__ == "__main__":
    main()
