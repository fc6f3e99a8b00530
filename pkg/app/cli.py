"""Command line entry point: python -m app.cli <command> [options]."""

from typing import List, Optional, Tuple
import logging
import os
import sys

import click

from app.core.config import settings
from app.core.exceptions import RisCellFreeError
from app.models.models import MethodId, SweepKind
from app.models.scenario import ScenarioConfig, SweepSpec, load_scenario, load_sweep_spec
from app.services.baselines import run_baseline
from app.services.experiments import sweep as run_sweep
from app.services.orchestrator import OrchestratorOptions
from app.services.verification import run_invariant_suite
from app.utils.channel import generate_channels
from app.utils.report import emit_csv, format_comparison, format_overhead_table, overhead_rows, render_solve_report

logger = logging.getLogger(__name__)

METHOD_CHOICE = click.Choice([m.value for m in MethodId])


def _overrides(seed: Optional[int], max_iters: Optional[int], eps: Optional[float], finalize: bool) -> dict:
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if max_iters is not None:
        overrides["max_iterations"] = max_iters
    if eps is not None:
        overrides["convergence_eps"] = eps
    if finalize:
        overrides["finalize_unit_modulus"] = True
    return overrides


def _load(config_path: str, seed: Optional[int], max_iters: Optional[int], eps: Optional[float],
          finalize: bool) -> ScenarioConfig:
    config = load_scenario(config_path)
    overrides = _overrides(seed, max_iters, eps, finalize)
    return config.with_overrides(**overrides) if overrides else config


def _write_or_echo(text: str, out: Optional[str]) -> None:
    if out:
        directory = os.path.dirname(out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(out, "w") as fh:
            fh.write(text + "\n")
        click.echo(f"written {out}")
    else:
        click.echo(text)


def run_options(f):
    """Seed and solver options shared by every command that runs the solvers."""
    f = click.option("--finalize-unit-modulus", "finalize", is_flag=True,
                     help="Project the phases onto the unit circle after convergence.")(f)
    f = click.option("--eps", type=float, default=None, help="Convergence threshold on the sum rate.")(f)
    f = click.option("--max-iters", type=click.IntRange(min=1), default=None, help="Iteration cap.")(f)
    f = click.option("--seed", type=click.IntRange(min=0), default=None, help="Channel realization seed.")(f)
    return f


def solver_options(f):
    """Scenario file plus the run options."""
    f = run_options(f)
    f = click.option("--config", "config_path", default="default", show_default=True,
                     help="Scenario TOML file, or 'default'.")(f)
    return f


@click.group()
@click.option("--log-level", default=None, help="Logging level (defaults to LOG_LEVEL).")
def cli(log_level: Optional[str]):
    """RIS-aided cell-free beamforming simulator."""
    logging.basicConfig(
        level=(log_level or settings.LOG_LEVEL).upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


@cli.command()
@solver_options
@click.option("--method", type=METHOD_CHOICE, default=MethodId.pd_with_ris.value, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True,
              help="Threads for the per-AP solves.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here.")
def solve(config_path, seed, max_iters, eps, finalize, method, workers, out):
    """Solve one scenario and print its report."""
    try:
        config = _load(config_path, seed, max_iters, eps, finalize)
        channels = generate_channels(config)
        options = OrchestratorOptions.from_config(config, ap_workers=workers)
        _, report = run_baseline(MethodId(method), config, channels, options)
    except RisCellFreeError as e:
        raise click.ClickException(str(e))
    _write_or_echo(render_solve_report(report), out)


@cli.command()
@solver_options
def compare(config_path, seed, max_iters, eps, finalize):
    """Run every method on one channel realization."""
    try:
        config = _load(config_path, seed, max_iters, eps, finalize)
        channels = generate_channels(config)
        reports = [run_baseline(m, config, channels)[1] for m in MethodId]
    except RisCellFreeError as e:
        raise click.ClickException(str(e))
    click.echo(format_comparison(reports))


def _sweep_specs(config_path: Optional[str], kind: Optional[str], seeds: Optional[int],
                 methods: Tuple[str, ...], seed: Optional[int] = None,
                 config_overrides: Optional[dict] = None) -> List[Tuple[str, SweepSpec]]:
    """(label, spec) pairs; the RIS-size preset runs once per user population.

    `seed` becomes the first Monte-Carlo seed; `config_overrides` apply to every base scenario.
    """
    if config_path:
        spec = load_sweep_spec(config_path)
        specs = [("", spec)]
    elif kind:
        sweep_kind = SweepKind(kind)
        populations = (4, 2) if sweep_kind == SweepKind.ris_elements else (4,)
        specs = [
            (f"_K{k}" if len(populations) > 1 else "", SweepSpec.preset(sweep_kind, num_users=k))
            for k in populations
        ]
    else:
        raise click.UsageError("give either --config or --kind")

    updates = {}
    if seeds is not None:
        updates["num_seeds"] = seeds
    if methods:
        updates["methods"] = [MethodId(m) for m in methods]
    if seed is not None:
        updates["seed_offset"] = seed
    if not updates and not config_overrides:
        return specs

    out = []
    for label, spec in specs:
        fields = {**spec.model_dump(), **updates}
        if config_overrides:
            fields["base_config"] = spec.base_config.with_overrides(**config_overrides)
        out.append((label, SweepSpec.model_validate(fields)))
    return out


@cli.command()
@click.option("--config", "config_path", default=None, help="Sweep TOML file with a [sweep] table.")
@click.option("--kind", type=click.Choice([k.value for k in SweepKind]), default=None,
              help="Use the built-in sweep of this kind instead of a file.")
@click.option("--seeds", type=click.IntRange(min=1), default=None, help="Monte-Carlo realizations per value.")
@click.option("--method", "methods", type=METHOD_CHOICE, multiple=True, help="Restrict to these methods.")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker threads (defaults to SWEEP_WORKERS).")
@click.option("--aggregate", is_flag=True, help="Also write mean/stderr per (value, method).")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="CSV path.")
@run_options
def sweep(config_path, kind, seeds, methods, workers, aggregate, out, seed, max_iters, eps, finalize):
    """Run a Monte-Carlo sweep and write CSV rows."""
    try:
        config_overrides = _overrides(None, max_iters, eps, finalize)
        specs = _sweep_specs(config_path, kind, seeds, methods, seed, config_overrides)
        stem, ext = os.path.splitext(out)
        ext = ext or ".csv"
        for label, spec in specs:
            result = run_sweep(spec, workers=workers)
            path = emit_csv(result, f"{stem}{label}{ext}")
            click.echo(f"written {path} ({len(result.rows)} rows, {len(result.failures)} failed)")
            if aggregate:
                path = emit_csv(result, f"{stem}{label}_aggregate{ext}", aggregate=True)
                click.echo(f"written {path}")
    except (RisCellFreeError, ValueError) as e:
        raise click.ClickException(str(e))


@cli.command()
def verify():
    """Run the invariant suite; exit status 1 if any check fails."""
    results = run_invariant_suite()
    for r in results:
        click.echo(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  {r.detail}")
    if not all(r.passed for r in results):
        sys.exit(1)


@cli.command()
@click.option("--config", "config_path", default="default", show_default=True, help="Scenario TOML file, or 'default'.")
@click.option("--iterations", type=click.IntRange(min=0), multiple=True, help="Iteration counts (default 10).")
def overhead(config_path, iterations):
    """Print backhaul signaling of the proposed and ADMM schemes."""
    try:
        config = load_scenario(config_path)
    except RisCellFreeError as e:
        raise click.ClickException(str(e))
    B, Nt, K, M = config.num_aps, config.antennas_per_ap, config.num_users, config.ris_elements
    click.echo(f"B={B} Nt={Nt} K={K} M={M}")
    click.echo(format_overhead_table(overhead_rows(B, Nt, K, M, iterations or (10,))))


if __name__ == "__main__":
    cli()
