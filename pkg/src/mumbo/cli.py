"""Command-line entry points: single runs, seeded batches, benchmark
evaluation, and registry listing.

Exit codes: 0 on success, 2 on a configuration problem, 3 when a run
failed at runtime (the partial trace is still persisted).
"""

from __future__ import annotations

import sys

import click

from .benchmarks import benchmark, evaluate, list_benchmarks
from .errors import ConfigError, MumboError
from .harness import load_config, run_batch, run_bo

CONFIG_EXIT = 2
RUNTIME_EXIT = 3


@click.group()
def main() -> None:
    """Multi-fidelity Bayesian optimization runner."""


@main.command()
@click.argument("config_path", type=click.Path())
@click.option("--output", default=None, help="Trace path (overrides the config).")
@click.option("--seed", default=None, type=int, help="Seed (overrides the config).")
def run(config_path: str, output: str | None, seed: int | None) -> None:
    """Execute one optimization run from a TOML config."""
    from dataclasses import replace

    try:
        config = load_config(config_path)
        if output is not None:
            config = replace(config, output=output)
        if seed is not None:
            config = replace(config, seed=seed)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(CONFIG_EXIT)
    try:
        trace = run_bo(config)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(CONFIG_EXIT)
    except MumboError as exc:
        click.echo(f"run failed: {exc}", err=True)
        sys.exit(RUNTIME_EXIT)
    if trace.error is not None:
        kind, message = trace.error
        where = config.output or "(not persisted: no output path)"
        click.echo(f"run failed: {kind}: {message}", err=True)
        click.echo(f"partial trace: {where}", err=True)
        sys.exit(RUNTIME_EXIT)
    s = trace.summary
    click.echo(
        f"done: {s.iterations} iterations, spent {s.spent:g}, "
        f"best regret {s.best_regret:.6g}"
    )
    if config.output:
        click.echo(f"trace: {config.output}")


@main.command()
@click.argument("config_paths", type=click.Path(), nargs=-1, required=True)
@click.option("--seeds", required=True, help="Comma-separated seed list, e.g. 0,1,2.")
@click.option("--out-dir", required=True, type=click.Path(), help="Trace directory.")
@click.option("--jobs", default=1, type=int, help="Parallel workers.")
def batch(config_paths: tuple[str, ...], seeds: str, out_dir: str, jobs: int) -> None:
    """Run each config at each seed; write traces plus aggregate.csv."""
    try:
        configs = [load_config(p) for p in config_paths]
        seed_list = [int(s) for s in seeds.split(",") if s.strip() != ""]
        if not seed_list or any(s < 0 for s in seed_list):
            raise ConfigError("seeds must be a comma-separated list of non-negative ints")
    except (ConfigError, ValueError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(CONFIG_EXIT)
    try:
        report = run_batch(configs, seed_list, out_dir, jobs=jobs)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(CONFIG_EXIT)
    for cid, seed, message in report.failures:
        click.echo(f"failed: {cid} seed {seed}: {message}", err=True)
    done = len(report.trace_paths) - len(report.failures)
    click.echo(f"batch done: {done}/{len(report.trace_paths)} runs succeeded")
    click.echo(f"aggregate: {out_dir}/aggregate.csv")
    if report.failures:
        sys.exit(RUNTIME_EXIT)


@main.command("bench-eval")
@click.argument("name")
@click.argument("coords", type=float, nargs=-1, required=True)
@click.option("--fidelity", "-z", default=None, type=float, help="Fidelity (default: target).")
@click.option("--seed", default=None, type=int, help="Noise seed (default: noiseless).")
def bench_eval(name: str, coords: tuple[float, ...], fidelity: float | None, seed: int | None) -> None:
    """Evaluate a benchmark at a point."""
    try:
        bench = benchmark(name)
        z = bench.space.target_z if fidelity is None else fidelity
        value = evaluate(bench, list(coords), z, seed=seed)
    except (ConfigError, MumboError, ValueError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(CONFIG_EXIT)
    click.echo(repr(value))


@main.command("list-benchmarks")
def list_benchmarks_cmd() -> None:
    """List registered benchmarks with their spaces and costs."""
    for name in list_benchmarks():
        bench = benchmark(name)
        fid = bench.space.fidelities
        if bench.space.is_discrete:
            fidelity = f"{fid.count} fidelities, costs {list(fid.costs)}"
        else:
            fidelity = f"continuous fidelity [{fid.lower:g}, {fid.upper:g}]"
        direction = "max" if bench.maximize else "min"
        click.echo(f"{name}: {bench.dims}d, {fidelity}, {direction}")


if __name__ == "__main__":
    main()
