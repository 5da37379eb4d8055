"""Budgeted optimization loop, trace persistence, and batch aggregation.

One run executes: initial design (twice the dimension in points, across
all fidelities for the multi-fidelity acquisition, at the target only
for the single-fidelity baselines) -> fit hyper-parameters -> loop
{refit on schedule, sample maxima, maximize score over (x, z), evaluate
the benchmark, absorb the observation} until the cost budget is spent.

Everything random descends from the run seed through tagged seed
sequences (design, per-iteration max-value sampling, per-iteration
refit restarts, per-query observation noise), so a config and seed
reproduce a byte-identical trace file.  Wall-clock overheads are real
measurements and therefore live in a sidecar file next to the trace,
never inside it.

The trace file is line-oriented: one `meta` line echoing the config
(output path excluded), one `design` line per initial observation, one
`iter` line per optimization step, a final `summary` line, and on an
aborted run an `error` line.  Floats are written with repr, so parsing
reproduces them bit-for-bit and parse(write(trace)) == trace.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from joblib import Parallel, delayed

from .acquisition import (
    AcquisitionContext,
    KnownCost,
    PerFidelityCost,
    cost_weighted,
    expected_improvement,
    mes,
)
from .benchmarks import Benchmark, benchmark, evaluate, initial_design, simple_regret
from .errors import ConfigError, MumboError
from .gp import (
    Dataset,
    DiscreteFidelity,
    GpModel,
    KernelSpec,
    SearchSpace,
    fit_hyperparameters,
    fit_posterior,
    make_model,
    predict_marginal,
)
from .maxval import sample_max_values
from .optimizer import DirectConfig, default_budget, maximize_over_space

__all__ = [
    "RunConfig",
    "DesignRecord",
    "IterRecord",
    "RunSummary",
    "RunTimings",
    "RunTrace",
    "BatchReport",
    "config_from_dict",
    "load_config",
    "run_bo",
    "incumbent",
    "run_batch",
    "write_trace",
    "read_trace",
    "read_timings",
    "write_aggregate",
]

ACQUISITIONS = ("mumbo", "mes", "ei")
CHECKPOINT_FRACTIONS = (0.25, 0.5, 1.0)

_TAG_FIT = 0xF17
_TAG_MAXVAL = 0x5A11


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """One optimization run: what to optimize, how, and for how long."""

    benchmark: str
    budget: float
    acquisition: str = "mumbo"
    samples: int = 10
    seed: int = 0
    refit_interval: int = 1
    fit_restarts: int = 10
    nodes: int = 101
    half_width: float = 4.0
    grid_points_per_dim: int = 10000
    direct_budget: int | None = None
    direct_eps: float = 1e-4
    polish_iters: int = 20
    output: str | None = None

    def __post_init__(self) -> None:
        if self.acquisition not in ACQUISITIONS:
            raise ConfigError(
                f"acquisition must be one of {ACQUISITIONS}, got {self.acquisition!r}"
            )
        if not (self.budget > 0):
            raise ConfigError("budget must be positive")
        if self.samples < 1:
            raise ConfigError("need at least one maximum-value sample")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.refit_interval < 1:
            raise ConfigError("refit interval must be at least 1")
        if self.fit_restarts < 0:
            raise ConfigError("fit restarts must be non-negative")
        if self.nodes < 3 or self.nodes % 2 == 0:
            raise ConfigError("quadrature nodes must be odd and at least 3")
        if self.half_width <= 0:
            raise ConfigError("quadrature half-width must be positive")
        if self.grid_points_per_dim < 1:
            raise ConfigError("grid points per dimension must be positive")
        if self.direct_budget is not None and self.direct_budget < 1:
            raise ConfigError("search budget must be positive")
        if not (0 < self.direct_eps < 1):
            raise ConfigError("search eps must lie in (0, 1)")
        if self.polish_iters < 0:
            raise ConfigError("polish iterations must be non-negative")


_TOP_KEYS = {
    "benchmark": str,
    "acquisition": str,
    "budget": (int, float),
    "samples": int,
    "seed": int,
    "refit_interval": int,
    "fit_restarts": int,
    "output": str,
}
_SECTIONS = {
    "quadrature": {"nodes": int, "half_width": (int, float)},
    "maxval": {"grid_points_per_dim": int},
    "direct": {
        "budget": int,
        "eps": (int, float),
        "polish_iters": int,
    },
}
_SECTION_FIELD = {("direct", "budget"): "direct_budget", ("direct", "eps"): "direct_eps"}


def config_from_dict(raw: dict) -> RunConfig:
    """Build a config from nested key/value data, rejecting unknown keys."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table of key/value pairs")
    kwargs: dict = {}
    for key, value in raw.items():
        if key in _TOP_KEYS:
            if not isinstance(value, _TOP_KEYS[key]) or isinstance(value, bool):
                raise ConfigError(f"config key {key!r} has the wrong type")
            kwargs[key] = float(value) if key == "budget" else value
        elif key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"config section {key!r} must be a table")
            for sub, sub_value in value.items():
                if sub not in _SECTIONS[key]:
                    raise ConfigError(f"unknown config key {key}.{sub}")
                if not isinstance(sub_value, _SECTIONS[key][sub]) or isinstance(
                    sub_value, bool
                ):
                    raise ConfigError(f"config key {key}.{sub} has the wrong type")
                name = _SECTION_FIELD.get((key, sub), sub)
                kwargs[name] = (
                    float(sub_value)
                    if name in ("half_width", "direct_eps")
                    else sub_value
                )
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if "benchmark" not in kwargs:
        raise ConfigError("config must name a benchmark")
    if "budget" not in kwargs:
        raise ConfigError("config must set a budget")
    return RunConfig(**kwargs)


def load_config(path: str | Path) -> RunConfig:
    """Parse a TOML config file into a RunConfig."""
    try:
        import tomllib as tomli
    except ModuleNotFoundError:
        import tomli

    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config file is not valid TOML: {exc}") from None
    return config_from_dict(raw)


# ---------------------------------------------------------------------------
# Trace records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DesignRecord:
    index: int
    x: tuple[float, ...]
    z: float
    y: float
    cost: float
    spent: float


@dataclass(frozen=True)
class IterRecord:
    n: int
    x: tuple[float, ...]
    z: float
    y: float
    cost: float
    spent: float
    incumbent: tuple[float, ...]
    incumbent_value: float
    regret: float
    best_regret: float


@dataclass(frozen=True)
class RunSummary:
    iterations: int
    spent: float
    incumbent: tuple[float, ...]
    incumbent_value: float
    regret: float
    best_regret: float


@dataclass(frozen=True)
class RunTimings:
    """Wall-clock measurements; kept out of the trace so it stays
    reproducible byte for byte."""

    design_fit_s: float
    overheads_s: tuple[float, ...]


@dataclass(frozen=True)
class RunTrace:
    config: RunConfig
    design: tuple[DesignRecord, ...]
    iterations: tuple[IterRecord, ...]
    summary: RunSummary | None
    error: tuple[str, str] | None = None
    timings: RunTimings | None = field(default=None, compare=False)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fmt_vec(x: Sequence[float]) -> str:
    return ",".join(repr(float(v)) for v in x)


def _parse_vec(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.split(","))


_META_ORDER = (
    "benchmark",
    "acquisition",
    "samples",
    "budget",
    "seed",
    "refit_interval",
    "fit_restarts",
    "nodes",
    "half_width",
    "grid_points_per_dim",
    "direct_budget",
    "direct_eps",
    "polish_iters",
)


def _meta_line(config: RunConfig) -> str:
    parts = ["meta", "format=1"]
    for name in _META_ORDER:
        value = getattr(config, name)
        if isinstance(value, float):
            text = repr(value)
        elif value is None:
            text = "default"
        else:
            text = str(value)
        parts.append(f"{name}={text}")
    return " ".join(parts)


def _parse_meta(tokens: dict[str, str]) -> RunConfig:
    if tokens.pop("format", None) != "1":
        raise ConfigError("unsupported trace format")
    kwargs: dict = {}
    for name in _META_ORDER:
        text = tokens.pop(name)
        if name in ("benchmark", "acquisition"):
            kwargs[name] = text
        elif name in ("budget", "half_width", "direct_eps"):
            kwargs[name] = float(text)
        elif name == "direct_budget":
            kwargs[name] = None if text == "default" else int(text)
        else:
            kwargs[name] = int(text)
    if tokens:
        raise ConfigError(f"unknown trace meta keys: {sorted(tokens)}")
    return RunConfig(**kwargs)


def trace_lines(trace: RunTrace) -> list[str]:
    lines = [_meta_line(trace.config)]
    for d in trace.design:
        lines.append(
            f"design i={d.index} x={_fmt_vec(d.x)} z={repr(d.z)} y={repr(d.y)} "
            f"cost={repr(d.cost)} spent={repr(d.spent)}"
        )
    for r in trace.iterations:
        lines.append(
            f"iter n={r.n} x={_fmt_vec(r.x)} z={repr(r.z)} y={repr(r.y)} "
            f"cost={repr(r.cost)} spent={repr(r.spent)} "
            f"incumbent={_fmt_vec(r.incumbent)} incumbent_value={repr(r.incumbent_value)} "
            f"regret={repr(r.regret)} best_regret={repr(r.best_regret)}"
        )
    if trace.summary is not None:
        s = trace.summary
        lines.append(
            f"summary iterations={s.iterations} spent={repr(s.spent)} "
            f"incumbent={_fmt_vec(s.incumbent)} incumbent_value={repr(s.incumbent_value)} "
            f"regret={repr(s.regret)} best_regret={repr(s.best_regret)}"
        )
    if trace.error is not None:
        kind, message = trace.error
        lines.append(f"error type={kind} message={message}")
    return lines


def write_trace(trace: RunTrace, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(trace_lines(trace)) + "\n")
    if trace.timings is not None:
        t = trace.timings
        side = [f"design_fit_s={repr(t.design_fit_s)}"]
        side.extend(
            f"iter n={i + 1} overhead_s={repr(v)}"
            for i, v in enumerate(t.overheads_s)
        )
        Path(str(path) + ".timings").write_text("\n".join(side) + "\n")


def _tokenize(line: str, kind: str) -> dict[str, str]:
    body = line[len(kind) + 1 :]
    if kind == "error":
        head, _, message = body.partition(" message=")
        tokens = dict(p.split("=", 1) for p in head.split(" "))
        tokens["message"] = message
        return tokens
    return dict(p.split("=", 1) for p in body.split(" "))


def read_trace(path: str | Path) -> RunTrace:
    """Parse a trace file; timings stay in their sidecar (read_timings)."""
    text = Path(path).read_text()
    config: RunConfig | None = None
    design: list[DesignRecord] = []
    iters: list[IterRecord] = []
    summary: RunSummary | None = None
    error: tuple[str, str] | None = None
    for line in text.splitlines():
        if not line.strip():
            continue
        kind = line.split(" ", 1)[0]
        try:
            tokens = _tokenize(line, kind)
            if kind == "meta":
                config = _parse_meta(tokens)
            elif kind == "design":
                design.append(
                    DesignRecord(
                        index=int(tokens["i"]),
                        x=_parse_vec(tokens["x"]),
                        z=float(tokens["z"]),
                        y=float(tokens["y"]),
                        cost=float(tokens["cost"]),
                        spent=float(tokens["spent"]),
                    )
                )
            elif kind == "iter":
                iters.append(
                    IterRecord(
                        n=int(tokens["n"]),
                        x=_parse_vec(tokens["x"]),
                        z=float(tokens["z"]),
                        y=float(tokens["y"]),
                        cost=float(tokens["cost"]),
                        spent=float(tokens["spent"]),
                        incumbent=_parse_vec(tokens["incumbent"]),
                        incumbent_value=float(tokens["incumbent_value"]),
                        regret=float(tokens["regret"]),
                        best_regret=float(tokens["best_regret"]),
                    )
                )
            elif kind == "summary":
                summary = RunSummary(
                    iterations=int(tokens["iterations"]),
                    spent=float(tokens["spent"]),
                    incumbent=_parse_vec(tokens["incumbent"]),
                    incumbent_value=float(tokens["incumbent_value"]),
                    regret=float(tokens["regret"]),
                    best_regret=float(tokens["best_regret"]),
                )
            elif kind == "error":
                error = (tokens["type"], tokens["message"])
            else:
                raise ConfigError(f"unknown trace record kind {kind!r}")
        except (KeyError, ValueError):
            raise ConfigError(f"malformed trace line: {line!r}") from None
    if config is None:
        raise ConfigError("trace file has no meta line")
    return RunTrace(
        config=config,
        design=tuple(design),
        iterations=tuple(iters),
        summary=summary,
        error=error,
    )


def read_timings(path: str | Path) -> RunTimings | None:
    side = Path(str(path) + ".timings")
    if not side.exists():
        return None
    design_fit = 0.0
    overheads: list[float] = []
    for line in side.read_text().splitlines():
        if line.startswith("design_fit_s="):
            design_fit = float(line.split("=", 1)[1])
        elif line.startswith("iter "):
            overheads.append(float(line.rsplit("=", 1)[1]))
    return RunTimings(design_fit_s=design_fit, overheads_s=tuple(overheads))


# ---------------------------------------------------------------------------
# Model construction
# ---------------------------------------------------------------------------


def _model_space(bench: Benchmark, acquisition: str) -> SearchSpace:
    if acquisition == "mumbo":
        return bench.space
    # baselines query the target fidelity only: collapse to one fidelity
    target_cost = bench.space.fidelities.cost(bench.space.target_z)
    return SearchSpace(
        bounds=bench.space.bounds,
        fidelities=DiscreteFidelity(count=1, target_index=0, costs=(target_cost,)),
    )


def _kernel_template(space: SearchSpace, acquisition: str) -> KernelSpec:
    ells = tuple(0.25 * w for w in space.widths)
    if acquisition != "mumbo":
        return KernelSpec(variant="single", lengthscales=ells, variance=1.0)
    if space.is_discrete:
        count = space.fidelities.count
        rank = min(count, 2)
        w = tuple(
            tuple(1.0 if j == 0 else 0.2 for j in range(rank)) for _ in range(count)
        )
        return KernelSpec(
            variant="matern_icm",
            lengthscales=ells,
            coreg_w=w,
            coreg_kappa=tuple(0.1 for _ in range(count)),
        )
    return KernelSpec(
        variant="fabolas",
        lengthscales=ells,
        sigma1_chol=((1.0, 0.0), (0.5, 1.0)),
    )


def _cost_model(bench: Benchmark):
    fid = bench.space.fidelities
    if isinstance(fid, DiscreteFidelity):
        return PerFidelityCost(costs=fid.costs)
    return KnownCost(fn=fid.cost_fn)


def _fit_rng(seed: int, iteration: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, _TAG_FIT, iteration]))


def _maxval_rng(seed: int, iteration: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, _TAG_MAXVAL, iteration]))


# ---------------------------------------------------------------------------
# Incumbent
# ---------------------------------------------------------------------------


def incumbent(model: GpModel, observed_xs: np.ndarray) -> np.ndarray:
    """The observed parameter vector with the best posterior mean at the
    target fidelity (the model works in maximization units, so best
    means largest)."""
    observed_xs = np.atleast_2d(np.asarray(observed_xs, dtype=float))
    if observed_xs.shape[0] < 1:
        raise MumboError("incumbent needs at least one observed point")
    xs = np.unique(observed_xs, axis=0)
    mu, _ = predict_marginal(model, xs, np.full(xs.shape[0], model.space.target_z))
    return xs[int(np.argmax(mu))]


# ---------------------------------------------------------------------------
# The optimization loop
# ---------------------------------------------------------------------------


def _score_fn(
    acquisition: str,
    ctx: AcquisitionContext,
    model: GpModel,
) -> Callable[[np.ndarray, float], float]:
    if acquisition == "mumbo":
        return lambda x, z: cost_weighted(ctx, x, z)
    if acquisition == "mes":
        return lambda x, z: mes(ctx, x)
    xs = np.unique(model.x, axis=0)
    mu, _ = predict_marginal(model, xs, np.full(xs.shape[0], model.space.target_z))
    best = float(np.max(mu))
    return lambda x, z: expected_improvement(ctx, x, best)


def run_bo(config: RunConfig) -> RunTrace:
    """Execute one budgeted optimization run.

    Returns the trace; if config.output is set it is also written to
    disk (timings in a sidecar).  A model/numerics error mid-run ends
    the loop early and is recorded on the trace instead of raising.
    """
    bench = benchmark(config.benchmark)
    sign = 1.0 if bench.maximize else -1.0
    space = _model_space(bench, config.acquisition)
    design_mode = "all" if config.acquisition == "mumbo" else "target"

    design_ds = initial_design(bench, config.seed, fidelities=design_mode)
    xs_nat, zs_nat, ys_nat = design_ds.arrays()
    design_records = []
    model_ds = Dataset(space)
    spent = 0.0
    for i in range(design_ds.n):
        z_nat = float(zs_nat[i])
        cost = bench.space.fidelities.cost(z_nat)
        spent += cost
        design_records.append(
            DesignRecord(
                index=i + 1,
                x=tuple(float(v) for v in xs_nat[i]),
                z=z_nat,
                y=float(ys_nat[i]),
                cost=cost,
                spent=spent,
            )
        )
        z_model = z_nat if config.acquisition == "mumbo" else 0.0
        model_ds.append(xs_nat[i], z_model, sign * float(ys_nat[i]), cost)

    noiseless = bench.noise_vars is None
    model = make_model(
        space,
        _kernel_template(space, config.acquisition),
        model_ds,
        noise_var=1e-8 if noiseless else 1e-2,
        noise_fixed=noiseless,
    )
    t0 = time.perf_counter()
    model = fit_hyperparameters(
        model, restarts=config.fit_restarts, rng=_fit_rng(config.seed, 0)
    )
    design_fit_s = time.perf_counter() - t0

    cost_model = _cost_model(bench)
    if config.direct_budget is not None:
        direct_cfg = DirectConfig(
            budget=config.direct_budget,
            eps=config.direct_eps,
            polish_iters=config.polish_iters,
        )
    elif space.is_discrete:
        direct_cfg = DirectConfig(
            budget=default_budget(space.dims),
            eps=config.direct_eps,
            polish_iters=config.polish_iters,
        )
    else:
        direct_cfg = DirectConfig(
            budget=default_budget(space.dims + 1, joint_fidelity=True),
            eps=config.direct_eps,
            polish_iters=config.polish_iters,
        )

    def current_incumbent() -> tuple[tuple[float, ...], float, float]:
        x_hat = incumbent(model, model_ds.arrays()[0])
        true_value = evaluate(bench, x_hat, bench.space.target_z)
        return tuple(float(v) for v in x_hat), true_value, simple_regret(bench, true_value)

    iter_records: list[IterRecord] = []
    overheads: list[float] = []
    error: tuple[str, str] | None = None
    best_regret = math.inf
    n = 0
    try:
        while model_ds.spent < config.budget:
            n += 1
            t0 = time.perf_counter()
            if n > 1 and (n - 1) % config.refit_interval == 0:
                model = fit_hyperparameters(
                    model, restarts=config.fit_restarts, rng=_fit_rng(config.seed, n)
                )
            samples = sample_max_values(
                model,
                config.samples,
                _maxval_rng(config.seed, n),
                points_per_dim=config.grid_points_per_dim,
            )
            ctx = AcquisitionContext(
                model=model,
                max_values=samples,
                nodes=config.nodes,
                half_width=config.half_width,
                cost_model=cost_model,
            )
            score = _score_fn(config.acquisition, ctx, model)
            x, z_model, _ = maximize_over_space(score, space, direct_cfg)
            overheads.append(time.perf_counter() - t0)

            z_nat = bench.space.target_z if config.acquisition != "mumbo" else float(z_model)
            y_nat = evaluate(bench, x, z_nat, seed=config.seed)
            cost = bench.space.fidelities.cost(z_nat)
            model_ds.append(x, z_model, sign * y_nat, cost)
            model = fit_posterior(model, model_ds)

            x_hat, value, regret = current_incumbent()
            best_regret = min(best_regret, regret)
            iter_records.append(
                IterRecord(
                    n=n,
                    x=tuple(float(v) for v in x),
                    z=z_nat,
                    y=y_nat,
                    cost=cost,
                    spent=model_ds.spent,
                    incumbent=x_hat,
                    incumbent_value=value,
                    regret=regret,
                    best_regret=best_regret,
                )
            )
    except MumboError as exc:
        # the trace format is line-oriented, keep the message on one line
        message = " ".join(str(exc).split()) or type(exc).__name__
        error = (type(exc).__name__, message)

    summary: RunSummary | None = None
    if error is None:
        x_hat, value, regret = current_incumbent()
        if not iter_records:
            best_regret = regret
        summary = RunSummary(
            iterations=len(iter_records),
            spent=model_ds.spent,
            incumbent=x_hat,
            incumbent_value=value,
            regret=regret,
            best_regret=min(best_regret, regret),
        )

    trace = RunTrace(
        config=replace(config, output=None),
        design=tuple(design_records),
        iterations=tuple(iter_records),
        summary=summary,
        error=error,
        timings=RunTimings(design_fit_s=design_fit_s, overheads_s=tuple(overheads)),
    )
    if config.output is not None:
        write_trace(trace, config.output)
    return trace


# ---------------------------------------------------------------------------
# Batch running and aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BatchReport:
    rows: tuple[tuple[str, float, float, float, float, float], ...]
    trace_paths: tuple[str, ...]
    failures: tuple[tuple[str, int, str], ...]


def config_id(config: RunConfig) -> str:
    return f"{config.benchmark}-{config.acquisition}-n{config.samples}"


def _regret_at(trace: RunTrace, checkpoint: float, terminal: bool) -> float:
    if terminal or not trace.iterations:
        return trace.summary.best_regret
    eligible = [r.best_regret for r in trace.iterations if r.spent <= checkpoint]
    if eligible:
        return eligible[-1]
    return trace.iterations[0].best_regret


def aggregate_rows(
    traces_by_config: dict[str, list[tuple[RunTrace, RunTimings | None]]],
) -> list[tuple[str, float, float, float, float, float]]:
    """Median/mean/stderr of best regret at the cost checkpoints, plus
    the mean per-iteration overhead, per config.

    The final checkpoint always reads the terminal regret, so budget
    overshoot on the last query cannot drop it.
    """
    rows = []
    for cid in sorted(traces_by_config):
        entries = [e for e in traces_by_config[cid] if e[0].summary is not None]
        if not entries:
            continue
        budget = entries[0][0].config.budget
        all_overheads = [
            v for _, t in entries if t is not None for v in t.overheads_s
        ]
        mean_overhead = float(np.mean(all_overheads)) if all_overheads else 0.0
        for frac in CHECKPOINT_FRACTIONS:
            checkpoint = frac * budget
            vals = np.array(
                [_regret_at(tr, checkpoint, frac == 1.0) for tr, _ in entries]
            )
            stderr = (
                float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
                if len(vals) > 1
                else 0.0
            )
            rows.append(
                (
                    cid,
                    checkpoint,
                    float(np.median(vals)),
                    float(np.mean(vals)),
                    stderr,
                    mean_overhead,
                )
            )
    return rows


def write_aggregate(rows, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["config_id,checkpoint_cost,median_regret,mean_regret,stderr_regret,mean_overhead_s"]
    for cid, ckpt, med, mean, stderr, overhead in rows:
        lines.append(
            f"{cid},{repr(float(ckpt))},{repr(float(med))},{repr(float(mean))},"
            f"{repr(float(stderr))},{repr(float(overhead))}"
        )
    path.write_text("\n".join(lines) + "\n")


def run_batch(
    configs: Sequence[RunConfig],
    seeds: Sequence[int],
    out_dir: str | Path,
    jobs: int = 1,
) -> BatchReport:
    """Run every config at every seed; write traces and one aggregate CSV.

    Individual run failures are recorded and skipped; the batch
    continues.  Runs are independent, so they may execute in parallel.
    """
    if not configs:
        raise ConfigError("batch needs at least one config")
    if not seeds:
        raise ConfigError("batch needs at least one seed")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    planned = []
    for config in configs:
        cid = config_id(config)
        for seed in seeds:
            path = out_dir / f"{cid}-seed{seed}.trace"
            planned.append(replace(config, seed=seed, output=str(path)))

    traces = Parallel(n_jobs=jobs)(delayed(run_bo)(cfg) for cfg in planned)

    by_config: dict[str, list[tuple[RunTrace, RunTimings | None]]] = {}
    paths: list[str] = []
    failures: list[tuple[str, int, str]] = []
    for cfg, trace in zip(planned, traces):
        cid = config_id(cfg)
        paths.append(cfg.output)
        if trace.error is not None:
            failures.append((cid, cfg.seed, f"{trace.error[0]}: {trace.error[1]}"))
            continue
        by_config.setdefault(cid, []).append((trace, trace.timings))
    rows = aggregate_rows(by_config)
    write_aggregate(rows, out_dir / "aggregate.csv")
    return BatchReport(
        rows=tuple(rows), trace_paths=tuple(paths), failures=tuple(failures)
    )
