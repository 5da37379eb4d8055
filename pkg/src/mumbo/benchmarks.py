"""Synthetic multi-fidelity benchmark functions.

Each benchmark bundles a search space (parameter box plus fidelity set
with query costs), a noiseless evaluator over (x, z), the optimization
direction of the target-fidelity objective, and its frozen global
optimum for regret reporting.  Observation noise, where a benchmark
defines it, is reproducible: the draw is keyed by the run seed together
with the query point and fidelity, so re-evaluating the same query in
the same run returns the same value.

The frozen optima were computed by dense multi-start L-BFGS refined to
machine precision (bounded scalar minimization for the one-dimensional
argmins); the corner optimum of the water-flow benchmark follows from
its monotonicity in every coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, UnknownOptimumError
from .gp import ContinuousFidelity, Dataset, DiscreteFidelity, SearchSpace

__all__ = [
    "Benchmark",
    "benchmark",
    "list_benchmarks",
    "evaluate",
    "initial_design",
    "simple_regret",
    "CONTINUOUS_DESIGN_FIDELITIES",
]

_DESIGN_TAG = 0xD51

# fidelities at which a continuous-fidelity design point is evaluated
CONTINUOUS_DESIGN_FIDELITIES = (0.25, 0.5, 1.0)


@dataclass(frozen=True)
class Benchmark:
    """A synthetic objective over a joint parameter-fidelity space."""

    name: str
    space: SearchSpace
    fn: Callable[[np.ndarray, float], float]
    maximize: bool
    optimum: float | None
    optimum_x: tuple[float, ...] | None
    noise_vars: tuple[float, ...] | None = None

    @property
    def dims(self) -> int:
        return self.space.dims


# ---------------------------------------------------------------------------
# Function definitions
# ---------------------------------------------------------------------------


def _forrester(x: np.ndarray, z: float) -> float:
    t = float(x[0])
    base = (6.0 * t - 2.0) ** 2 * math.sin(12.0 * t - 4.0)
    if z == 0.0:
        return base
    if z == 1.0:
        return 0.75 * base + 3.0 * (t - 0.5) + 2.0
    return 0.5 * base + 5.0 * (t - 0.5) + 2.0


def _currin_rational(x1: float) -> float:
    num = 2300.0 * x1**3 + 1900.0 * x1**2 + 2092.0 * x1 + 60.0
    den = 100.0 * x1**3 + 500.0 * x1**2 + 4.0 * x1 + 20.0
    return num / den


def _currin_exp_term(x2: float) -> float:
    # limit of exp(-1/(2 x2)) as x2 -> 0+ is 0, making the bracket 1
    if x2 <= 0.0:
        return 0.0
    return math.exp(-1.0 / (2.0 * x2))


def _currin_high(x1: float, x2: float) -> float:
    return (1.0 - _currin_exp_term(x2)) * _currin_rational(x1)


def _currin(x: np.ndarray, z: float) -> float:
    x1, x2 = float(x[0]), float(x[1])
    if z == 0.0:
        return _currin_high(x1, x2)
    return 0.25 * (
        _currin_high(x1 + 0.05, x2 + 0.05)
        + _currin_high(x1 + 0.05, max(0.0, x2 - 0.05))
        + _currin_high(x1 - 0.05, x2 + 0.05)
        + _currin_high(x1 - 0.05, max(0.0, x2 - 0.05))
    )


def _currin_continuous(x: np.ndarray, z: float) -> float:
    x1, x2 = float(x[0]), float(x[1])
    return (1.0 - 0.1 * (1.0 - z) * _currin_exp_term(x2)) * _currin_rational(x1)


_H3_A = np.array(
    [[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]]
)
_H3_P = 1e-4 * np.array(
    [
        [3689.0, 1170.0, 2673.0],
        [4699.0, 4387.0, 7470.0],
        [1091.0, 8732.0, 5547.0],
        [381.0, 5743.0, 8828.0],
    ]
)
# one amplitude column per fidelity, highest fidelity first
_H3_ALPHA = np.array(
    [[1.0, 1.01, 1.02], [1.2, 1.19, 1.18], [3.0, 2.9, 2.8], [3.2, 3.3, 3.4]]
)

_H6_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_H6_P = 1e-4 * np.array(
    [
        [1312.0, 1696.0, 5569.0, 124.0, 8283.0, 5886.0],
        [2329.0, 4135.0, 8307.0, 3736.0, 1004.0, 9991.0],
        [2348.0, 1451.0, 3522.0, 2883.0, 3047.0, 6650.0],
        [4047.0, 8828.0, 8732.0, 5743.0, 1091.0, 381.0],
    ]
)
_H6_ALPHA = np.array(
    [
        [1.0, 1.01, 1.02, 1.03],
        [1.2, 1.19, 1.18, 1.17],
        [3.0, 2.9, 2.8, 2.7],
        [3.2, 3.3, 3.4, 3.5],
    ]
)


def _hartmann(a: np.ndarray, p: np.ndarray, alpha: np.ndarray, x: np.ndarray, z: float) -> float:
    weights = alpha[:, int(z)]
    inner = np.sum(a * (np.asarray(x, dtype=float)[None, :] - p) ** 2, axis=1)
    return -float(weights @ np.exp(-inner))


def _hartmann3(x: np.ndarray, z: float) -> float:
    return _hartmann(_H3_A, _H3_P, _H3_ALPHA, x, z)


def _hartmann6(x: np.ndarray, z: float) -> float:
    return _hartmann(_H6_A, _H6_P, _H6_ALPHA, x, z)


def _borehole(x: np.ndarray, z: float) -> float:
    x1, x2, x3, x4, x5, x6, x7, x8 = (float(v) for v in x)
    lg = math.log(x2 / x1)
    inner = 2.0 * x7 * x3 / (lg * x1 * x1 * x8) + x3 / x5
    if z == 0.0:
        return 2.0 * math.pi * x3 * (x4 - x6) / (lg * (1.0 + inner))
    return 5.0 * x3 * (x4 - x6) / (lg * (1.5 + inner))


def _rosenbrock(x: np.ndarray, z: float) -> float:
    x1, x2 = float(x[0]), float(x[1])
    base = (1.0 - x1) ** 2 + 100.0 * (x2 - x1 * x1) ** 2
    if z == 0.0:
        return base
    return base + 0.1 * math.sin(10.0 * x1 + 5.0 * x2)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def _unit_box(dims: int) -> tuple[tuple[float, float], ...]:
    return tuple((0.0, 1.0) for _ in range(dims))


_BOREHOLE_BOUNDS = (
    (0.05, 0.15),
    (100.0, 50000.0),
    (63070.0, 115600.0),
    (990.0, 1110.0),
    (63.1, 116.0),
    (700.0, 820.0),
    (1120.0, 1680.0),
    (9855.0, 12055.0),
)


def _registry() -> dict[str, Benchmark]:
    return {
        "forrester": Benchmark(
            name="forrester",
            space=SearchSpace(
                bounds=_unit_box(1),
                fidelities=DiscreteFidelity(count=3, target_index=0, costs=(10.0, 5.0, 2.0)),
            ),
            fn=_forrester,
            maximize=False,
            optimum=-6.0207400557670825,
            optimum_x=(0.7572487585232999,),
        ),
        "currin": Benchmark(
            name="currin",
            space=SearchSpace(
                bounds=_unit_box(2),
                fidelities=DiscreteFidelity(count=2, target_index=0, costs=(10.0, 1.0)),
            ),
            fn=_currin,
            maximize=True,
            optimum=13.798722044728434,
            optimum_x=(0.21666666403468157, 0.0),
        ),
        "hartmann3": Benchmark(
            name="hartmann3",
            space=SearchSpace(
                bounds=_unit_box(3),
                fidelities=DiscreteFidelity(
                    count=3, target_index=0, costs=(100.0, 10.0, 1.0)
                ),
            ),
            fn=_hartmann3,
            maximize=False,
            optimum=-3.8627797873326624,
            optimum_x=(0.11458887245588897, 0.5556488890860761, 0.852546979608667),
        ),
        "hartmann6": Benchmark(
            name="hartmann6",
            space=SearchSpace(
                bounds=_unit_box(6),
                fidelities=DiscreteFidelity(
                    count=4, target_index=0, costs=(1000.0, 100.0, 10.0, 1.0)
                ),
            ),
            fn=_hartmann6,
            maximize=False,
            optimum=-3.322368011415514,
            optimum_x=(
                0.20168950875527356,
                0.1500106882964891,
                0.47687397010701565,
                0.27533242497036786,
                0.3116516111215706,
                0.6573005322090948,
            ),
        ),
        "borehole": Benchmark(
            name="borehole",
            space=SearchSpace(
                bounds=_BOREHOLE_BOUNDS,
                fidelities=DiscreteFidelity(count=2, target_index=0, costs=(10.0, 1.0)),
            ),
            fn=_borehole,
            maximize=True,
            optimum=309.83086904533246,
            optimum_x=(0.15, 100.0, 115600.0, 1110.0, 116.0, 700.0, 1120.0, 12055.0),
        ),
        "currin-continuous": Benchmark(
            name="currin-continuous",
            space=SearchSpace(
                bounds=_unit_box(2),
                fidelities=ContinuousFidelity(
                    lower=0.0,
                    upper=1.0,
                    target=1.0,
                    cost_fn=lambda z: 0.1 + z * z,
                ),
            ),
            fn=_currin_continuous,
            maximize=True,
            optimum=13.798722044728434,
            optimum_x=(0.21666666403468157, 0.0),
        ),
        "rosenbrock": Benchmark(
            name="rosenbrock",
            space=SearchSpace(
                bounds=((-2.0, 2.0), (-2.0, 2.0)),
                fidelities=DiscreteFidelity(count=2, target_index=0, costs=(1000.0, 1.0)),
            ),
            fn=_rosenbrock,
            maximize=False,
            optimum=0.0,
            optimum_x=(1.0, 1.0),
            noise_vars=(1e-3, 1e-6),
        ),
    }


_BENCHMARKS = _registry()


def list_benchmarks() -> tuple[str, ...]:
    return tuple(sorted(_BENCHMARKS))


def benchmark(name: str) -> Benchmark:
    try:
        return _BENCHMARKS[name]
    except KeyError:
        known = ", ".join(list_benchmarks())
        raise ConfigError(f"unknown benchmark {name!r}; known: {known}") from None


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _noise_rng(seed: int, x: np.ndarray, z: float) -> np.random.Generator:
    # key the draw by (seed, query): same query in a run -> same noise
    xb = np.ascontiguousarray(x, dtype=np.float64).view(np.uint64)
    zb = np.float64(z).view(np.uint64)
    entropy = [int(seed)] + [int(v) for v in xb] + [int(zb)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def evaluate(bench: Benchmark, x: np.ndarray, z: float, seed: int | None = None) -> float:
    """Observed value at (x, z): the function value plus keyed noise.

    With seed None the evaluation is noiseless regardless of the
    benchmark's noise specification.
    """
    x = np.asarray(x, dtype=float)
    bench.space.check_point(x, z)
    value = float(bench.fn(x, float(z)))
    if bench.noise_vars is not None and seed is not None:
        sd = math.sqrt(bench.noise_vars[int(z)])
        value += sd * float(_noise_rng(seed, x, z).standard_normal())
    return value


def initial_design(bench: Benchmark, seed: int, fidelities: str = "all") -> Dataset:
    """Random starting observations: twice the dimension in points.

    With fidelities="all" every point is evaluated at every fidelity
    (a fixed triple of levels for a continuous fidelity space); with
    "target" only at the target fidelity.
    """
    if fidelities not in ("all", "target"):
        raise ConfigError(f"unknown design mode {fidelities!r}")
    space = bench.space
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), _DESIGN_TAG]))
    n = 2 * space.dims
    points = rng.uniform(space.lowers, space.uppers, size=(n, space.dims))
    if fidelities == "target":
        levels: tuple[float, ...] = (space.target_z,)
    elif space.is_discrete:
        levels = tuple(float(k) for k in range(space.fidelities.count))
    else:
        levels = CONTINUOUS_DESIGN_FIDELITIES
    ds = Dataset(space)
    for row in points:
        for z in levels:
            y = evaluate(bench, row, z, seed=seed)
            ds.append(row, z, y, space.fidelities.cost(z))
    return ds


def simple_regret(bench: Benchmark, value: float) -> float:
    """Gap between the frozen optimum and a candidate target value."""
    if bench.optimum is None:
        raise UnknownOptimumError(f"benchmark {bench.name} has no recorded optimum")
    return (bench.optimum - value) if bench.maximize else (value - bench.optimum)
