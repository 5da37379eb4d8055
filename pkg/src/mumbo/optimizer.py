"""Derivative-free maximization of the acquisition over the search space.

The global stage is the DIRECT rectangle-subdivision algorithm (scipy's
implementation), which is deterministic and needs no gradients; the
acquisition is cheap but non-convex with flat plateaus.  A bounded
golden-section polish then refines the winner one coordinate at a time
inside a small window, since DIRECT's rectangle centers never land
exactly on an interior optimum.

Discrete fidelities are handled by running the x-space search once per
fidelity and keeping the best scoring pair; a continuous fidelity is
appended to the box as one more coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import direct

from .errors import NonFiniteObjectiveError, OptimizationFailureError
from .gp import ContinuousFidelity, SearchSpace

__all__ = [
    "DirectConfig",
    "SearchResult",
    "default_budget",
    "direct_maximize",
    "golden_polish",
    "maximize_over_space",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_POISON = 1e50


@dataclass(frozen=True)
class DirectConfig:
    """Budget and subdivision settings for one global search."""

    budget: int
    eps: float = 1e-4
    locally_biased: bool = True
    polish_iters: int = 20
    polish_frac: float = 0.1

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError("evaluation budget must be positive")
        if not (0.0 < self.eps < 1.0):
            raise ValueError("eps must lie in (0, 1)")
        if self.polish_iters < 0 or not (0.0 < self.polish_frac <= 0.5):
            raise ValueError("invalid polish settings")


@dataclass(frozen=True)
class SearchResult:
    """Best point found, its score, and the evaluation count."""

    x: tuple[float, ...]
    value: float
    evaluations: int

    def point(self) -> np.ndarray:
        return np.array(self.x)


def default_budget(dims: int, joint_fidelity: bool = False) -> int:
    """Evaluation budget: 100 per dimension plus one, doubled when the
    fidelity coordinate is searched jointly."""
    per = 200 if joint_fidelity else 100
    return per * (dims + 1)


class _Tracker:
    """Maximization adapter: negates, tracks the first best, flags bad values."""

    def __init__(self, f: Callable[[np.ndarray], float]):
        self.f = f
        self.best_x: np.ndarray | None = None
        self.best_v = -math.inf
        self.evaluations = 0
        self.bad_x: np.ndarray | None = None

    def __call__(self, x: np.ndarray) -> float:
        self.evaluations += 1
        v = float(self.f(np.asarray(x, dtype=float)))
        if not math.isfinite(v):
            if self.bad_x is None:
                self.bad_x = np.array(x, dtype=float)
            return _POISON
        if v > self.best_v:
            self.best_v = v
            self.best_x = np.array(x, dtype=float)
        return -v

    def check(self) -> None:
        if self.bad_x is not None:
            raise NonFiniteObjectiveError(
                f"objective returned a non-finite value at {self.bad_x}"
            )
        if self.best_x is None:
            raise OptimizationFailureError("objective was never evaluated")


def _golden_max(
    g: Callable[[float], float], a: float, b: float, iters: int
) -> tuple[float, float]:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(iters):
        if gc > gd:
            b, d, gd = d, c, gc
            c = b - _INVPHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _INVPHI * (b - a)
            gd = g(d)
    return (c, gc) if gc >= gd else (d, gd)


def golden_polish(
    f: Callable[[np.ndarray], float],
    x0: np.ndarray,
    bounds: Sequence[tuple[float, float]],
    iters: int = 20,
    frac: float = 0.1,
) -> tuple[np.ndarray, float, int]:
    """Coordinate-wise golden-section refinement inside a clipped window.

    Never returns a point worse than the start and never leaves the box.
    """
    x = np.array(x0, dtype=float)
    best = float(f(x))
    evaluations = 1
    if not math.isfinite(best):
        raise NonFiniteObjectiveError(f"objective returned a non-finite value at {x}")
    for i, (lo, hi) in enumerate(bounds):
        width = hi - lo
        a = max(lo, x[i] - frac * width)
        b = min(hi, x[i] + frac * width)
        if b <= a:
            continue

        def g(t: float) -> float:
            xt = x.copy()
            xt[i] = t
            v = float(f(xt))
            if not math.isfinite(v):
                raise NonFiniteObjectiveError(
                    f"objective returned a non-finite value at {xt}"
                )
            return v

        t, v = _golden_max(g, a, b, iters)
        evaluations += iters + 2
        if v > best:
            best = v
            x = x.copy()
            x[i] = t
    return x, best, evaluations


def direct_maximize(
    f: Callable[[np.ndarray], float],
    bounds: Sequence[tuple[float, float]],
    config: DirectConfig,
) -> SearchResult:
    """Global DIRECT search followed by coordinate polish, maximizing f.

    Deterministic for a deterministic f.  A constant objective returns
    the box center (the first point DIRECT evaluates; later ties never
    displace it).  Non-finite objective values raise after the global
    stage completes.
    """
    tracker = _Tracker(f)
    direct(
        tracker,
        list(bounds),
        eps=config.eps,
        maxfun=config.budget,
        maxiter=10 * config.budget,
        locally_biased=config.locally_biased,
    )
    tracker.check()
    x, value, extra = tracker.best_x, tracker.best_v, 0
    if config.polish_iters > 0:
        x, value, extra = golden_polish(
            f, x, bounds, iters=config.polish_iters, frac=config.polish_frac
        )
    return SearchResult(
        x=tuple(float(v) for v in x),
        value=float(value),
        evaluations=tracker.evaluations + extra,
    )


def maximize_over_space(
    score: Callable[[np.ndarray, float], float],
    space: SearchSpace,
    config: DirectConfig | None = None,
) -> tuple[np.ndarray, float, float]:
    """Maximize score(x, z) over the whole space; returns (x, z, value).

    Discrete fidelities each get their own x-space search with the same
    budget; ties keep the lowest fidelity index.  A continuous fidelity
    is searched jointly as an extra box coordinate.
    """
    bounds = list(space.bounds)
    if space.is_discrete:
        cfg = config or DirectConfig(budget=default_budget(space.dims))
        best: tuple[np.ndarray, float, float] | None = None
        for k in range(space.fidelities.count):
            z = float(k)
            res = direct_maximize(lambda x: score(x, z), bounds, cfg)
            if best is None or res.value > best[2]:
                best = (res.point(), z, res.value)
        return best
    fid = space.fidelities
    assert isinstance(fid, ContinuousFidelity)
    cfg = config or DirectConfig(budget=default_budget(space.dims + 1, joint_fidelity=True))
    joint = bounds + [(fid.lower, fid.upper)]
    res = direct_maximize(lambda v: score(v[:-1], float(v[-1])), joint, cfg)
    pt = res.point()
    return pt[:-1], float(pt[-1]), res.value
