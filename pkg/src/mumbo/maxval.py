"""Monte-Carlo samples of the maximum of the target-fidelity posterior.

The maximum of a GP over a box has no closed form.  Following the usual
mean-field approximation, the posterior CDF of the maximum over a finite
grid is taken to be the product of independent marginals,

    P(max < y) ~= prod_i Phi((y - mu_i) / sigma_i),

evaluated stably as exp(sum_i log Phi(.)).  Three quartiles of that
product CDF are located by bisection and matched to a Gumbel
distribution (the limiting law for maxima), from which any number of
samples can be drawn cheaply.

The grid holds uniform random points in the parameter box plus every
distinct parameter vector already observed, all at the target fidelity.
One sample set is drawn per optimization step and shared by every
acquisition evaluation in that step; samples record the model version
they were drawn from so a stale set cannot be reused after a refit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BinarySearchError
from .gp import GpModel, predict_marginal
from .numerics import log_normal_cdf

__all__ = [
    "MaxValueSamples",
    "build_grid",
    "max_cdf_log",
    "max_value_quantile",
    "sample_max_values",
]

GRID_POINTS_PER_DIM = 10000
_SIGMA_FLOOR = 1e-12
# quantile spread of a unit-scale Gumbel: log(log 4) - log(log(4/3))
_GUMBEL_SPREAD = math.log(math.log(4.0)) - math.log(math.log(4.0 / 3.0))


@dataclass(frozen=True)
class MaxValueSamples:
    """Sorted samples of the target-fidelity maximum, tied to a model version."""

    values: tuple[float, ...]
    model_version: str

    def __post_init__(self) -> None:
        if len(self.values) < 1:
            raise ValueError("need at least one sample")
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError("samples must be finite")
        if any(a > b for a, b in zip(self.values, self.values[1:])):
            raise ValueError("samples must be sorted ascending")

    @property
    def count(self) -> int:
        return len(self.values)

    def array(self) -> np.ndarray:
        return np.array(self.values)


def build_grid(
    model: GpModel,
    rng: np.random.Generator,
    points_per_dim: int = GRID_POINTS_PER_DIM,
) -> np.ndarray:
    """Uniform random grid over the box, augmented with observed points."""
    space = model.space
    n = points_per_dim * space.dims
    pts = rng.uniform(space.lowers, space.uppers, size=(n, space.dims))
    if model.n > 0:
        observed = np.unique(model.x, axis=0)
        pts = np.vstack([pts, observed])
    return pts


def max_cdf_log(y: np.ndarray, mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """log P(max < y) under independent marginals, for each y in a vector."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    t = (y[:, None] - mu[None, :]) / sigma[None, :]
    return np.sum(log_normal_cdf(t), axis=1)


def _bracket(mu: np.ndarray, sigma: np.ndarray) -> tuple[float, float]:
    smax = float(np.max(sigma))
    lo = float(np.min(mu)) - 5.0 * smax
    hi = float(np.max(mu)) + 5.0 * smax
    return lo, hi


def max_value_quantile(
    mu: np.ndarray,
    sigma: np.ndarray,
    q: float | np.ndarray,
    prob_tol: float = 1e-8,
) -> np.ndarray:
    """Quantiles of the product-CDF maximum by bisection.

    Accepts one or several probability levels; all searches share the
    vectorized CDF evaluation.  The initial bracket spans the marginal
    means plus/minus five of the largest standard deviation and is
    doubled outward until it contains every requested level.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.maximum(np.asarray(sigma, dtype=float), _SIGMA_FLOOR)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any((q <= 0.0) | (q >= 1.0)):
        raise ValueError("quantile levels must lie strictly inside (0, 1)")
    log_q = np.log(q)
    lo_s, hi_s = _bracket(mu, sigma)
    for _ in range(80):
        ends = max_cdf_log(np.array([lo_s, hi_s]), mu, sigma)
        if ends[0] < log_q.min() and ends[1] > log_q.max():
            break
        width = hi_s - lo_s
        lo_s -= width
        hi_s += width
    else:
        raise BinarySearchError("could not bracket the requested quantiles")
    lo = np.full(q.shape, lo_s)
    hi = np.full(q.shape, hi_s)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        log_c = max_cdf_log(mid, mu, sigma)
        below = log_c < log_q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(np.abs(np.exp(log_c) - q) <= prob_tol):
            return mid
        if np.max(hi - lo) < 1e-14 * max(1.0, abs(hi_s), abs(lo_s)):
            return 0.5 * (lo + hi)
    raise BinarySearchError("quantile bisection failed to converge")


def sample_max_values(
    model: GpModel,
    count: int,
    rng: np.random.Generator,
    grid: np.ndarray | None = None,
    points_per_dim: int = GRID_POINTS_PER_DIM,
) -> MaxValueSamples:
    """Draw sorted Gumbel-approximate samples of the posterior maximum.

    When every grid standard deviation is numerically zero the posterior
    maximum is deterministic and the samples collapse to the best mean.
    Samples are clamped from below at the best mean minus five of its
    standard deviation, which keeps each sample a plausible maximum.
    """
    if count < 1:
        raise ValueError("need at least one sample")
    if grid is None:
        grid = build_grid(model, rng, points_per_dim)
    z0 = model.space.target_z
    mu, var = predict_marginal(model, grid, np.full(grid.shape[0], z0))
    sigma = np.sqrt(np.maximum(var, 0.0))
    best = int(np.argmax(mu))
    if float(np.max(sigma)) < _SIGMA_FLOOR:
        top = float(mu[best])
        return MaxValueSamples(values=(top,) * count, model_version=model.version)
    quartiles = max_value_quantile(mu, sigma, np.array([0.25, 0.5, 0.75]))
    y25, y50, y75 = (float(v) for v in quartiles)
    scale = (y75 - y25) / _GUMBEL_SPREAD
    floor = float(mu[best] - 5.0 * sigma[best])
    if scale < 1e-12:
        draws = np.full(count, y50)
    else:
        loc = y50 + scale * math.log(math.log(2.0))
        u = rng.uniform(size=count)
        draws = loc - scale * np.log(-np.log(u))
    draws = np.maximum(draws, floor)
    draws.sort()
    return MaxValueSamples(
        values=tuple(float(v) for v in draws), model_version=model.version
    )
