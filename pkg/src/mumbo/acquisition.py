"""Information-per-cost acquisition over the joint parameter-fidelity space.

The score of a candidate query (x, z) is the mutual information between
its noisy outcome y and the maximum g* of the objective at the target
fidelity, estimated over Monte-Carlo samples of g*:

    alpha(x, z) = (1/N) sum_i [ rho^2 gamma_i lam(gamma_i) / 2
                                - log Phi(gamma_i)
                                + E_theta[log Phi((gamma_i - rho theta)
                                                  / sqrt(1 - rho^2))] ]

with gamma_i = (g*_i - mu_g) / sigma_g, lam = phi/Phi the inverse Mills
ratio, rho the posterior correlation between g(x) and y, and theta
distributed as the standardized observation conditioned on g* being the
maximum (the skewed density in `numerics`).  Each summand equals the
entropy deficit of that conditional law relative to a standard normal,
so it is non-negative; at rho = 0 it vanishes and at |rho| = 1 it
reduces to the closed-form max-value entropy-search score

    gamma lam(gamma) / 2 - log Phi(gamma).

The expectation is a self-normalized Simpson rule over a window centered
at the conditional mean: the quadrature weight of the density is divided
out, which cancels the first-order quadrature error and keeps the
rho -> 0 limit exact to machine precision.

Costs enter by division: the harness maximizes alpha(x, z) / cost(z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    MumboError,
    NonFiniteIntegrandError,
    QuadratureNegativityError,
    StaleSamplesError,
    ZeroCostError,
)
from .gp import GpModel, fold_average_prediction, joint_prediction, predict_marginal
from .maxval import MaxValueSamples
from .numerics import (
    GAMMA_UNDERFLOW,
    log_normal_cdf,
    normal_cdf,
    normal_pdf,
    simpson_pattern,
)

__all__ = [
    "AcquisitionContext",
    "KnownCost",
    "PerFidelityCost",
    "LearnedLogCost",
    "fit_log_cost",
    "information_terms",
    "mumbo",
    "mes",
    "expected_improvement",
    "cost_weighted",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
GAMMA_CEILING = 1e6
RHO_COLLAPSE = 0.999999
NEGATIVITY_TOLERANCE = 1e-4
_SIGMA_G_FLOOR = 1e-150


# ---------------------------------------------------------------------------
# Cost models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KnownCost:
    """Cost given by a user-supplied function of the fidelity."""

    fn: Callable[[float], float]

    def predict(self, z: float) -> float:
        c = float(self.fn(float(z)))
        if not math.isfinite(c) or c <= 0.0:
            raise ZeroCostError(f"cost at fidelity {z} is {c}, must be positive")
        return c


@dataclass(frozen=True)
class PerFidelityCost:
    """One fixed positive cost per discrete fidelity index."""

    costs: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.costs or any(c <= 0 for c in self.costs):
            raise ZeroCostError("every per-fidelity cost must be positive")

    def predict(self, z: float) -> float:
        return float(self.costs[int(z)])


@dataclass(frozen=True)
class LearnedLogCost:
    """Log-linear cost over a continuous fidelity: log c = a + b z.

    Always predicts a positive cost; fitted by least squares on observed
    (fidelity, cost) pairs via `fit_log_cost`.
    """

    intercept: float
    slope: float

    def predict(self, z: float) -> float:
        return float(math.exp(self.intercept + self.slope * float(z)))


def fit_log_cost(zs: np.ndarray, costs: np.ndarray) -> LearnedLogCost:
    """Least-squares fit of log cost on the basis (1, z)."""
    zs = np.asarray(zs, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if zs.shape != costs.shape or zs.ndim != 1 or zs.size < 1:
        raise MumboError("need matching one-dimensional fidelity and cost arrays")
    if np.any(costs <= 0):
        raise ZeroCostError("observed costs must be positive to fit a log model")
    basis = np.stack([np.ones_like(zs), zs], axis=1)
    coef, *_ = np.linalg.lstsq(basis, np.log(costs), rcond=None)
    return LearnedLogCost(intercept=float(coef[0]), slope=float(coef[1]))


# ---------------------------------------------------------------------------
# Context
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AcquisitionContext:
    """Everything one optimization step's acquisition evaluations share.

    The max-value samples must come from exactly the model held here;
    a version mismatch (model refitted after sampling) raises at
    construction rather than silently scoring with stale samples.
    """

    model: GpModel
    max_values: MaxValueSamples
    nodes: int = 101
    half_width: float = 4.0
    cost_model: KnownCost | PerFidelityCost | LearnedLogCost | None = None
    fold_average: bool = False
    _samples_arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.max_values.model_version != self.model.version:
            raise StaleSamplesError(
                "max-value samples were drawn from a different model version"
            )
        if self.nodes < 3 or self.nodes % 2 == 0:
            raise ValueError("quadrature needs an odd node count of at least 3")
        if self.half_width <= 0:
            raise ValueError("window half-width must be positive")
        object.__setattr__(self, "_samples_arr", self.max_values.array())


# ---------------------------------------------------------------------------
# Information terms
# ---------------------------------------------------------------------------


def _inverse_mills(gammas: np.ndarray, log_cdf: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.exp(-0.5 * gammas * gammas - _LOG_SQRT_2PI - log_cdf)


def _mes_terms(gammas: np.ndarray) -> np.ndarray:
    log_cdf = log_normal_cdf(gammas)
    lam = _inverse_mills(gammas, log_cdf)
    return 0.5 * gammas * lam - log_cdf


def information_terms(
    rho: float,
    gammas: np.ndarray,
    nodes: int = 101,
    half_width: float = 4.0,
) -> np.ndarray:
    """Per-sample information content, vectorized over standardized maxima.

    gammas below the deep-tail threshold are clamped there (the term then
    plateaus near its limiting value -log(1 - rho^2)/2 instead of losing
    precision), and above a large ceiling where the term is zero.
    """
    gammas = np.clip(np.asarray(gammas, dtype=float), GAMMA_UNDERFLOW, GAMMA_CEILING)
    if abs(rho) < 1e-12:
        return np.zeros_like(gammas)
    if abs(rho) >= RHO_COLLAPSE:
        return _mes_terms(gammas)
    log_cdf = log_normal_cdf(gammas)
    lam = _inverse_mills(gammas, log_cdf)
    mean = -rho * lam
    var = 1.0 - rho * rho * lam * (gammas + lam)
    sd = np.sqrt(np.maximum(var, 1e-300))
    offsets = np.linspace(-half_width, half_width, nodes)
    theta = mean[:, None] + sd[:, None] * offsets[None, :]
    root = math.sqrt(1.0 - rho * rho)
    arg = (gammas[:, None] - rho * theta) / root
    log_tail = log_normal_cdf(arg)
    log_p = -0.5 * theta * theta - _LOG_SQRT_2PI + log_tail - log_cdf[:, None]
    with np.errstate(over="ignore"):
        p = np.exp(log_p)
    w = simpson_pattern(nodes)[None, :]
    den = np.sum(w * p, axis=1)
    num = np.sum(w * np.where(p > 0.0, p * log_tail, 0.0), axis=1)
    if np.any(den <= 0.0) or not (np.all(np.isfinite(den)) and np.all(np.isfinite(num))):
        raise NonFiniteIntegrandError(
            "conditional density mass vanished or overflowed inside the window"
        )
    expectation = num / den
    return 0.5 * rho * rho * gammas * lam - log_cdf + expectation


def _prediction(ctx: AcquisitionContext, x: np.ndarray, z: float):
    if ctx.fold_average:
        return fold_average_prediction(ctx.model, x, z)
    return joint_prediction(ctx.model, x, z)


def _finalize(value: float) -> float:
    if not math.isfinite(value):
        raise NonFiniteIntegrandError(f"acquisition evaluated to {value}")
    if value < -NEGATIVITY_TOLERANCE:
        raise QuadratureNegativityError(
            f"acquisition value {value} is negative beyond quadrature tolerance"
        )
    return max(value, 0.0)


def mumbo(ctx: AcquisitionContext, x: np.ndarray, z: float) -> float:
    """Expected information about the target-fidelity maximum from (x, z)."""
    bp = _prediction(ctx, np.asarray(x, dtype=float), float(z))
    sigma_g = math.sqrt(bp.var_g)
    if sigma_g < _SIGMA_G_FLOOR:
        return 0.0
    gammas = (ctx._samples_arr - bp.mu_g) / sigma_g
    terms = information_terms(bp.rho, gammas, ctx.nodes, ctx.half_width)
    return _finalize(float(np.mean(terms)))


def mes(ctx: AcquisitionContext, x: np.ndarray) -> float:
    """Closed-form information score of a target-fidelity query."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z0 = ctx.model.space.target_z
    mu, var = predict_marginal(ctx.model, x[None, :], np.array([z0]))
    sigma = math.sqrt(max(float(var[0]), 0.0))
    if sigma < _SIGMA_G_FLOOR:
        return 0.0
    gammas = (ctx._samples_arr - float(mu[0])) / sigma
    gammas = np.clip(gammas, GAMMA_UNDERFLOW, GAMMA_CEILING)
    return _finalize(float(np.mean(_mes_terms(gammas))))


def expected_improvement(ctx: AcquisitionContext, x: np.ndarray, best: float) -> float:
    """Classic expected improvement over `best` at the target fidelity."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z0 = ctx.model.space.target_z
    mu, var = predict_marginal(ctx.model, x[None, :], np.array([z0]))
    sigma = math.sqrt(max(float(var[0]), 0.0))
    if sigma < _SIGMA_G_FLOOR:
        return 0.0
    u = (float(mu[0]) - best) / sigma
    return max(float(sigma * (u * normal_cdf(u) + normal_pdf(u))), 0.0)


def cost_weighted(ctx: AcquisitionContext, x: np.ndarray, z: float) -> float:
    """Information per unit cost; requires a cost model on the context."""
    if ctx.cost_model is None:
        raise MumboError("cost-weighted acquisition needs a cost model")
    return mumbo(ctx, x, z) / ctx.cost_model.predict(z)
