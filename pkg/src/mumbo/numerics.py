"""Scalar probability and quadrature primitives.

Everything downstream of the acquisition math reduces to four ingredients:

* the standard normal density and CDF (phi, Phi),
* the extended-skew-Gaussian (ESG) family: the law of a standardized
  observation y conditioned on the event that a correlated variable g
  stays below a threshold.  With correlation rho between y and g and
  standardized threshold gamma, the density is

      p(theta) = phi(theta) * Phi((gamma - rho*theta) / sqrt(1 - rho^2)) / Phi(gamma),

  with mean -rho*h and variance 1 - rho^2*h*(gamma + h) where
  h = phi(gamma)/Phi(gamma),
* composite Simpson integration on a fixed odd-count grid.

All CDF work is done through erf-class routines (scipy's ndtr/log_ndtr),
accurate to well below 1e-12, and the ESG density is evaluated in log
space so that thresholds as deep as gamma = -37 remain usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import (
    DegenerateCorrelationError,
    NonFiniteIntegrandError,
    NumericalUnderflowError,
)

__all__ = [
    "EsgParams",
    "QuadratureGrid",
    "normal_pdf",
    "normal_cdf",
    "log_normal_cdf",
    "esg_density",
    "esg_moments",
    "esg_mean_var",
    "simpson_integrate",
    "simpson_pattern",
    "GAMMA_UNDERFLOW",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Below this threshold Phi(gamma) underflows double precision; callers must
# clamp before asking for moments.
GAMMA_UNDERFLOW = -37.0


def normal_pdf(t):
    """Standard normal density, elementwise on arrays."""
    t = np.asarray(t, dtype=float)
    out = np.exp(-0.5 * t * t - _LOG_SQRT_2PI)
    return float(out) if out.ndim == 0 else out


def normal_cdf(t):
    """Standard normal CDF via an erf-class routine (<= 1e-12 error)."""
    out = ndtr(np.asarray(t, dtype=float))
    return float(out) if out.ndim == 0 else out


def log_normal_cdf(t):
    """log Phi(t), stable for arbitrarily negative t."""
    out = log_ndtr(np.asarray(t, dtype=float))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EsgParams:
    """Correlation and standardized threshold of an ESG variable.

    rho is the predictive correlation between the observation and the
    target value; gamma is the threshold (optimum sample minus predictive
    mean, over predictive standard deviation).
    """

    rho: float
    gamma: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite")
        if not math.isfinite(self.rho) or abs(self.rho) > 1.0:
            raise ValueError("rho must lie in [-1, 1]")


@dataclass(frozen=True)
class QuadratureGrid:
    """Fixed Simpson grid: odd node count over [lower, upper]."""

    lower: float
    upper: float
    points: int

    def __post_init__(self) -> None:
        if not (self.lower < self.upper):
            raise ValueError("lower must be strictly below upper")
        if self.points < 3 or self.points % 2 == 0:
            raise ValueError("points must be odd and >= 3")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.points)

    @property
    def weights(self) -> np.ndarray:
        h = (self.upper - self.lower) / (self.points - 1)
        return simpson_pattern(self.points) * h


def simpson_pattern(points: int) -> np.ndarray:
    """Composite Simpson weights without the step factor: (1,4,2,...,4,1)/3."""
    if points < 3 or points % 2 == 0:
        raise ValueError("points must be odd and >= 3")
    w = np.full(points, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w / 3.0


def simpson_integrate(f: Callable[[float], float], grid: QuadratureGrid) -> float:
    """Composite Simpson estimate of the integral of f over the grid.

    Exact for cubic polynomials.  Raises if any node evaluates to a
    non-finite value.
    """
    nodes = grid.nodes
    try:
        vals = np.asarray(f(nodes), dtype=float)
        if vals.shape != nodes.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(f(t)) for t in nodes])
    if not np.all(np.isfinite(vals)):
        raise NonFiniteIntegrandError("integrand is not finite at a quadrature node")
    return float(np.dot(grid.weights, vals))


def esg_density(params: EsgParams, theta):
    """ESG probability density, elementwise on theta.

    Requires |rho| < 1; the |rho| = 1 limit is a truncated normal and is
    handled by the closed-form branch of the acquisition instead.
    """
    if abs(params.rho) >= 1.0:
        raise DegenerateCorrelationError(
            "esg_density requires |rho| < 1; the degenerate limit is a truncated normal"
        )
    theta = np.asarray(theta, dtype=float)
    rho, gamma = params.rho, params.gamma
    skew = log_ndtr((gamma - rho * theta) / math.sqrt(1.0 - rho * rho))
    log_p = -0.5 * theta * theta - _LOG_SQRT_2PI + skew - log_ndtr(gamma)
    out = np.exp(log_p)
    return float(out) if out.ndim == 0 else out


def esg_moments(params: EsgParams) -> tuple[float, float]:
    """Mean and variance of the ESG with the given correlation and threshold.

    mean = -rho * h(gamma), variance = 1 - rho^2 * h(gamma) * (gamma + h(gamma))
    with h = phi/Phi.  Conditioning on the correlated variable staying
    *below* the threshold pulls the mean down for positive correlation,
    hence the negative sign.  Valid for |rho| <= 1 (at |rho| = 1 these are
    the moments of the one-sided truncated normal).
    """
    if params.gamma < GAMMA_UNDERFLOW:
        raise NumericalUnderflowError(
            f"Phi(gamma) underflows for gamma={params.gamma}; clamp gamma at {GAMMA_UNDERFLOW}"
        )
    mean, var = esg_mean_var(params.rho, np.asarray(params.gamma, dtype=float))
    return float(mean), float(var)


def esg_mean_var(rho: float, gammas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ESG moments over an array of thresholds (no underflow check)."""
    g = np.asarray(gammas, dtype=float)
    h = np.exp(-0.5 * g * g - _LOG_SQRT_2PI - log_ndtr(g))
    mean = -rho * h
    var = 1.0 - rho * rho * h * (g + h)
    return mean, var
