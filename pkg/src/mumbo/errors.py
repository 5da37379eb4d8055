"""Exception types shared across the package."""

from __future__ import annotations


class MumboError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(MumboError):
    """Inputs disagree with the declared search-space dimensions."""


class DegenerateCorrelationError(MumboError):
    """|rho| = 1 reached a code path that requires |rho| < 1."""


class NumericalUnderflowError(MumboError):
    """A normal CDF factor underflowed past the supported range."""


class NonFiniteIntegrandError(MumboError):
    """A quadrature node evaluated to NaN or infinity."""


class QuadratureNegativityError(MumboError):
    """An information quantity came out negative beyond tolerance."""


class NotPositiveDefiniteError(MumboError):
    """Covariance factorization failed after maximum jitter escalation."""


class OptimizationFailureError(MumboError):
    """Every hyper-parameter restart produced a non-finite likelihood."""


class NonFiniteObjectiveError(MumboError):
    """The objective handed to the global optimizer returned NaN or infinity."""


class BinarySearchError(MumboError):
    """Bracketing the product CDF failed after repeated expansion."""


class StaleSamplesError(MumboError):
    """Max-value samples were produced by a different model generation."""


class ZeroCostError(MumboError):
    """A query cost of zero or less cannot weight an acquisition."""


class OutOfBoundsError(MumboError):
    """A point or fidelity lies outside the declared search space."""


class UnknownOptimumError(MumboError):
    """Simple regret requested for a benchmark without a reference optimum."""


class ConfigError(MumboError):
    """A run configuration is malformed or contains unknown keys."""


class RunError(MumboError):
    """A run aborted; the partial trace was persisted before raising."""

    def __init__(self, message: str, trace_path: str | None = None):
        super().__init__(message)
        self.trace_path = trace_path
