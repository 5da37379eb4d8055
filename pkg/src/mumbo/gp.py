"""Gaussian-process regression over a joint parameter-fidelity space.

The model is a single GP on (x, z) pairs with one of three kernels:

* ``matern_icm``: Matern 5/2 over x times a coregionalization matrix
  B(z, z') = W W^T + diag(kappa) over a discrete fidelity set,
* ``fabolas``: Matern 5/2 over x times a degenerate fidelity kernel
  phi(z)^T Sigma_1 phi(z') with basis phi(z) = (z, (1-z)^2), for a
  continuous fidelity interval,
* ``single``: Matern 5/2 over x alone (fidelity ignored).

Predictions come in two flavours: plain marginals, and the bivariate
joint belief over (g, y) where g is the value at the target fidelity and
y the noisy observation at the queried fidelity.  The bivariate belief
carries the correlation rho that drives the acquisition.

Observations are centered and scaled to unit variance internally; all
returned means and (co)variances are de-normalized.  The noise variance
is a hyper-parameter expressed in normalized units.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

from .errors import (
    DimensionMismatchError,
    MumboError,
    NotPositiveDefiniteError,
    OptimizationFailureError,
    OutOfBoundsError,
)

__all__ = [
    "DiscreteFidelity",
    "ContinuousFidelity",
    "SearchSpace",
    "Dataset",
    "KernelSpec",
    "GpModel",
    "BivariatePrediction",
    "kernel_eval",
    "kernel_matrix",
    "make_model",
    "fit_posterior",
    "predict_marginal",
    "joint_prediction",
    "fold_average_prediction",
    "log_marginal_likelihood",
    "fit_hyperparameters",
]

_SQRT5 = math.sqrt(5.0)
NOISE_FLOOR = 1e-8


# ---------------------------------------------------------------------------
# Search space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteFidelity:
    """A finite fidelity set indexed 0..count-1 with per-fidelity costs."""

    count: int
    target_index: int
    costs: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("need at least one fidelity")
        if not (0 <= self.target_index < self.count):
            raise ValueError("target fidelity outside the fidelity set")
        if len(self.costs) != self.count or any(c <= 0 for c in self.costs):
            raise ValueError("need one strictly positive cost per fidelity")

    @property
    def target(self) -> float:
        return float(self.target_index)

    def contains(self, z: float) -> bool:
        return float(z).is_integer() and 0 <= int(z) < self.count

    def cost(self, z: float) -> float:
        return float(self.costs[int(z)])


@dataclass(frozen=True)
class ContinuousFidelity:
    """A fidelity interval with a designated target point and a cost function."""

    lower: float
    upper: float
    target: float
    cost_fn: Callable[[float], float]

    def __post_init__(self) -> None:
        if not (self.lower < self.upper):
            raise ValueError("fidelity interval is empty")
        if not (self.lower <= self.target <= self.upper):
            raise ValueError("target fidelity outside the fidelity interval")

    def contains(self, z: float) -> bool:
        return self.lower <= float(z) <= self.upper

    def cost(self, z: float) -> float:
        c = float(self.cost_fn(float(z)))
        if c <= 0:
            raise ValueError("cost function must be strictly positive")
        return c


@dataclass(frozen=True)
class SearchSpace:
    """Box-constrained parameter domain plus a fidelity domain."""

    bounds: tuple[tuple[float, float], ...]
    fidelities: DiscreteFidelity | ContinuousFidelity

    def __post_init__(self) -> None:
        if len(self.bounds) < 1:
            raise ValueError("need at least one parameter dimension")
        for lo, hi in self.bounds:
            if not (lo < hi):
                raise ValueError("each bound must satisfy lower < upper")

    @property
    def dims(self) -> int:
        return len(self.bounds)

    @property
    def is_discrete(self) -> bool:
        return isinstance(self.fidelities, DiscreteFidelity)

    @property
    def target_z(self) -> float:
        return self.fidelities.target

    @property
    def lowers(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def uppers(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])

    @property
    def widths(self) -> np.ndarray:
        return self.uppers - self.lowers

    def contains(self, x: np.ndarray, z: float | None = None) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dims,):
            return False
        inside = bool(np.all(x >= self.lowers) and np.all(x <= self.uppers))
        if z is not None:
            inside = inside and self.fidelities.contains(z)
        return inside

    def check_point(self, x: np.ndarray, z: float | None = None) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dims,):
            raise DimensionMismatchError(
                f"point has shape {x.shape}, expected ({self.dims},)"
            )
        if not self.contains(x, z):
            raise OutOfBoundsError(f"point {x} at fidelity {z} is outside the space")


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------


class Dataset:
    """Ordered (x, z, y) observations with accumulated query cost."""

    def __init__(self, space: SearchSpace):
        self.space = space
        self._xs: list[np.ndarray] = []
        self._zs: list[float] = []
        self._ys: list[float] = []
        self.spent: float = 0.0

    @property
    def n(self) -> int:
        return len(self._ys)

    def append(self, x: np.ndarray, z: float, y: float, cost: float) -> None:
        self.space.check_point(np.asarray(x, dtype=float), z)
        self._xs.append(np.array(x, dtype=float))
        self._zs.append(float(z))
        self._ys.append(float(y))
        self.spent += float(cost)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.n == 0:
            return (
                np.empty((0, self.space.dims)),
                np.empty(0),
                np.empty(0),
            )
        return np.array(self._xs), np.array(self._zs), np.array(self._ys)

    def distinct_xs(self) -> np.ndarray:
        if self.n == 0:
            return np.empty((0, self.space.dims))
        return np.unique(np.array(self._xs), axis=0)

    def copy(self) -> "Dataset":
        out = Dataset(self.space)
        out._xs = [x.copy() for x in self._xs]
        out._zs = list(self._zs)
        out._ys = list(self._ys)
        out.spent = self.spent
        return out


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family, base hyper-parameters, and fidelity factors.

    variant is one of {"matern_icm", "fabolas", "single"}.  The base
    variance is fixed at 1 for the fidelity-factor variants so that the
    scale lives entirely in B or Sigma_1 (otherwise the product is not
    identifiable).
    """

    variant: str
    lengthscales: tuple[float, ...]
    variance: float = 1.0
    coreg_w: tuple[tuple[float, ...], ...] | None = None
    coreg_kappa: tuple[float, ...] | None = None
    sigma1_chol: tuple[tuple[float, float], tuple[float, float]] | None = None

    def __post_init__(self) -> None:
        if self.variant not in ("matern_icm", "fabolas", "single"):
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if any(l <= 0 for l in self.lengthscales):
            raise ValueError("lengthscales must be positive")
        if self.variance <= 0:
            raise ValueError("variance must be positive")
        if self.variant == "matern_icm":
            if self.coreg_w is None or self.coreg_kappa is None:
                raise ValueError("matern_icm needs coreg_w and coreg_kappa")
            if any(k <= 0 for k in self.coreg_kappa):
                raise ValueError("coreg_kappa must be strictly positive")
        if self.variant == "fabolas" and self.sigma1_chol is None:
            raise ValueError("fabolas needs sigma1_chol")

    @property
    def dims(self) -> int:
        return len(self.lengthscales)

    def coreg_b(self) -> np.ndarray:
        """B = W W^T + diag(kappa), positive semi-definite by construction."""
        w = np.asarray(self.coreg_w, dtype=float)
        return w @ w.T + np.diag(np.asarray(self.coreg_kappa, dtype=float))

    def sigma1(self) -> np.ndarray:
        """Sigma_1 = L L^T from its Cholesky factor, positive semi-definite."""
        l = np.asarray(self.sigma1_chol, dtype=float)
        return l @ l.T


def _matern52(r: np.ndarray) -> np.ndarray:
    sr = _SQRT5 * r
    return (1.0 + sr + sr * sr / 3.0) * np.exp(-sr)


def _fidelity_basis(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return np.stack([z, (1.0 - z) ** 2], axis=-1)


def kernel_matrix(
    spec: KernelSpec,
    x1: np.ndarray,
    z1: np.ndarray,
    x2: np.ndarray,
    z2: np.ndarray,
) -> np.ndarray:
    """Cross-covariance matrix between (x1, z1) rows and (x2, z2) rows."""
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    x2 = np.atleast_2d(np.asarray(x2, dtype=float))
    if x1.shape[1] != spec.dims or x2.shape[1] != spec.dims:
        raise DimensionMismatchError(
            f"kernel is {spec.dims}-dimensional, got inputs of width "
            f"{x1.shape[1]} and {x2.shape[1]}"
        )
    ell = np.asarray(spec.lengthscales, dtype=float)
    r = cdist(x1 / ell, x2 / ell)
    k = spec.variance * _matern52(r)
    if spec.variant == "matern_icm":
        b = spec.coreg_b()
        k = k * b[np.ix_(np.asarray(z1, int), np.asarray(z2, int))]
    elif spec.variant == "fabolas":
        f1 = _fidelity_basis(z1)
        f2 = _fidelity_basis(z2)
        k = k * (f1 @ spec.sigma1() @ f2.T)
    return k


def kernel_eval(
    spec: KernelSpec,
    a: tuple[np.ndarray, float],
    b: tuple[np.ndarray, float],
) -> float:
    """Scalar kernel value between two (x, z) pairs."""
    xa, za = a
    xb, zb = b
    xa = np.atleast_1d(np.asarray(xa, dtype=float))
    xb = np.atleast_1d(np.asarray(xb, dtype=float))
    if xa.shape != (spec.dims,) or xb.shape != (spec.dims,):
        raise DimensionMismatchError(
            f"kernel is {spec.dims}-dimensional, got points of shape "
            f"{xa.shape} and {xb.shape}"
        )
    return float(
        kernel_matrix(spec, xa[None, :], np.array([za]), xb[None, :], np.array([zb]))[
            0, 0
        ]
    )


def _kernel_diag(spec: KernelSpec, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    k = np.full(x.shape[0], spec.variance)
    if spec.variant == "matern_icm":
        b = spec.coreg_b()
        k = k * np.diag(b)[np.asarray(z, int)]
    elif spec.variant == "fabolas":
        f = _fidelity_basis(z)
        k = k * np.einsum("ij,jk,ik->i", f, spec.sigma1(), f)
    return k


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BivariatePrediction:
    """Joint Gaussian belief over the target value g and an observation y.

    cov is the covariance between g and the noiseless f(x, z); rho is the
    correlation between g and the noisy observation,
    rho = cov / sqrt(var_g * (var_f + noise)).
    """

    mu_g: float
    mu_f: float
    var_g: float
    var_f: float
    cov: float
    rho: float

    def __post_init__(self) -> None:
        if self.var_g < 0 or self.var_f < 0:
            raise ValueError("variances must be non-negative")
        if abs(self.rho) > 1.0:
            raise ValueError("rho must lie in [-1, 1]")


@dataclass(frozen=True)
class GpModel:
    """An immutable fitted GP: kernel, noise, data snapshot, factorization.

    noise_var is expressed in normalized observation units when
    normalize_y is set.  Refitting or changing data produces a new value.
    """

    space: SearchSpace
    kernel: KernelSpec
    noise_var: float
    x: np.ndarray
    z: np.ndarray
    y: np.ndarray
    normalize_y: bool = True
    noise_fixed: bool = False
    y_mean: float = field(default=0.0, compare=False)
    y_std: float = field(default=1.0, compare=False)
    chol: np.ndarray | None = field(default=None, compare=False, repr=False)
    alpha: np.ndarray | None = field(default=None, compare=False, repr=False)
    y_norm: np.ndarray | None = field(default=None, compare=False, repr=False)
    version: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    @property
    def noise_var_external(self) -> float:
        scale = self.y_std * self.y_std if self.normalize_y else 1.0
        return self.noise_var * scale


def _model_version(
    kernel: KernelSpec, noise_var: float, x: np.ndarray, z: np.ndarray, y: np.ndarray
) -> str:
    h = hashlib.blake2b(digest_size=8)
    h.update(repr(kernel).encode())
    h.update(repr(noise_var).encode())
    for arr in (x, z, y):
        h.update(np.ascontiguousarray(arr, dtype=float).tobytes())
    return h.hexdigest()


def _factorized(model: GpModel) -> GpModel:
    """Return a copy with normalization stats, Cholesky factor, and alpha."""
    x, z, y = model.x, model.z, model.y
    n = y.shape[0]
    version = _model_version(model.kernel, model.noise_var, x, z, y)
    if n == 0:
        return replace(
            model,
            y_mean=0.0,
            y_std=1.0,
            chol=None,
            alpha=None,
            y_norm=None,
            version=version,
        )
    if model.normalize_y:
        y_mean = float(np.mean(y))
        y_std = float(np.std(y))
        if y_std < 1e-12:
            y_std = 1.0
    else:
        y_mean, y_std = 0.0, 1.0
    y_norm = (y - y_mean) / y_std
    k = kernel_matrix(model.kernel, x, z, x, z)
    k[np.diag_indices_from(k)] += model.noise_var
    mean_diag = float(np.mean(np.diag(k)))
    jitter = 0.0
    for attempt in range(6):
        try:
            chol = cholesky(k + jitter * np.eye(n), lower=True)
            break
        except np.linalg.LinAlgError:
            jitter = mean_diag * 10.0 ** (-10 + attempt)
    else:
        raise NotPositiveDefiniteError(
            "covariance not positive definite after jitter escalation to 1e-6"
        )
    alpha = solve_triangular(
        chol.T, solve_triangular(chol, y_norm, lower=True), lower=False
    )
    return replace(
        model,
        y_mean=y_mean,
        y_std=y_std,
        chol=chol,
        alpha=alpha,
        y_norm=y_norm,
        version=version,
    )


def make_model(
    space: SearchSpace,
    kernel: KernelSpec,
    dataset: Dataset | None = None,
    noise_var: float = NOISE_FLOOR,
    *,
    normalize_y: bool = True,
    noise_fixed: bool = False,
) -> GpModel:
    """Build a fitted model from a dataset (possibly empty)."""
    if dataset is None:
        x, z, y = np.empty((0, space.dims)), np.empty(0), np.empty(0)
    else:
        x, z, y = dataset.arrays()
    model = GpModel(
        space=space,
        kernel=kernel,
        noise_var=float(noise_var),
        x=x,
        z=z,
        y=y,
        normalize_y=normalize_y,
        noise_fixed=noise_fixed,
    )
    return _factorized(model)


def fit_posterior(model: GpModel, dataset: Dataset | None = None) -> GpModel:
    """Refactorize with the current hyper-parameters, optionally on new data."""
    if dataset is not None:
        x, z, y = dataset.arrays()
        model = replace(model, x=x, z=z, y=y)
    return _factorized(model)


def _posterior_block(
    model: GpModel, xq: np.ndarray, zq: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean vector and full covariance at query rows, de-normalized."""
    xq = np.atleast_2d(np.asarray(xq, dtype=float))
    zq = np.asarray(zq, dtype=float)
    k_qq = kernel_matrix(model.kernel, xq, zq, xq, zq)
    if model.n == 0:
        mu = np.zeros(xq.shape[0])
        cov = k_qq
    else:
        k_nq = kernel_matrix(model.kernel, model.x, model.z, xq, zq)
        v = solve_triangular(model.chol, k_nq, lower=True)
        mu = k_nq.T @ model.alpha
        cov = k_qq - v.T @ v
    scale = model.y_std * model.y_std
    return model.y_mean + model.y_std * mu, scale * cov


def predict_marginal(
    model: GpModel, xq: np.ndarray, zq: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized posterior mean and variance at (xq rows, zq), de-normalized.

    Variances are clamped at zero from below.
    """
    xq = np.atleast_2d(np.asarray(xq, dtype=float))
    zq = np.asarray(zq, dtype=float)
    if zq.ndim == 0:
        zq = np.full(xq.shape[0], float(zq))
    diag = _kernel_diag(model.kernel, xq, zq)
    if model.n == 0:
        mu = np.zeros(xq.shape[0])
        var = diag
    else:
        mu = np.empty(xq.shape[0])
        var = np.empty(xq.shape[0])
        chunk = 20000
        for s in range(0, xq.shape[0], chunk):
            e = min(s + chunk, xq.shape[0])
            k_nq = kernel_matrix(model.kernel, model.x, model.z, xq[s:e], zq[s:e])
            v = solve_triangular(model.chol, k_nq, lower=True)
            mu[s:e] = k_nq.T @ model.alpha
            var[s:e] = diag[s:e] - np.einsum("ij,ij->j", v, v)
    scale = model.y_std * model.y_std
    return model.y_mean + model.y_std * mu, scale * np.maximum(var, 0.0)


def joint_prediction(model: GpModel, x: np.ndarray, z: float) -> BivariatePrediction:
    """Joint belief over (g, y) for a query at (x, z).

    g is the value at the target fidelity z0; y the noisy observation at
    z.  All five second-order quantities follow from one posterior block
    over the pair ((x, z0), (x, z)).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z0 = model.space.target_z
    xq = np.vstack([x, x])
    zq = np.array([z0, float(z)])
    mu, cov = _posterior_block(model, xq, zq)
    var_g = max(float(cov[0, 0]), 0.0)
    var_f = max(float(cov[1, 1]), 0.0)
    sigma = float(cov[0, 1])
    denom = math.sqrt(var_g * (var_f + model.noise_var_external))
    rho = 0.0 if denom < 1e-300 else sigma / denom
    rho = min(1.0, max(-1.0, rho))
    return BivariatePrediction(
        mu_g=float(mu[0]),
        mu_f=float(mu[1]),
        var_g=var_g,
        var_f=var_f,
        cov=sigma,
        rho=rho,
    )


def fold_average_prediction(
    model: GpModel, x: np.ndarray, z: float
) -> BivariatePrediction:
    """Joint belief when the target is the average over all discrete fidelities.

    Used when the objective is the mean score across K folds: the target
    mean is the fold-average of posterior means, its variance the average
    of all pairwise posterior covariances, and rho correlates a single
    fold observation with that average.
    """
    fid = model.space.fidelities
    if not isinstance(fid, DiscreteFidelity):
        raise MumboError("fold averaging needs a discrete fidelity set")
    if fid.count == 1:
        # one fold: the average IS the target, and delegating keeps the
        # reduction exact to the bit (a separate solve may not)
        return joint_prediction(model, x, fid.target)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = fid.count
    idx = int(z)
    xq = np.repeat(x[None, :], k, axis=0)
    zq = np.arange(k, dtype=float)
    mu, cov = _posterior_block(model, xq, zq)
    mu_g = float(np.sum(mu) / k)
    var_g = max(float(np.sum(cov)) / (k * k), 0.0)
    cov_avg = float(np.sum(cov[idx, :]) / k)
    mu_f = float(mu[idx])
    var_f = max(float(cov[idx, idx]), 0.0)
    denom = math.sqrt(var_g * (var_f + model.noise_var_external))
    rho = 0.0 if denom < 1e-300 else cov_avg / denom
    rho = min(1.0, max(-1.0, rho))
    return BivariatePrediction(
        mu_g=mu_g, mu_f=mu_f, var_g=var_g, var_f=var_f, cov=cov_avg, rho=rho
    )


def log_marginal_likelihood(model: GpModel) -> float:
    """Log marginal likelihood of the (normalized) observations."""
    if model.n == 0:
        raise MumboError("log marginal likelihood needs at least one observation")
    n = model.n
    return float(
        -0.5 * float(model.y_norm @ model.alpha)
        - float(np.sum(np.log(np.diag(model.chol))))
        - 0.5 * n * math.log(2.0 * math.pi)
    )


# ---------------------------------------------------------------------------
# Hyper-parameter fitting
# ---------------------------------------------------------------------------


def _pack(spec: KernelSpec, noise_var: float, noise_fixed: bool) -> np.ndarray:
    parts: list[float] = [math.log(l) for l in spec.lengthscales]
    if spec.variant == "single":
        parts.append(math.log(spec.variance))
    elif spec.variant == "matern_icm":
        w = np.asarray(spec.coreg_w, dtype=float)
        parts.extend(w.ravel().tolist())
        parts.extend(math.log(k) for k in spec.coreg_kappa)
    else:
        l = np.asarray(spec.sigma1_chol, dtype=float)
        parts.extend([math.log(l[0, 0]), l[1, 0], math.log(l[1, 1])])
    if not noise_fixed:
        parts.append(math.log(noise_var))
    return np.array(parts)


def _unpack(
    theta: np.ndarray, template: KernelSpec, noise_var: float, noise_fixed: bool
) -> tuple[KernelSpec, float]:
    d = template.dims
    i = d
    ells = tuple(float(v) for v in np.exp(theta[:d]))
    if template.variant == "single":
        spec = replace(template, lengthscales=ells, variance=float(math.exp(theta[i])))
        i += 1
    elif template.variant == "matern_icm":
        w_shape = np.asarray(template.coreg_w, dtype=float).shape
        n_w = w_shape[0] * w_shape[1]
        w = theta[i : i + n_w].reshape(w_shape)
        i += n_w
        kappa = np.exp(theta[i : i + w_shape[0]])
        i += w_shape[0]
        spec = replace(
            template,
            lengthscales=ells,
            coreg_w=tuple(tuple(float(v) for v in row) for row in w),
            coreg_kappa=tuple(float(v) for v in kappa),
        )
    else:
        l00, l10, l11 = math.exp(theta[i]), theta[i + 1], math.exp(theta[i + 2])
        i += 3
        spec = replace(
            template,
            lengthscales=ells,
            sigma1_chol=((float(l00), 0.0), (float(l10), float(l11))),
        )
    if not noise_fixed:
        noise_var = float(math.exp(theta[i]))
        i += 1
    return spec, noise_var


def _theta_bounds(
    template: KernelSpec, noise_fixed: bool, widths: np.ndarray
) -> list[tuple[float, float]]:
    bounds = [(math.log(1e-3 * w), math.log(1e3 * w)) for w in widths]
    if template.variant == "single":
        bounds.append((math.log(1e-3), math.log(1e3)))
    elif template.variant == "matern_icm":
        w_shape = np.asarray(template.coreg_w, dtype=float).shape
        bounds.extend([(-5.0, 5.0)] * (w_shape[0] * w_shape[1]))
        bounds.extend([(math.log(1e-6), math.log(1e3))] * w_shape[0])
    else:
        bounds.extend([(math.log(1e-3), math.log(1e3)), (-10.0, 10.0), (math.log(1e-3), math.log(1e3))])
    if not noise_fixed:
        bounds.append((math.log(NOISE_FLOOR), math.log(1e2)))
    return bounds


def _random_theta(
    template: KernelSpec, noise_fixed: bool, widths: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    parts: list[float] = [
        math.log(w) + rng.uniform(math.log(1e-2), math.log(1e2)) for w in widths
    ]
    if template.variant == "single":
        parts.append(rng.uniform(math.log(1e-2), math.log(1e2)))
    elif template.variant == "matern_icm":
        w_shape = np.asarray(template.coreg_w, dtype=float).shape
        parts.extend(rng.normal(0.0, 1.0, w_shape[0] * w_shape[1]).tolist())
        parts.extend(rng.uniform(math.log(1e-2), math.log(1.0), w_shape[0]).tolist())
    else:
        parts.extend(
            [rng.uniform(math.log(1e-1), math.log(1e1)), rng.normal(0.0, 1.0),
             rng.uniform(math.log(1e-1), math.log(1e1))]
        )
    if not noise_fixed:
        parts.append(rng.uniform(math.log(1e-6), math.log(1e-1)))
    return np.array(parts)


def _correlated_start(
    template: KernelSpec, noise_var: float, noise_fixed: bool, widths: np.ndarray
) -> np.ndarray | None:
    """A start encoding strongly correlated fidelities, useful for small data."""
    if template.variant != "matern_icm":
        return None
    w = np.asarray(template.coreg_w, dtype=float)
    w_start = np.zeros_like(w)
    w_start[:, 0] = 1.0
    spec = replace(
        template,
        lengthscales=tuple(0.3 * w_ for w_ in widths),
        coreg_w=tuple(tuple(float(v) for v in row) for row in w_start),
        coreg_kappa=tuple(0.05 for _ in template.coreg_kappa),
    )
    return _pack(spec, noise_var, noise_fixed)


def fit_hyperparameters(
    model: GpModel, restarts: int = 10, rng: np.random.Generator | None = None
) -> GpModel:
    """Type-II maximum likelihood via multi-start L-BFGS over log parameters.

    Starts from the current hyper-parameters plus `restarts` randomized
    draws (lengthscales and variances log-uniform over [1e-2, 1e2] around
    the dimension widths).  Returns the model refitted at the best local
    maximizer found; the result is never worse than any start.
    """
    if model.n < 2:
        raise MumboError("hyper-parameter fitting needs at least two observations")
    if rng is None:
        rng = np.random.default_rng(0)
    widths = model.space.widths
    template = model.kernel
    noise_fixed = model.noise_fixed
    bounds = _theta_bounds(template, noise_fixed, widths)

    def neg_lml(theta: np.ndarray) -> float:
        try:
            spec, noise = _unpack(theta, template, model.noise_var, noise_fixed)
            cand = _factorized(replace(model, kernel=spec, noise_var=noise))
            val = -log_marginal_likelihood(cand)
        except (MumboError, ValueError, FloatingPointError, OverflowError):
            return 1e25
        return val if math.isfinite(val) else 1e25

    starts = [_pack(template, model.noise_var, noise_fixed)]
    corr = _correlated_start(template, model.noise_var, noise_fixed, widths)
    if corr is not None:
        starts.append(corr)
    for _ in range(restarts):
        starts.append(_random_theta(template, noise_fixed, widths, rng))
    starts = [np.clip(s, [b[0] for b in bounds], [b[1] for b in bounds]) for s in starts]

    best_theta, best_val = None, math.inf
    for s in starts:
        res = minimize(
            neg_lml,
            s,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": 200, "maxfun": 400},
        )
        val = float(res.fun)
        # L-BFGS line search never accepts an ascent step, but guard anyway
        val_start = neg_lml(s)
        if val_start < val:
            val, res_x = val_start, s
        else:
            res_x = res.x
        if val < best_val:
            best_theta, best_val = res_x, val
    if best_theta is None or best_val >= 1e25:
        raise OptimizationFailureError("all restarts produced non-finite likelihood")
    spec, noise = _unpack(best_theta, template, model.noise_var, noise_fixed)
    return _factorized(replace(model, kernel=spec, noise_var=noise))
