"""Tests for maximum-value sampling.

Oracle: for M independent standard normals the maximum's CDF is
Phi(y)^M in closed form, so its median solves Phi(y)^M = 0.5.  With
M = 1000 that root, computed independently via the inverse normal CDF,
is Phi^{-1}(0.5^(1/1000)) = 3.1975894953840083.
"""

import numpy as np
import pytest
from scipy.special import ndtri

from mumbo.gp import (
    Dataset,
    DiscreteFidelity,
    KernelSpec,
    SearchSpace,
    make_model,
)
from mumbo.maxval import (
    MaxValueSamples,
    build_grid,
    max_cdf_log,
    max_value_quantile,
    sample_max_values,
)


def _model(n=8, seed=0, noise=1e-6):
    space = SearchSpace(
        bounds=((0.0, 1.0), (0.0, 1.0)),
        fidelities=DiscreteFidelity(count=2, target_index=0, costs=(1.0, 0.5)),
    )
    spec = KernelSpec(
        variant="matern_icm",
        lengthscales=(0.3, 0.3),
        coreg_w=((1.0,), (0.9,)),
        coreg_kappa=(0.05, 0.05),
    )
    ds = Dataset(space)
    rng = np.random.default_rng(seed)
    for i in range(n):
        x = rng.uniform(0, 1, 2)
        ds.append(x, float(i % 2), float(np.sin(5 * x[0]) * np.cos(3 * x[1])), 1.0)
    return make_model(space, spec, ds, noise_var=noise, noise_fixed=True)


class TestQuantile:
    def test_median_of_thousand_normals_frozen(self):
        mu = np.zeros(1000)
        sigma = np.ones(1000)
        y = max_value_quantile(mu, sigma, 0.5)
        assert y[0] == pytest.approx(3.1975894953840083, abs=1e-6)

    def test_single_normal_matches_inverse_cdf(self):
        # with one point the maximum is that point: quantiles are exact
        for q in (0.1, 0.25, 0.5, 0.9):
            y = max_value_quantile(np.array([2.0]), np.array([0.7]), q)
            assert y[0] == pytest.approx(2.0 + 0.7 * float(ndtri(q)), abs=1e-6)

    def test_vector_of_levels_is_monotone(self):
        rng = np.random.default_rng(1)
        mu = rng.normal(0, 1, 50)
        sigma = rng.uniform(0.1, 2.0, 50)
        ys = max_value_quantile(mu, sigma, np.array([0.25, 0.5, 0.75]))
        assert ys[0] < ys[1] < ys[2]

    def test_rejects_degenerate_levels(self):
        with pytest.raises(ValueError):
            max_value_quantile(np.zeros(3), np.ones(3), 0.0)
        with pytest.raises(ValueError):
            max_value_quantile(np.zeros(3), np.ones(3), 1.0)

    def test_cdf_log_matches_direct_product(self):
        rng = np.random.default_rng(2)
        mu = rng.normal(0, 1, 20)
        sigma = rng.uniform(0.5, 1.5, 20)
        from scipy.special import ndtr

        y = np.array([0.5, 2.0])
        want = np.log(np.prod(ndtr((y[:, None] - mu) / sigma), axis=1))
        got = max_cdf_log(y, mu, sigma)
        np.testing.assert_allclose(got, want, rtol=1e-10)


class TestGrid:
    def test_size_and_bounds(self):
        model = _model()
        grid = build_grid(model, np.random.default_rng(0), points_per_dim=100)
        assert grid.shape[0] >= 200
        assert np.all(grid >= 0.0) and np.all(grid <= 1.0)

    def test_contains_observed_points(self):
        model = _model()
        grid = build_grid(model, np.random.default_rng(0), points_per_dim=50)
        for row in np.unique(model.x, axis=0):
            assert np.any(np.all(grid == row, axis=1))


class TestSampling:
    def test_samples_sorted_and_versioned(self):
        model = _model()
        s = sample_max_values(model, 12, np.random.default_rng(3), points_per_dim=200)
        assert s.count == 12
        assert list(s.values) == sorted(s.values)
        assert s.model_version == model.version

    def test_samples_exceed_best_mean_floor(self):
        model = _model()
        rng = np.random.default_rng(4)
        grid = build_grid(model, rng, points_per_dim=200)
        from mumbo.gp import predict_marginal

        mu, var = predict_marginal(model, grid, np.zeros(grid.shape[0]))
        best = int(np.argmax(mu))
        floor = mu[best] - 5.0 * np.sqrt(var[best])
        s = sample_max_values(model, 50, np.random.default_rng(5), grid=grid)
        assert min(s.values) >= floor - 1e-12

    def test_gumbel_matches_product_cdf_quartiles(self):
        # large-sample empirical quartiles should sit near the bisected ones
        model = _model()
        rng = np.random.default_rng(6)
        grid = build_grid(model, rng, points_per_dim=300)
        from mumbo.gp import predict_marginal

        mu, var = predict_marginal(model, grid, np.zeros(grid.shape[0]))
        sigma = np.sqrt(np.maximum(var, 0))
        qs = max_value_quantile(mu, sigma, np.array([0.25, 0.5, 0.75]))
        s = sample_max_values(model, 40000, np.random.default_rng(7), grid=grid)
        emp = np.quantile(s.array(), [0.25, 0.5, 0.75])
        spread = qs[2] - qs[0]
        np.testing.assert_allclose(emp, qs, atol=0.05 * max(spread, 1e-6) + 1e-4)

    def test_deterministic_posterior_collapses(self):
        space = SearchSpace(
            bounds=((0.0, 1.0),),
            fidelities=DiscreteFidelity(count=1, target_index=0, costs=(1.0,)),
        )
        spec = KernelSpec(variant="single", lengthscales=(0.3,), variance=1e-30)
        model = make_model(space, spec)
        s = sample_max_values(model, 5, np.random.default_rng(8), points_per_dim=20)
        assert s.values == (0.0,) * 5

    def test_validation(self):
        with pytest.raises(ValueError):
            MaxValueSamples(values=(), model_version="x")
        with pytest.raises(ValueError):
            MaxValueSamples(values=(2.0, 1.0), model_version="x")
        with pytest.raises(ValueError):
            MaxValueSamples(values=(float("nan"),), model_version="x")
        model = _model()
        with pytest.raises(ValueError):
            sample_max_values(model, 0, np.random.default_rng(0))

    def test_reproducible_for_fixed_seed(self):
        model = _model()
        a = sample_max_values(model, 8, np.random.default_rng(11), points_per_dim=100)
        b = sample_max_values(model, 8, np.random.default_rng(11), points_per_dim=100)
        assert a.values == b.values
