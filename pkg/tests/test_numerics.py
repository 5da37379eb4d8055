"""Tests for normal-distribution helpers, quadrature, and the skewed
conditional distribution used inside the acquisition.

Expected values were frozen from independent oracles:

* normal cdf values from math.erf: Phi(t) = (1 + erf(t/sqrt(2)))/2;
* the truncated-normal-weighted mean and variance from a 1e7-draw
  rejection sampler over the density phi(t) * Phi((g - r t)/sqrt(1-r^2))
  / Phi(g) (the sampler is reproduced here at reduced size as a sanity
  check, the frozen constants came from the full-size run);
* Simpson exactness on cubics from the closed-form antiderivative.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mumbo.errors import (
    DegenerateCorrelationError,
    NonFiniteIntegrandError,
    NumericalUnderflowError,
)
from mumbo.numerics import (
    EsgParams,
    QuadratureGrid,
    esg_density,
    esg_mean_var,
    esg_moments,
    log_normal_cdf,
    normal_cdf,
    normal_pdf,
    simpson_integrate,
    simpson_pattern,
)


class TestNormalHelpers:
    def test_cdf_at_zero(self):
        assert normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_cdf_frozen_value(self):
        # (1 + erf(1.96/sqrt(2)))/2
        assert normal_cdf(1.96) == pytest.approx(0.9750021048517796, abs=1e-14)

    def test_pdf_at_zero(self):
        # 1/sqrt(2*pi)
        assert normal_pdf(0.0) == pytest.approx(0.3989422804014327, abs=1e-16)

    def test_log_cdf_matches_log_of_cdf(self):
        for t in (-3.0, -1.0, 0.0, 0.5, 2.0):
            assert log_normal_cdf(t) == pytest.approx(math.log(normal_cdf(t)), rel=1e-12)

    def test_log_cdf_survives_deep_tail(self):
        v = log_normal_cdf(-40.0)
        assert math.isfinite(v) and v < -700.0

    def test_elementwise_shapes(self):
        t = np.array([-1.0, 0.0, 1.0])
        assert normal_cdf(t).shape == (3,)
        assert normal_pdf(t).shape == (3,)
        assert log_normal_cdf(t).shape == (3,)
        assert isinstance(normal_cdf(0.3), float)

    @given(st.floats(min_value=-8.0, max_value=8.0))
    def test_cdf_complement_symmetry(self, t):
        assert normal_cdf(t) + normal_cdf(-t) == pytest.approx(1.0, abs=1e-14)

    @given(st.floats(min_value=-8.0, max_value=8.0), st.floats(min_value=-8.0, max_value=8.0))
    def test_cdf_monotone(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert normal_cdf(lo) <= normal_cdf(hi)


class TestSimpson:
    def test_pattern_small(self):
        np.testing.assert_allclose(simpson_pattern(5), np.array([1, 4, 2, 4, 1]) / 3.0)

    def test_cubic_exact(self):
        # integral of t^3 over [0, 2] = 4 exactly for composite Simpson
        grid = QuadratureGrid(lower=0.0, upper=2.0, points=11)
        assert simpson_integrate(lambda t: t**3, grid) == pytest.approx(4.0, rel=1e-14)

    def test_gaussian_mass_frozen(self):
        # high-resolution Simpson of phi over [-4, 4]; oracle from math.erf:
        # Phi(4) - Phi(-4) = 0.9999366575163338
        grid = QuadratureGrid(lower=-4.0, upper=4.0, points=401)
        mass = simpson_integrate(normal_pdf, grid)
        assert mass == pytest.approx(0.9999366575163338, abs=1e-10)

    def test_rejects_even_point_count(self):
        with pytest.raises(ValueError):
            QuadratureGrid(lower=0.0, upper=1.0, points=4)

    def test_rejects_empty_interval(self):
        with pytest.raises(ValueError):
            QuadratureGrid(lower=1.0, upper=1.0, points=5)

    def test_nonfinite_integrand_raises(self):
        grid = QuadratureGrid(lower=0.0, upper=1.0, points=5)
        with pytest.raises(NonFiniteIntegrandError):
            simpson_integrate(lambda t: np.where(t > 0.5, np.nan, 1.0), grid)

    def test_scalar_fallback(self):
        # integrand that only supports scalar input
        grid = QuadratureGrid(lower=0.0, upper=1.0, points=21)

        def f(t):
            if isinstance(t, np.ndarray) and t.ndim > 0:
                raise TypeError("scalar only")
            return float(t) ** 2

        assert simpson_integrate(f, grid) == pytest.approx(1.0 / 3.0, rel=1e-6)


class TestSkewedConditional:
    # frozen from a 1e7-draw rejection sampler (see module docstring)
    FROZEN = [
        # (rho, gamma, mean, variance)
        (1.0, 0.0, -0.7978845608028654, 0.3633802276324186),
        (0.5, 1.5, -0.06939487522942539, 0.9431381948698234),
        (-0.7, -1.0, 1.0675946933126867, 0.6075578561294711),
    ]

    @pytest.mark.parametrize("rho,gamma,mean,var", FROZEN)
    def test_moments_frozen(self, rho, gamma, mean, var):
        m, v = esg_moments(EsgParams(rho=rho, gamma=gamma))
        assert m == pytest.approx(mean, abs=1e-12)
        assert v == pytest.approx(var, abs=1e-12)

    def test_moments_match_rejection_sampler(self):
        # reduced-size replica of the oracle that froze the constants
        rho, gamma = 0.8, 0.3
        rng = np.random.default_rng(12345)
        draws = rng.standard_normal(400000)
        accept = rng.uniform(size=draws.shape) <= normal_cdf(
            (gamma - rho * draws) / math.sqrt(1.0 - rho * rho)
        )
        kept = draws[accept]
        m, v = esg_moments(EsgParams(rho=rho, gamma=gamma))
        assert m == pytest.approx(float(np.mean(kept)), abs=5e-3)
        assert v == pytest.approx(float(np.var(kept)), abs=5e-3)

    def test_zero_correlation_is_standard_normal(self):
        m, v = esg_moments(EsgParams(rho=0.0, gamma=-2.0))
        assert m == 0.0
        assert v == 1.0

    def test_density_normalizes(self):
        params = EsgParams(rho=0.6, gamma=0.8)
        grid = QuadratureGrid(lower=-9.0, upper=9.0, points=801)
        mass = simpson_integrate(lambda t: esg_density(params, t), grid)
        assert mass == pytest.approx(1.0, abs=1e-8)

    def test_density_quadrature_matches_moments(self):
        params = EsgParams(rho=0.85, gamma=-0.5)
        m, v = esg_moments(params)
        grid = QuadratureGrid(lower=m - 8.0, upper=m + 8.0, points=1601)
        mq = simpson_integrate(lambda t: t * esg_density(params, t), grid)
        vq = simpson_integrate(lambda t: (t - m) ** 2 * esg_density(params, t), grid)
        assert mq == pytest.approx(m, abs=1e-9)
        assert vq == pytest.approx(v, abs=1e-9)

    def test_density_rejects_unit_correlation(self):
        with pytest.raises(DegenerateCorrelationError):
            esg_density(EsgParams(rho=1.0, gamma=0.0), 0.0)

    def test_moments_underflow_raises(self):
        with pytest.raises(NumericalUnderflowError):
            esg_moments(EsgParams(rho=0.5, gamma=-40.0))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            EsgParams(rho=1.2, gamma=0.0)
        with pytest.raises(ValueError):
            EsgParams(rho=0.5, gamma=math.inf)

    def test_vectorized_matches_scalar(self):
        gammas = np.array([-3.0, -0.5, 0.0, 1.2, 4.0])
        means, variances = esg_mean_var(0.7, gammas)
        for i, g in enumerate(gammas):
            m, v = esg_moments(EsgParams(rho=0.7, gamma=float(g)))
            assert means[i] == pytest.approx(m, rel=1e-13)
            assert variances[i] == pytest.approx(v, rel=1e-13)

    @given(
        st.floats(min_value=-0.99, max_value=0.99),
        st.floats(min_value=-5.0, max_value=5.0),
        st.floats(min_value=-4.0, max_value=4.0),
    )
    @settings(max_examples=200)
    def test_density_sign_flip_symmetry(self, rho, gamma, theta):
        # flipping the correlation mirrors the density in theta
        p1 = esg_density(EsgParams(rho=rho, gamma=gamma), theta)
        p2 = esg_density(EsgParams(rho=-rho, gamma=gamma), -theta)
        assert p1 == pytest.approx(p2, rel=1e-12, abs=1e-300)

    @given(
        st.floats(min_value=-0.999, max_value=0.999),
        st.floats(min_value=-30.0, max_value=30.0),
    )
    @settings(max_examples=200)
    def test_variance_within_unit(self, rho, gamma):
        _, v = esg_moments(EsgParams(rho=rho, gamma=gamma))
        assert 0.0 < v <= 1.0 + 1e-12

    def test_moments_approach_standard_normal_for_large_gamma(self):
        # conditioning becomes vacuous as gamma grows
        m5, v5 = esg_moments(EsgParams(rho=0.9, gamma=5.0))
        m8, v8 = esg_moments(EsgParams(rho=0.9, gamma=8.0))
        assert abs(m8) < abs(m5) < 1e-4
        assert abs(v8 - 1.0) < abs(v5 - 1.0) < 1e-4

    def test_mean_is_negative_for_positive_correlation(self):
        # positive rho and a max-value cap pull the observation downward
        m, _ = esg_moments(EsgParams(rho=0.8, gamma=0.5))
        assert m < 0.0
