import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from circfrechet.circle import CircularSample, canonical_angle, sample_von_mises
from circfrechet.errors import DegenerateCurvatureError, DomainError, EmptySampleError
from circfrechet.kde import (
    DensityEstimate,
    amise,
    angle_grid,
    h_amise,
    integrated_squared_error,
    mise_empirical,
    mixture_density,
    score_Sf,
    theoretical_bias,
    theoretical_variance,
    uniform_density,
    von_mises_density,
)
from circfrechet.kernel import exponential_kernel, normalizing_c, uniform_kernel, von_mises_kernel, window_angle

# int f''^2 for von Mises(0, kappa), 30-digit mpmath quadrature
SCORE_VM1 = 0.130272038923525961456
SCORE_VM2 = 0.888988461462491616932


def _trapezoid(fn, m=4096):
    g = angle_grid(m)
    return 2 * math.pi * float(np.mean(fn(g)))


@pytest.mark.parametrize("model", [von_mises_density(0.3, 2.0), uniform_density(),
                                   mixture_density([von_mises_density(-1, 4), von_mises_density(2, 1)], [1, 2])],
                         ids=["vm", "uniform", "mixture"])
def test_density_models_consistent(model):
    assert_allclose(_trapezoid(model.pdf), 1.0, rtol=1e-12)
    t = np.linspace(-3, 3, 13)
    eps = 1e-5
    assert_allclose(model.d1(t), (model.pdf(t + eps) - model.pdf(t - eps)) / (2 * eps), atol=1e-7)
    assert_allclose(model.d2(t), (model.d1(t + eps) - model.d1(t - eps)) / (2 * eps), atol=1e-7)


def test_von_mises_density_large_kappa_finite():
    f = von_mises_density(0.0, 800.0)
    assert np.isfinite(f.pdf(0.0))
    assert_allclose(_trapezoid(f.pdf, 1 << 16), 1.0, rtol=1e-9)


def test_score_frozen_oracle():
    assert_allclose(score_Sf(von_mises_density(0, 1)), SCORE_VM1, rtol=1e-10)
    assert_allclose(score_Sf(von_mises_density(1.2, 2)), SCORE_VM2, rtol=1e-10)
    assert score_Sf(uniform_density()) == 0.0


@pytest.mark.parametrize("kernel", [von_mises_kernel(), exponential_kernel(), uniform_kernel()],
                         ids=lambda k: k.label)
def test_estimate_integrates_to_one(kernel):
    s = sample_von_mises(0.0, 1.0, 60, seed=1)
    h = 0.4
    est = DensityEstimate(s, kernel, h)
    # integrate piecewise between every kink or jump of the estimate
    edges = [s.angles]
    if kernel.support_bound is not None:
        w = window_angle(kernel, h)
        edges += [canonical_angle(s.angles + w), canonical_angle(s.angles - w)]
    cuts = np.unique(np.concatenate([[-math.pi, math.pi], *edges]))
    val = math.fsum(integrate.quad(est, a, b, epsabs=1e-13, epsrel=1e-12)[0] for a, b in zip(cuts, cuts[1:]))
    assert_allclose(val, 1.0, atol=1e-6)


def test_estimate_shapes_and_errors():
    est = DensityEstimate(CircularSample([0.0, 1.0]), von_mises_kernel(), 0.5)
    assert isinstance(est(0.0), float)
    assert est(np.zeros((2, 3))).shape == (2, 3)
    with pytest.raises(EmptySampleError):
        DensityEstimate(CircularSample([]), von_mises_kernel(), 0.5)
    with pytest.raises(DomainError):
        DensityEstimate(CircularSample([0.0]), von_mises_kernel(), -1.0)


def test_single_point_estimate_is_normalized_kernel():
    h = 0.3
    est = DensityEstimate(CircularSample([0.0]), von_mises_kernel(), h)
    c = normalizing_c(von_mises_kernel(), h, 0, 1).value
    assert_allclose(est(0.7), math.exp(-(1 - math.cos(0.7)) / h**2) / c, rtol=1e-12)


def _exact_moments(model, kernel, h, x):
    """E[L] and E[L^2] at x by adaptive quadrature, for the finite-h oracles."""
    def lk(t, k):
        return kernel(2 * math.sin(0.5 * (t - x)) ** 2 / h**2) ** k * float(model.pdf(t))
    pts = [x + s * h for s in (-4, -2, -1, 0, 1, 2, 4) if -math.pi < x + s * h < math.pi]
    e1 = integrate.quad(lambda t: lk(t, 1), -math.pi, math.pi, points=pts, limit=400, epsabs=0, epsrel=1e-12)[0]
    e2 = integrate.quad(lambda t: lk(t, 2), -math.pi, math.pi, points=pts, limit=400, epsabs=0, epsrel=1e-12)[0]
    return e1, e2


@pytest.mark.parametrize("x", [0.0, math.pi / 2])
def test_leading_bias_matches_exact_expectation_small_h(x):
    model, kernel, h = von_mises_density(0, 1), von_mises_kernel(), 0.05
    e1, _ = _exact_moments(model, kernel, h, x)
    exact_bias = e1 / normalizing_c(kernel, h, 0, 1).value - model.pdf(x)
    assert_allclose(exact_bias, theoretical_bias(model, kernel, h, x), rtol=0.02)


@pytest.mark.parametrize("x", [0.0, math.pi / 2])
def test_leading_variance_matches_exact_variance_small_h(x):
    model, kernel, h, n = von_mises_density(0, 1), von_mises_kernel(), 0.01, 1000
    e1, e2 = _exact_moments(model, kernel, h, x)
    c = normalizing_c(kernel, h, 0, 1).value
    exact_var = (e2 - e1**2) / (n * c**2)
    assert_allclose(exact_var, theoretical_variance(model, kernel, h, n, x), rtol=0.02)


def test_h_amise_minimizes_amise():
    k = von_mises_kernel()
    h0 = h_amise(SCORE_VM1, k, 1000)
    grid = np.geomspace(h0 / 3, h0 * 3, 20001)
    assert_allclose(grid[np.argmin(amise(SCORE_VM1, k, grid, 1000))], h0, rtol=1e-3)
    assert_allclose(h_amise(SCORE_VM1, k, 32000) / h0, 0.5, rtol=1e-12)


def test_h_amise_degenerate():
    with pytest.raises(DegenerateCurvatureError):
        h_amise(0.0, von_mises_kernel(), 100)


def test_ise_of_truth_like_estimate_is_small():
    model = von_mises_density(0, 1)
    s = model.sample(20000, np.random.default_rng(0))
    est = DensityEstimate(s, von_mises_kernel(), 0.2)
    ise = integrated_squared_error(est, model)
    assert 0 < ise < 1e-3


def test_mise_deterministic_across_threads():
    model, k = von_mises_density(0, 1), von_mises_kernel()
    a = mise_empirical(model, k, 0.3, 200, 8, seed=4, threads=1)
    b = mise_empirical(model, k, 0.3, 200, 8, seed=4, threads=3)
    assert a == b
    with pytest.raises(DomainError):
        mise_empirical(model, k, 0.3, 200, 1)
