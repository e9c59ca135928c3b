import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from circfrechet.circle import CircularSample
from circfrechet.errors import EmptySampleError, EmptyWindowError, UnsupportedModelError
from circfrechet.frechet_lc import (
    PairedSample,
    RegressionModel,
    kernel_weights,
    lc_estimate,
    lc_objective,
    lc_population_estimate,
    lc_population_objective,
)
from circfrechet.kde import uniform_density, von_mises_density
from circfrechet.kernel import exponential_kernel, uniform_kernel, von_mises_kernel
from circfrechet.metric import CircleArc, EuclideanReal, Wasserstein1D
from circfrechet.models import circle_response_model, sine_model, wasserstein_model

R = EuclideanReal()
VM = von_mises_kernel()


def test_paired_sample_validation():
    with pytest.raises(EmptySampleError):
        PairedSample([], [])
    s = PairedSample([0.0, 7.0], [1.0, 2.0])
    assert isinstance(s.predictors, CircularSample) and len(s) == 2


def test_single_observation_objective_zero():
    s = PairedSample([0.3], [2.5])
    assert lc_objective(R, s, VM, 0.5, 0.0, 2.5) == 0.0


def test_constant_responses():
    s = PairedSample([0.0, 1.0, 2.0], [4.0, 4.0, 4.0])
    assert lc_objective(R, s, VM, 0.5, 0.5, 4.0) == 0.0
    assert lc_objective(R, s, VM, 0.5, 0.5, 4.1) > 0


def test_objective_at_mean_is_weighted_variance():
    rng = np.random.default_rng(0)
    s = PairedSample(rng.uniform(-3, 3, 40), rng.normal(size=40))
    w = kernel_weights(s, VM, 0.6, 0.2)
    mean = np.dot(w, s.responses) / w.sum()
    var = np.dot(w, (s.responses - mean) ** 2) / w.sum()
    assert_allclose(lc_objective(R, s, VM, 0.6, 0.2, mean), var, rtol=1e-12)
    assert_allclose(lc_estimate(R, s, VM, 0.6, 0.2).minimizer, mean, rtol=1e-12)


def test_equidistant_design_gives_plain_mean():
    s = PairedSample([-1.0, 1.0, 0.0], [0.0, 2.0, 1.0])
    big = uniform_kernel()
    assert_allclose(lc_estimate(R, s, big, 2.0, 0.0).minimizer, 1.0)


def test_uniform_kernel_single_point_window():
    s = PairedSample([0.0, 1.0, 2.0], [5.0, 6.0, 7.0])
    assert lc_estimate(R, s, uniform_kernel(), 0.1, 0.01).minimizer == 5.0


def test_empty_window_names_query():
    s = PairedSample([0.0, 0.1], [1.0, 2.0])
    with pytest.raises(EmptyWindowError, match="x=2"):
        lc_estimate(R, s, uniform_kernel(), 0.1, 2.0)


def test_localization_is_bitwise():
    rng = np.random.default_rng(5)
    s = PairedSample(rng.uniform(-math.pi, math.pi, 200), rng.normal(size=200))
    h, x = 0.4, 0.7
    inside = 1 - np.cos(s.angles - x) <= h * h
    full = lc_estimate(R, s, uniform_kernel(), h, x).minimizer
    kept = lc_estimate(R, s.subset(np.nonzero(inside)[0]), uniform_kernel(), h, x).minimizer
    assert full == kept
    circ = CircleArc(grid_resolution=360)
    cs = PairedSample(s.angles, rng.uniform(-math.pi, math.pi, 200))
    a = lc_estimate(circ, cs, uniform_kernel(), h, x)
    b = lc_estimate(circ, cs.subset(np.nonzero(inside)[0]), uniform_kernel(), h, x)
    assert a.minimizer == b.minimizer


def test_kernel_scaling_invariance():
    rng = np.random.default_rng(6)
    s = PairedSample(rng.uniform(-3, 3, 50), rng.normal(size=50))
    for k in (VM, exponential_kernel()):
        a = lc_estimate(R, s, k, 0.5, 1.0).minimizer
        b = lc_estimate(R, s, k.scaled(7.5), 0.5, 1.0).minimizer
        assert_allclose(a, b, rtol=1e-12)
        assert_allclose(lc_objective(R, s, k, 0.5, 1.0, 0.3), lc_objective(R, s, k.scaled(7.5), 0.5, 1.0, 0.3), rtol=1e-12)


def test_rotation_equivariance():
    rng = np.random.default_rng(7)
    s = PairedSample(rng.uniform(-3, 3, 80), rng.normal(size=80))
    a = lc_estimate(R, s, VM, 0.4, 0.5).minimizer
    b = lc_estimate(R, s.rotated(1.3), VM, 0.4, 0.5 + 1.3).minimizer
    assert_allclose(a, b, rtol=1e-10)


def test_sine_model_consistency():
    m = sine_model(kappa=2.0, noise_sd=0.1)
    s = m.sample(4000, np.random.default_rng(8))
    assert abs(lc_estimate(R, s, VM, 0.25, 0.0).minimizer) < 0.05


def test_population_large_h_uniform_kernel_uniform_density():
    m = RegressionModel(uniform_density(), np.sin, R, noise_variance=0.04)
    # weights are constant, so the objective is E[(sin X - y)^2] + 0.04 = 1/2 + y^2 + 0.04
    assert_allclose(lc_population_objective(m, R, uniform_kernel(), 10.0, 0.3, 0.2), 0.5 + 0.04 + 0.04, atol=1e-6)


def test_population_constant_truth_zero():
    m = RegressionModel(von_mises_density(0, 1), lambda t: np.full(np.shape(t), 2.0), R)
    assert_allclose(lc_population_objective(m, R, VM, 0.3, 1.0, 2.0), 0.0, atol=1e-15)


def test_population_estimate_matches_grid_search():
    m = sine_model(kappa=1.0)
    est = lc_population_estimate(m, R, VM, 0.3, 0.8)
    grid = np.linspace(0.5, 0.9, 4001)
    brute = lc_population_estimate(m, R, VM, 0.3, 0.8, candidates=grid)
    assert abs(est.minimizer - brute.minimizer) <= grid[1] - grid[0]


def test_population_bias_is_order_h_squared():
    m = sine_model(kappa=1.0)
    hs = np.array([0.4, 0.2, 0.1, 0.05])
    err = [abs(lc_population_estimate(m, R, VM, h, 1.0).minimizer - math.sin(1.0)) for h in hs]
    slope = np.polyfit(np.log(hs), np.log(err), 1)[0]
    assert abs(slope - 2) < 0.3


def test_population_empirical_agreement():
    m = sine_model(kappa=1.0, noise_sd=0.1)
    x, y, h = 0.5, 0.3, 0.3
    target = lc_population_objective(m, R, VM, h, x, y)
    errs = []
    for n in (1000, 10000, 100000):
        s = m.sample(n, np.random.default_rng(n))
        errs.append(abs(lc_objective(R, s, VM, h, x, y) - target))
    assert errs[-1] < errs[0] and errs[-1] < 0.02


def test_wasserstein_regression():
    m = wasserstein_model(kappa=1.0, shift_sd=0.2)
    s = m.sample(2000, np.random.default_rng(9))
    est = lc_estimate(m.space, s, VM, 0.25, 0.5)
    assert m.space.distance(est.minimizer, m.truth(np.array([0.5]))[0]) < 0.06
    pop = lc_population_estimate(m, m.space, VM, 0.25, 0.5)
    assert_allclose(pop.objective, lc_population_objective(m, m.space, VM, 0.25, 0.5, pop.minimizer), rtol=1e-12)


def test_circle_response_model():
    m = circle_response_model(kappa=1.0, noise_kappa=20.0, grid_resolution=720)
    s = m.sample(2000, np.random.default_rng(10))
    est = lc_estimate(m.space, s, VM, 0.2, 0.6)
    assert m.space.distance(est.minimizer, 0.3) < 0.1
    with pytest.raises(UnsupportedModelError):
        lc_population_objective(m, m.space, VM, 0.2, 0.6, 0.3)
    with pytest.raises(UnsupportedModelError):
        lc_population_estimate(m, m.space, VM, 0.2, 0.6)
