import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from circfrechet.bandwidth import (
    BandwidthGrid,
    GridScale,
    curvature_score_estimate,
    cv_bandwidth_density,
    cv_bandwidth_frechet,
    plugin_bandwidth,
)
from circfrechet.circle import CircularSample, sample_von_mises
from circfrechet.errors import DegenerateCurvatureError, DomainError, NoValidBandwidthError
from circfrechet.frechet_lc import PairedSample
from circfrechet.kde import h_amise, von_mises_density
from circfrechet.kernel import uniform_kernel, von_mises_kernel
from circfrechet.metric import EuclideanReal
from circfrechet.models import sine_model

VM = von_mises_kernel()
SCORE_VM1 = 0.130272038923525961456


def test_grid_parse():
    g = BandwidthGrid.parse("0.05:1.5:20log")
    assert len(g) == 20 and g.scale is GridScale.LOG
    assert_allclose([g.values[0], g.values[-1]], [0.05, 1.5])
    assert_allclose(np.diff(np.log(g.values)), np.log(30) / 19)
    lin = BandwidthGrid.parse("0.1:0.5:5lin")
    assert_allclose(lin.values, [0.1, 0.2, 0.3, 0.4, 0.5])
    assert_allclose(BandwidthGrid.parse("0.2,0.3").values, [0.2, 0.3])
    for bad in ("x:1:3", "0.3,0.2", "-1:1:3", "0.1:0.2:0"):
        with pytest.raises(DomainError):
            BandwidthGrid.parse(bad)


def test_plugin_close_to_oracle():
    f = von_mises_density(0, 1)
    target = h_amise(SCORE_VM1, VM, 4000)
    for seed in range(3):
        h = plugin_bandwidth(f.sample(4000, np.random.default_rng(seed)), VM)
        assert abs(h / target - 1) < 0.35


def test_plugin_shrinks_with_n():
    f = von_mises_density(0, 1)
    ratios = [plugin_bandwidth(f.sample(128000, np.random.default_rng(s)), VM)
              / plugin_bandwidth(f.sample(4000, np.random.default_rng(100 + s)), VM) for s in range(5)]
    assert abs(np.mean(ratios) / 0.5 - 1) < 0.15


def test_plugin_near_uniform_flags():
    s = sample_von_mises(0.0, 0.01, 500, seed=1)
    try:
        h = plugin_bandwidth(s, VM)
    except DegenerateCurvatureError:
        return
    assert h > 3 * plugin_bandwidth(sample_von_mises(0.0, 1.0, 500, seed=1), VM)


def test_plugin_rotation_equivariant():
    s = sample_von_mises(0.0, 2.0, 800, seed=2)
    a = plugin_bandwidth(s, VM)
    b = plugin_bandwidth(s.rotated(2 * math.pi * 37 / 512), VM)
    assert_allclose(a, b, rtol=1e-9)


def test_plugin_needs_ten_points():
    with pytest.raises(DomainError):
        plugin_bandwidth(CircularSample(np.zeros(5)), VM)


def test_curvature_score_without_correction_is_larger():
    s = sample_von_mises(0.0, 1.0, 1000, seed=3)
    assert curvature_score_estimate(s, VM, 0.25, drop_diagonal=False) > curvature_score_estimate(s, VM, 0.25)


@pytest.fixture(scope="module")
def sine_data():
    return sine_model(kappa=1.0, noise_sd=0.3).sample(400, np.random.default_rng(11))


def test_cv_interior_minimum(sine_data):
    g = BandwidthGrid.parse("0.05:1.5:12log")
    res = cv_bandwidth_frechet(EuclideanReal(), sine_data, VM, g, "lc")
    i = int(np.argmin(res.scores))
    assert 0 < i < len(g) - 1
    assert res.selected_h == g.values[i]
    assert np.all(res.scores[i] <= res.scores)


def test_cv_duplicates_leave_curve_unchanged(sine_data):
    small = sine_data.subset(np.arange(60))
    dup = PairedSample(np.concatenate([small.angles, small.angles]),
                       np.concatenate([small.responses, small.responses]))
    g = BandwidthGrid.parse("0.1:1.5:6log")
    for est in ("lc", "ll"):
        a = cv_bandwidth_frechet(EuclideanReal(), small, VM, g, est).scores
        b = cv_bandwidth_frechet(EuclideanReal(), dup, VM, g, est).scores
        assert_allclose(a, b, rtol=0, atol=1e-12)


def test_cv_single_grid_point(sine_data):
    res = cv_bandwidth_frechet(EuclideanReal(), sine_data.subset(np.arange(30)), VM, BandwidthGrid([0.4]), "ll")
    assert res.selected_h == 0.4


def test_cv_kernel_scaling_invariant(sine_data):
    s = sine_data.subset(np.arange(80))
    g = BandwidthGrid.parse("0.2:1:4log")
    a = cv_bandwidth_frechet(EuclideanReal(), s, VM, g, "ll").scores
    b = cv_bandwidth_frechet(EuclideanReal(), s, VM.scaled(5.0), g, "ll").scores
    assert_allclose(a, b, rtol=1e-11)


def test_cv_thread_count_does_not_matter(sine_data):
    s = sine_data.subset(np.arange(80))
    g = BandwidthGrid.parse("0.2:1:4log")
    a = cv_bandwidth_frechet(EuclideanReal(), s, VM, g, "lc", threads=1).scores
    b = cv_bandwidth_frechet(EuclideanReal(), s, VM, g, "lc", threads=4).scores
    assert np.array_equal(a, b)


def test_cv_failing_folds_get_penalty():
    rng = np.random.default_rng(0)
    theta = np.concatenate([rng.uniform(-0.1, 0.1, 20), [2.0]])
    s = PairedSample(theta, rng.normal(size=21))
    res = cv_bandwidth_frechet(EuclideanReal(), s, uniform_kernel(), BandwidthGrid([0.05, 0.3]), "lc", penalty=100.0)
    assert res.failures[0] >= 1 and res.scores[0] >= 100.0 / 21


def test_cv_all_fail():
    s = PairedSample(np.linspace(-3, 3, 21), np.zeros(21))
    with pytest.raises(NoValidBandwidthError):
        cv_bandwidth_frechet(EuclideanReal(), s, uniform_kernel(), BandwidthGrid([0.01]), "lc")


def test_cv_needs_twenty():
    with pytest.raises(DomainError):
        cv_bandwidth_frechet(EuclideanReal(), PairedSample(np.zeros(5), np.zeros(5)), VM, BandwidthGrid([0.3]))


def test_density_cv_near_oracle():
    f = von_mises_density(0, 1)
    s = f.sample(2000, np.random.default_rng(4))
    res = cv_bandwidth_density(s, VM, BandwidthGrid.parse("0.05:1:30log"))
    assert 0.4 < res.selected_h / h_amise(SCORE_VM1, VM, 2000) < 2.0
