import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from circfrechet.errors import DomainError, ExperimentInvalidError
from circfrechet.harness import (
    ExperimentConfig,
    HRule,
    default_query_angles,
    fit_loglog_slope,
    run_rate_experiment,
    theory_slope,
)


def test_fit_examples():
    s, i, r2 = fit_loglog_slope([(1, 1), (10, 0.1)])
    assert_allclose([s, r2], [-1, 1])
    assert fit_loglog_slope([(1, 2), (10, 2)])[0] == 0
    n = np.array([500, 1000, 2000, 4000, 8000.0])
    s, i, r2 = fit_loglog_slope(np.column_stack([n, 3 * n**-0.8]))
    assert abs(s + 0.8) < 1e-12 and abs(r2 - 1) < 1e-12
    assert_allclose(i, math.log(3), rtol=1e-12)


def test_fit_rejects_bad_points():
    with pytest.raises(DomainError):
        fit_loglog_slope([(1, 1)])
    with pytest.raises(DomainError):
        fit_loglog_slope([(1, 1), (2, 0)])


def test_hrule_validation():
    with pytest.raises(DomainError):
        HRule("power_law", gamma=1.0)
    with pytest.raises(DomainError):
        HRule("fixed")
    with pytest.raises(DomainError):
        HRule.from_dict({"type": "silverman"})


def test_config_validation_and_roundtrip():
    cfg = ExperimentConfig.from_dict({"model": "von_mises:0:1", "n_list": [100, 200], "reps": 2})
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    assert len(cfg.query_angles) == 16
    with pytest.raises(DomainError):
        ExperimentConfig(model="uniform", n_list=(200, 100))
    with pytest.raises(DomainError):
        ExperimentConfig(model="uniform", reps=1)
    with pytest.raises(DomainError):
        ExperimentConfig.from_dict({"model": "uniform", "colour": 1})


def test_query_grid():
    q = default_query_angles()
    assert len(q) == 16 and -math.pi < q[0] and q[-1] < math.pi


def test_theory_slopes():
    assert_allclose(theory_slope(ExperimentConfig(model="uniform")), -0.8)
    ll = ExperimentConfig(model={"type": "sine"}, estimator="ll", h_rule={"type": "power_law", "gamma": 0.2})
    assert_allclose(theory_slope(ll), -0.8)
    lc = ExperimentConfig(model={"type": "sine"}, estimator="lc", h_rule={"type": "power_law", "gamma": 0.5})
    assert_allclose(theory_slope(lc), -0.5)
    assert theory_slope(ExperimentConfig(model="uniform", h_rule={"type": "fixed", "h": 0.3})) is None


def test_smallest_config_runs():
    cfg = ExperimentConfig(model="von_mises:0:1", n_list=(50, 100), reps=2, seed=3)
    rep = run_rate_experiment(cfg)
    assert len(rep.points) == 2 and 0 <= rep.r_squared <= 1
    assert rep.wall_time_seconds is None
    data = json.loads(rep.to_json())
    assert set(data) >= {"config_echo", "points", "slope", "intercept", "r_squared", "theory_slope",
                         "wall_time_seconds"}
    assert set(data["points"][0]) == {"n", "h", "error", "stderr"}


def test_regression_report_deterministic_across_threads():
    cfg = ExperimentConfig(model={"type": "sine", "kappa": 1.0, "noise_sd": 0.1}, estimator="ll",
                           n_list=(100, 200, 400), reps=4, seed=9, h_rule={"type": "power_law", "gamma": 0.2})
    a = run_rate_experiment(cfg, threads=1).to_json()
    b = run_rate_experiment(cfg, threads=3).to_json()
    assert a == b


def test_failures_beyond_limit_invalidate():
    cfg = ExperimentConfig(model={"type": "sine", "kappa": 1.0}, estimator="lc", kernel="uniform",
                           n_list=(5, 10), reps=4, h_rule={"type": "fixed", "h": 0.01})
    with pytest.raises(ExperimentInvalidError) as info:
        run_rate_experiment(cfg)
    assert info.value.census[5] > 0


def test_timing_is_opt_in():
    cfg = ExperimentConfig(model="uniform", n_list=(20, 40), reps=2, h_rule={"type": "fixed", "h": 0.5})
    assert run_rate_experiment(cfg, record_timing=True).wall_time_seconds >= 0
