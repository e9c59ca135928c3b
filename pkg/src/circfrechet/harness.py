"""Monte Carlo convergence-rate experiments.

An experiment draws ``reps`` datasets for each sample size, measures the
error of an estimator and fits a line to (log n, log mean error).  Each
replicate draws from its own generator seeded by ``(seed, n, rep)``, and
results are reduced in a fixed order, so reports do not depend on the
number of worker threads.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .circle import TWO_PI
from .errors import CircError, DomainError, ExperimentInvalidError, UnsupportedModelError
from .frechet_lc import RegressionModel, lc_estimate
from .frechet_ll import ll_estimate
from .kde import DensityEstimate, DensityModel, h_amise, integrated_squared_error, score_Sf
from .kernel import DirectionalKernel, get_kernel
from .models import density_from_spec, model_from_spec
from .parallel import worker_count

__all__ = [
    "HRule",
    "ExperimentConfig",
    "RateReport",
    "fit_loglog_slope",
    "theory_slope",
    "run_rate_experiment",
    "default_query_angles",
]

MAX_FAILURE_FRACTION = 0.05
QUERY_COUNT = 16


def default_query_angles(count: int = QUERY_COUNT) -> list:
    return [-math.pi + TWO_PI * (k + 0.5) / count for k in range(count)]


@dataclass(frozen=True)
class HRule:
    """Bandwidth as a function of n: ``fixed``, ``amise`` or ``power_law``."""

    kind: str
    h: Optional[float] = None
    gamma: Optional[float] = None
    c: float = 1.0

    def __post_init__(self):
        if self.kind == "fixed":
            if self.h is None or not self.h > 0:
                raise DomainError("fixed bandwidth rule needs h > 0")
        elif self.kind == "power_law":
            if self.gamma is None or not 0 < self.gamma < 1:
                raise DomainError("power-law bandwidth needs 0 < gamma < 1")
            if not self.c > 0:
                raise DomainError("power-law constant must be positive")
        elif self.kind != "amise":
            raise DomainError(f"unknown bandwidth rule {self.kind!r}")

    @classmethod
    def from_dict(cls, d) -> "HRule":
        if isinstance(d, str):
            d = {"type": d}
        kind = str(d.get("type", "")).lower()
        return cls(kind, d.get("h"), d.get("gamma"), float(d.get("c", 1.0)))

    def to_dict(self) -> dict:
        if self.kind == "fixed":
            return {"type": "fixed", "h": self.h}
        if self.kind == "power_law":
            return {"type": "power_law", "gamma": self.gamma, "c": self.c}
        return {"type": "amise"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a rate experiment's report.

    ``model`` is a density spec for ``estimator="kde"`` and a regression
    model spec otherwise (see :mod:`circfrechet.models`).  ``beta`` holds the
    curvature exponents used only for the theoretical slope.
    """

    model: object
    kernel: str = "von_mises"
    n_list: tuple = (500, 1000, 2000, 4000, 8000)
    h_rule: HRule = field(default_factory=lambda: HRule("amise"))
    reps: int = 200
    seed: int = 0
    query_angles: Optional[tuple] = None
    estimator: str = "kde"
    beta: float = 2.0
    beta_tilde: float = 2.0

    def __post_init__(self):
        est = str(self.estimator).lower()
        if est not in ("kde", "lc", "ll"):
            raise DomainError(f"unknown estimator {self.estimator!r}; expected kde, lc or ll")
        object.__setattr__(self, "estimator", est)
        ns = tuple(int(n) for n in self.n_list)
        if len(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
            raise DomainError("n_list needs at least two strictly increasing positive sizes")
        object.__setattr__(self, "n_list", ns)
        if int(self.reps) < 2:
            raise DomainError(f"reps must be at least 2, got {self.reps}")
        if not isinstance(self.h_rule, HRule):
            object.__setattr__(self, "h_rule", HRule.from_dict(self.h_rule))
        q = default_query_angles() if self.query_angles is None else self.query_angles
        object.__setattr__(self, "query_angles", tuple(float(a) for a in q))
        if not (self.beta > 1 and self.beta_tilde > 1):
            raise DomainError("curvature exponents must exceed 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"model", "kernel", "n_list", "h_rule", "reps", "seed", "query_angles",
                 "estimator", "beta", "beta_tilde"}
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown config keys: {sorted(extra)}")
        if "model" not in d:
            raise DomainError("config needs a model")
        kw = dict(d)
        if "h_rule" in kw:
            kw["h_rule"] = HRule.from_dict(kw["h_rule"])
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "kernel": self.kernel,
            "n_list": list(self.n_list),
            "h_rule": self.h_rule.to_dict(),
            "reps": int(self.reps),
            "seed": int(self.seed),
            "query_angles": list(self.query_angles),
            "estimator": self.estimator,
            "beta": self.beta,
            "beta_tilde": self.beta_tilde,
        }


@dataclass(frozen=True)
class RatePoint:
    n: int
    h: float
    error: float
    stderr: float


@dataclass(frozen=True)
class RateReport:
    config: ExperimentConfig
    points: tuple
    slope: float
    intercept: float
    r_squared: float
    theory_slope: Optional[float]
    failures: dict
    wall_time_seconds: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "config_echo": self.config.to_dict(),
            "points": [{"n": p.n, "h": p.h, "error": p.error, "stderr": p.stderr} for p in self.points],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "theory_slope": self.theory_slope,
            "failures": {str(k): v for k, v in self.failures.items()},
            "wall_time_seconds": self.wall_time_seconds,
        }

    def to_json(self) -> str:
        return json.dumps(_round_trip_floats(self.to_dict()), indent=2, sort_keys=True) + "\n"


def _round_trip_floats(obj):
    # 17 significant digits so every double survives a text round trip
    if isinstance(obj, float):
        return obj if not math.isfinite(obj) else float(f"{obj:.17g}")
    if isinstance(obj, dict):
        return {k: _round_trip_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_trip_floats(v) for v in obj]
    return obj


def fit_loglog_slope(points):
    """Least-squares line through ``(log x, log y)``; returns (slope, intercept, r2)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise DomainError("need at least two (x, y) points")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise DomainError("log-log fit needs positive finite coordinates")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(lx) == 0:
        raise DomainError("log-log fit needs at least two distinct x values")
    xm, ym = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - xm) ** 2))
    sxy = float(np.sum((lx - xm) * (ly - ym)))
    syy = float(np.sum((ly - ym) ** 2))
    slope = sxy / sxx
    intercept = float(ym - slope * xm)
    r2 = 1.0 if syy == 0 else min(1.0, max(0.0, sxy * sxy / (sxx * syy)))
    return slope, intercept, r2


def theory_slope(config: ExperimentConfig) -> Optional[float]:
    """Expected exponent of the error in n for the configured bandwidth rule.

    KDE error is the integrated squared error with bias ``h^4`` and variance
    ``(nh)^{-1}``.  Regression error is ``d^2`` with ``d`` of order
    ``h^{2/(beta-1)} + (nh)^{-1/(2(beta_tilde-1))}``.  A fixed bandwidth has
    no rate.
    """
    rule = config.h_rule
    if rule.kind == "fixed":
        return None
    gamma = 0.2 if rule.kind == "amise" else float(rule.gamma)
    if config.estimator == "kde":
        return -min(4.0 * gamma, 1.0 - gamma)
    bias = 2.0 * gamma / (config.beta - 1.0)
    stochastic = (1.0 - gamma) / (2.0 * (config.beta_tilde - 1.0))
    return -2.0 * min(bias, stochastic)


class _Experiment:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.kernel: DirectionalKernel = get_kernel(config.kernel)
        if config.estimator == "kde":
            self.density: DensityModel = density_from_spec(config.model)
            self.model = None
        else:
            self.model: RegressionModel = model_from_spec(config.model)
            self.density = self.model.predictor
            self.queries = np.asarray(config.query_angles)
            self.targets = self.model.truth(self.queries)
            self.estimate = lc_estimate if config.estimator == "lc" else ll_estimate
        if config.h_rule.kind == "amise":
            self.score = score_Sf(self.density)

    def bandwidth(self, n: int) -> float:
        rule = self.config.h_rule
        if rule.kind == "fixed":
            return float(rule.h)
        if rule.kind == "power_law":
            return rule.c * n ** -rule.gamma
        return h_amise(self.score, self.kernel, n)

    def replicate(self, n: int, h: float, rep: int) -> Optional[float]:
        rng = np.random.default_rng([int(self.config.seed), n, rep])
        if self.model is None:
            est = DensityEstimate(self.density.sample(n, rng), self.kernel, h)
            return integrated_squared_error(est, self.density)
        sample = self.model.sample(n, rng)
        space = self.model.space
        total = 0.0
        try:
            for k, x in enumerate(self.queries):
                fit = self.estimate(space, sample, self.kernel, h, float(x))
                total += space.sq_distances(space.as_points(self.targets)[k:k + 1], fit.minimizer)[0]
        except CircError:
            return None
        return total / len(self.queries)


def run_rate_experiment(config: ExperimentConfig, threads: Optional[int] = None,
                        record_timing: bool = False) -> RateReport:
    """Run the experiment and fit the log-log slope of mean error against n.

    Raises :class:`ExperimentInvalidError` when more than 5% of replicates
    fail at any sample size; the census maps n to the failure count.
    """
    start = time.perf_counter()
    exp = _Experiment(config)
    if exp.model is not None and not isinstance(exp.model, RegressionModel):
        raise UnsupportedModelError("regression estimators need a regression model")
    tasks = []
    for n in config.n_list:
        h = exp.bandwidth(n)
        tasks.extend((n, h, r) for r in range(config.reps))
    workers = worker_count(threads)
    if workers == 1:
        errors = [exp.replicate(*t) for t in tasks]
    else:
        with ThreadPoolExecutor(workers) as pool:
            errors = list(pool.map(lambda t: exp.replicate(*t), tasks))

    points, census = [], {}
    for i, n in enumerate(config.n_list):
        chunk = errors[i * config.reps:(i + 1) * config.reps]
        ok = np.array([e for e in chunk if e is not None], dtype=float)
        census[n] = config.reps - ok.size
        h = tasks[i * config.reps][1]
        mean = math.fsum(ok) / ok.size if ok.size else math.nan
        sd = float(np.std(ok, ddof=1)) if ok.size > 1 else math.nan
        points.append(RatePoint(n, float(h), float(mean), sd / math.sqrt(ok.size) if ok.size else math.nan))
    bad = {n: c for n, c in census.items() if c > MAX_FAILURE_FRACTION * config.reps}
    if bad:
        raise ExperimentInvalidError(
            f"estimator failed on more than {MAX_FAILURE_FRACTION:.0%} of replicates at n={sorted(bad)}",
            census=census,
        )
    slope, intercept, r2 = fit_loglog_slope([(p.n, p.error) for p in points])
    wall = time.perf_counter() - start if record_timing else None
    return RateReport(config, tuple(points), slope, intercept, r2, theory_slope(config), census, wall)
