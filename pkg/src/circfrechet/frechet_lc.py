"""Local constant Fréchet regression with a circular predictor.

The estimate at ``x`` is the kernel-weighted Fréchet mean of the responses,
with weights ``L((1 - cos(X_i - x)) / h^2)``.  Population counterparts are
computed by angle quadrature for synthetic models that supply the
conditional mean squared distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .circle import CircularSample, chord_arg_angles
from .errors import DomainError, EmptySampleError, EmptyWindowError, UnsupportedModelError
from .kde import DensityModel
from .kernel import DirectionalKernel
from .metric import FrechetEstimate, MetricSpace, weighted_frechet_mean
from .quadrature import angle_rule

__all__ = [
    "PairedSample",
    "RegressionModel",
    "kernel_weights",
    "lc_objective",
    "lc_estimate",
    "lc_population_objective",
    "lc_population_estimate",
]


@dataclass(frozen=True, eq=False)
class PairedSample:
    """Predictor angles paired with responses of one metric space."""

    predictors: CircularSample
    responses: np.ndarray

    def __post_init__(self):
        preds = self.predictors
        if not isinstance(preds, CircularSample):
            preds = CircularSample(preds)
            object.__setattr__(self, "predictors", preds)
        resp = np.asarray(self.responses, dtype=float)
        if len(preds) == 0:
            raise EmptySampleError("paired sample has no observations")
        if len(resp) != len(preds):
            raise DomainError(f"{len(preds)} predictors but {len(resp)} responses")
        object.__setattr__(self, "responses", resp)

    @property
    def angles(self) -> np.ndarray:
        return self.predictors.angles

    def __len__(self):
        return len(self.predictors)

    def subset(self, index) -> "PairedSample":
        return PairedSample(CircularSample(self.angles[index]), self.responses[index])

    def rotated(self, alpha: float) -> "PairedSample":
        return PairedSample(self.predictors.rotated(alpha), self.responses)


@dataclass(frozen=True, eq=False)
class RegressionModel:
    """Synthetic ground truth: predictor density, regression function, noise.

    For a location model the conditional mean squared distance is
    ``d^2(m(theta), y) + noise_variance``, which is what the population
    oracles integrate.  ``noise(points, rng)`` perturbs true responses.
    """

    predictor: DensityModel
    truth: Callable[[np.ndarray], np.ndarray]
    space: MetricSpace
    noise: Optional[Callable[[np.ndarray, np.random.Generator], np.ndarray]] = None
    noise_variance: float = 0.0
    location_family: bool = True
    name: str = "model"
    params: dict = field(default_factory=dict)

    def sample(self, n: int, rng: np.random.Generator) -> PairedSample:
        preds = self.predictor.sample(n, rng)
        resp = self.truth(preds.angles)
        if self.noise is not None:
            resp = self.noise(resp, rng)
        return PairedSample(preds, resp)

    def conditional_objective(self, theta: np.ndarray, y) -> np.ndarray:
        """``E[d^2(Y, y) | X = theta]`` at each angle in ``theta``."""
        if not self.location_family:
            raise UnsupportedModelError(f"model {self.name!r} has no closed-form conditional objective")
        return self.space.sq_distances(self.truth(theta), y) + self.noise_variance


def kernel_weights(sample: PairedSample | CircularSample, kernel: DirectionalKernel, h: float,
                   x: float) -> np.ndarray:
    angles = sample.angles
    if angles.size == 0:
        raise EmptySampleError("sample has no observations")
    return kernel(chord_arg_angles(angles, x, h))


def _active_weights(sample, kernel, h, x):
    w = kernel_weights(sample, kernel, h, x)
    active = np.nonzero(w > 0)[0]
    if active.size == 0:
        raise EmptyWindowError(f"no observation has positive kernel weight at x={x:.17g} (h={h:g})")
    return w[active], active


def lc_objective(space: MetricSpace, sample: PairedSample, kernel: DirectionalKernel, h: float,
                 x: float, y) -> float:
    """Kernel-weighted mean squared distance from the responses to ``y``."""
    w, active = _active_weights(sample, kernel, h, x)
    d2 = space.sq_distances(space.as_points(sample.responses)[active], y)
    return float(np.dot(w, d2) / w.sum())


def lc_estimate(space: MetricSpace, sample: PairedSample, kernel: DirectionalKernel, h: float,
                x: float, candidates=None) -> FrechetEstimate:
    """Local constant estimate at ``x``.

    Observations outside the kernel window are dropped before anything else,
    so they have no influence at all (including on the candidate set).
    """
    w, active = _active_weights(sample, kernel, h, x)
    pts = space.as_points(sample.responses)[active]
    return weighted_frechet_mean(space, pts, w / w.sum(), candidates=candidates)


def _population_weights(model: RegressionModel, kernel, h, x):
    rule = angle_rule(kernel, h, x)
    w = rule.weight * rule.kernel_value * model.predictor.pdf(rule.theta)
    return rule, w


def lc_population_objective(model: RegressionModel, space: MetricSpace, kernel: DirectionalKernel,
                            h: float, x: float, y) -> float:
    """``E[L M(X, y)] / E[L]`` by quadrature, ``M`` the conditional objective."""
    rule, w = _population_weights(model, kernel, h, x)
    m = model.conditional_objective(rule.theta, y)
    return float(np.dot(w, m) / w.sum())


def lc_population_estimate(model: RegressionModel, space: MetricSpace, kernel: DirectionalKernel,
                           h: float, x: float, candidates=None) -> FrechetEstimate:
    """Minimizer of the population local constant objective.

    Location models reduce to a weighted Fréchet mean of ``m(theta)`` over the
    quadrature nodes; otherwise an explicit candidate list is searched.
    """
    rule, w = _population_weights(model, kernel, h, x)
    w = w / w.sum()
    if model.location_family and candidates is None:
        est = weighted_frechet_mean(space, model.truth(rule.theta), w)
        return FrechetEstimate(est.minimizer, est.objective + model.noise_variance,
                               est.candidates_evaluated, est.runner_up_gap, est.index)
    if candidates is None:
        raise UnsupportedModelError("population search needs explicit candidates for this model")
    cand = space.as_points(candidates)
    obj = np.array([np.dot(w, model.conditional_objective(rule.theta, space.take(cand, a)))
                    for a in range(len(cand))])
    best = int(np.argmin(obj))
    gap = float(np.partition(obj, 1)[1] - obj[best]) if len(obj) > 1 else np.inf
    return FrechetEstimate(space.take(cand, best), float(obj[best]), len(cand), gap, best)
