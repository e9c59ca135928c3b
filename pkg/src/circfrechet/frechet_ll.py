"""Local linear Fréchet regression with a circular predictor.

With ``t_i`` the signed angle from ``x`` to ``X_i`` and ``L_i`` the kernel
weight, the local moments are ``mu_j = n^{-1} sum_i L_i t_i^j`` and
``sigma2 = mu_0 mu_2 - mu_1^2``.  The effective weights

    W_i = L_i (mu_2 - mu_1 t_i) / sigma2

average to one and are orthogonal to ``t``; the estimate minimizes
``n^{-1} sum_i W_i d^2(Y_i, y)``.  The weights can be negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle import CircularSample, angle_diff
from .errors import DomainError, EmptyWindowError, SingularDesignError, UnsupportedModelError
from .frechet_lc import PairedSample, RegressionModel, kernel_weights
from .kde import DensityModel
from .kernel import DirectionalKernel
from .metric import EuclideanReal, FrechetEstimate, MetricSpace, weighted_frechet_mean
from .quadrature import angle_rule

__all__ = [
    "SINGULAR_TOL",
    "LocalMoments",
    "EffectiveWeights",
    "local_moments",
    "effective_weights",
    "ll_objective",
    "ll_estimate",
    "ll_scalar_closed_form",
    "population_moments",
    "population_effective_weights",
    "ll_population_objective",
    "ll_population_estimate",
]

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class LocalMoments:
    mu0: float
    mu1: float
    mu2: float
    sigma2: float
    h: float
    x: float


@dataclass(frozen=True, eq=False)
class EffectiveWeights:
    weights: np.ndarray
    moments: LocalMoments


def _design(sample, kernel, h, x):
    angles = sample.angles
    lv = kernel_weights(sample, kernel, h, x)
    if not np.any(lv > 0):
        raise EmptyWindowError(f"no observation has positive kernel weight at x={x:.17g} (h={h:g})")
    return lv, angle_diff(angles, x)


def _moments(lv, t, n, h, x) -> LocalMoments:
    lt = lv * t
    mu0 = float(np.sum(lv) / n)
    mu1 = float(np.sum(lt) / n)
    mu2 = float(np.sum(lt * t) / n)
    sigma2 = mu0 * mu2 - mu1 * mu1
    if not sigma2 > SINGULAR_TOL * mu0 * mu2:
        raise SingularDesignError(
            f"local design at x={x:.17g} is degenerate (sigma2={sigma2:.3g}, h={h:g})"
        )
    return LocalMoments(mu0, mu1, mu2, sigma2, float(h), float(x))


def local_moments(sample: CircularSample | PairedSample, kernel: DirectionalKernel, h: float,
                  x: float) -> LocalMoments:
    lv, t = _design(sample, kernel, h, x)
    return _moments(lv, t, lv.size, h, x)


def effective_weights(sample: CircularSample | PairedSample, kernel: DirectionalKernel, h: float,
                      x: float) -> EffectiveWeights:
    lv, t = _design(sample, kernel, h, x)
    mom = _moments(lv, t, lv.size, h, x)
    w = lv * (mom.mu2 - mom.mu1 * t) / mom.sigma2
    return EffectiveWeights(w, mom)


def ll_objective(space: MetricSpace, sample: PairedSample, kernel: DirectionalKernel, h: float,
                 x: float, y, form: str = "direct") -> float:
    """Local linear objective ``n^{-1} sum_i W_i d^2(Y_i, y)``.

    ``form="moment"`` evaluates the same quantity as
    ``(nu_0 mu_2 - nu_1 mu_1) / sigma2`` with
    ``nu_j = n^{-1} sum_i L_i t_i^j d^2(Y_i, y)``.
    """
    d2 = space.sq_distances(sample.responses, y)
    n = len(sample)
    if form == "direct":
        ew = effective_weights(sample, kernel, h, x)
        return float(np.dot(ew.weights, d2) / n)
    if form == "moment":
        lv, t = _design(sample, kernel, h, x)
        mom = _moments(lv, t, n, h, x)
        nu0 = np.sum(lv * d2) / n
        nu1 = np.sum(lv * t * d2) / n
        return float((nu0 * mom.mu2 - nu1 * mom.mu1) / mom.sigma2)
    raise DomainError(f"unknown objective form {form!r}")


def ll_estimate(space: MetricSpace, sample: PairedSample, kernel: DirectionalKernel, h: float,
                x: float, candidates=None) -> FrechetEstimate:
    ew = effective_weights(sample, kernel, h, x)
    active = np.nonzero(ew.weights != 0)[0]
    pts = space.as_points(sample.responses)[active]
    return weighted_frechet_mean(space, pts, ew.weights[active] / len(sample), candidates=candidates)


def ll_scalar_closed_form(sample: PairedSample, kernel: DirectionalKernel, h: float, x: float) -> float:
    """Intercept of the kernel-weighted least squares line in ``t``.

    Solved from the weighted design matrix by least squares, independently
    of the effective-weight route.
    """
    y = EuclideanReal(1).as_points(sample.responses)
    lv, t = _design(sample, kernel, h, x)
    keep = lv > 0
    root = np.sqrt(lv[keep])
    design = np.column_stack([root, root * t[keep]])
    s0, s1, s2 = np.sum(lv), np.sum(lv * t), np.sum(lv * t * t)
    if not s0 * s2 - s1 * s1 > SINGULAR_TOL * s0 * s2:
        raise SingularDesignError(f"local design at x={x:.17g} is degenerate (h={h:g})")
    coef, _, rank, _ = np.linalg.lstsq(design, root * y[keep], rcond=None)
    if rank < 2:
        raise SingularDesignError(f"local design at x={x:.17g} is rank deficient (h={h:g})")
    return float(coef[0])


def population_moments(density: DensityModel, kernel: DirectionalKernel, h: float, x: float) -> LocalMoments:
    """``mu~_j = E[L t^j]`` and ``sigma~2`` by quadrature against the density."""
    rule = angle_rule(kernel, h, x)
    base = rule.weight * rule.kernel_value * density.pdf(rule.theta)
    mu0 = float(np.sum(base))
    mu1 = float(np.sum(base * rule.offset))
    mu2 = float(np.sum(base * rule.offset**2))
    return LocalMoments(mu0, mu1, mu2, mu0 * mu2 - mu1 * mu1, float(h), float(x))


def population_effective_weights(density: DensityModel, kernel: DirectionalKernel, h: float, x: float):
    """Quadrature nodes and weights for ``E[W~(X, x) g(X)] = sum_q w_q g(theta_q)``."""
    rule = angle_rule(kernel, h, x)
    mom = population_moments(density, kernel, h, x)
    if not mom.sigma2 > SINGULAR_TOL * mom.mu0 * mom.mu2:
        raise SingularDesignError(f"population design at x={x:.17g} is degenerate (h={h:g})")
    w = (rule.weight * rule.kernel_value * density.pdf(rule.theta)
         * (mom.mu2 - mom.mu1 * rule.offset) / mom.sigma2)
    return rule.theta, w, mom


def ll_population_objective(model: RegressionModel, space: MetricSpace, kernel: DirectionalKernel,
                            h: float, x: float, y) -> float:
    theta, w, _ = population_effective_weights(model.predictor, kernel, h, x)
    return float(np.dot(w, model.conditional_objective(theta, y)))


def ll_population_estimate(model: RegressionModel, space: MetricSpace, kernel: DirectionalKernel,
                           h: float, x: float, candidates=None) -> FrechetEstimate:
    theta, w, _ = population_effective_weights(model.predictor, kernel, h, x)
    if model.location_family and candidates is None:
        est = weighted_frechet_mean(space, model.truth(theta), w)
        return FrechetEstimate(est.minimizer, est.objective + model.noise_variance * float(np.sum(w)),
                               est.candidates_evaluated, est.runner_up_gap, est.index)
    if candidates is None:
        raise UnsupportedModelError("population search needs explicit candidates for this model")
    cand = space.as_points(candidates)
    obj = np.array([np.dot(w, model.conditional_objective(theta, space.take(cand, a)))
                    for a in range(len(cand))])
    best = int(np.argmin(obj))
    gap = float(np.partition(obj, 1)[1] - obj[best]) if len(obj) > 1 else np.inf
    return FrechetEstimate(space.take(cand, best), float(obj[best]), len(cand), gap, best)
