"""Kernel density estimation on the circle and its asymptotic theory.

The estimator is

    f_h(x) = sum_i L((1 - cos(X_i - x)) / h^2) / (n * c_{h,0,1}(L))

and the oracles give its leading bias, variance, MISE and the AMISE-optimal
bandwidth for a known density.  The Hessian trace of the radial extension of
a circle density equals its second angular derivative, so densities only need
to provide ``f''``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .circle import TWO_PI, CircularSample, canonical_angle, chord_arg_angles, sample_von_mises
from .errors import DegenerateCurvatureError, DomainError, EmptySampleError
from .kernel import DirectionalKernel, moment_a, normalizing_c
from .parallel import worker_count

__all__ = [
    "DensityModel",
    "von_mises_density",
    "uniform_density",
    "mixture_density",
    "DensityEstimate",
    "density_at",
    "angle_grid",
    "integrated_squared_error",
    "theoretical_bias",
    "theoretical_variance",
    "score_Sf",
    "amise",
    "h_amise",
    "mise_empirical",
]

GRID_SIZE = 256
# bound on n * len(x) per vectorized block
_BLOCK = 2_000_000


@dataclass(frozen=True, eq=False)
class DensityModel:
    """A known circle density with its first two angular derivatives.

    ``sampler(n, rng)`` is optional and only needed for simulation.
    """

    pdf: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    name: str = "density"
    sampler: Optional[Callable[[int, np.random.Generator], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    def sample(self, n: int, rng: np.random.Generator) -> CircularSample:
        if self.sampler is None:
            raise DomainError(f"density model {self.name!r} cannot be sampled")
        return CircularSample(self.sampler(n, rng))


def von_mises_density(mu: float = 0.0, kappa: float = 1.0) -> DensityModel:
    if kappa < 0:
        raise DomainError(f"kappa must be non-negative, got {kappa}")
    # exp(kappa (cos - 1)) / i0e(kappa) avoids overflow for large kappa
    norm = TWO_PI * special.i0e(kappa)

    def pdf(t):
        return np.exp(kappa * (np.cos(np.asarray(t) - mu) - 1.0)) / norm

    def d1(t):
        u = np.asarray(t) - mu
        return -kappa * np.sin(u) * pdf(t)

    def d2(t):
        u = np.asarray(t) - mu
        return (kappa**2 * np.sin(u) ** 2 - kappa * np.cos(u)) * pdf(t)

    def sampler(n, rng):
        return sample_von_mises(mu, kappa, n, rng=rng).angles

    return DensityModel(pdf, d1, d2, f"von_mises({mu:g},{kappa:g})", sampler,
                        {"family": "von_mises", "mu": mu, "kappa": kappa})


def uniform_density() -> DensityModel:
    c = 1.0 / TWO_PI
    return DensityModel(
        lambda t: np.full(np.shape(t), c),
        lambda t: np.zeros(np.shape(t)),
        lambda t: np.zeros(np.shape(t)),
        "uniform",
        lambda n, rng: rng.uniform(-math.pi, math.pi, n),
        {"family": "uniform"},
    )


def mixture_density(components: Sequence[DensityModel], weights: Sequence[float]) -> DensityModel:
    w = np.asarray(weights, dtype=float)
    if len(components) != w.size or w.size == 0 or np.any(w < 0) or not w.sum() > 0:
        raise DomainError("mixture needs one non-negative weight per component")
    w = w / w.sum()

    def combine(attr):
        def fn(t):
            return sum(wi * getattr(c, attr)(t) for wi, c in zip(w, components))
        return fn

    def sampler(n, rng):
        counts = rng.multinomial(n, w)
        parts = [c.sampler(int(m), rng) for c, m in zip(components, counts) if m > 0]
        out = np.concatenate(parts)
        rng.shuffle(out)
        return out

    name = "mixture(" + ",".join(f"{wi:g}*{c.name}" for wi, c in zip(w, components)) + ")"
    can_sample = all(c.sampler is not None for c in components)
    return DensityModel(combine("pdf"), combine("d1"), combine("d2"), name,
                        sampler if can_sample else None,
                        {"family": "mixture", "weights": w.tolist(),
                         "components": [c.params for c in components]})


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    sample: CircularSample
    kernel: DirectionalKernel
    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError(f"bandwidth must be positive, got {self.h}")
        if len(self.sample) == 0:
            raise EmptySampleError("cannot estimate a density from an empty sample")

    @cached_property
    def normalizer(self) -> float:
        return normalizing_c(self.kernel, self.h, 0, 1).value

    def __call__(self, x):
        return density_at(self, x)


def _kernel_sums(angles: np.ndarray, kernel: DirectionalKernel, h: float, x: np.ndarray) -> np.ndarray:
    n = angles.size
    out = np.empty(x.size)
    step = max(1, _BLOCK // max(n, 1))
    for start in range(0, x.size, step):
        xs = x[start:start + step]
        s = chord_arg_angles(angles[None, :], xs[:, None], h)
        out[start:start + step] = kernel(s).sum(axis=1)
    return out


def density_at(est: DensityEstimate, x):
    """Evaluate the estimate at one angle or an array of angles."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vals = _kernel_sums(est.sample.angles, est.kernel, est.h, xs.ravel())
    vals = vals / (len(est.sample) * est.normalizer)
    if np.ndim(x) == 0:
        return float(vals[0])
    return vals.reshape(xs.shape)


def angle_grid(size: int = GRID_SIZE) -> np.ndarray:
    return -math.pi + TWO_PI * np.arange(size) / size


def integrated_squared_error(est: DensityEstimate, model: DensityModel, grid: int = GRID_SIZE) -> float:
    """Periodic trapezoid rule for ``int (f_h - f)^2`` on an equispaced grid."""
    g = angle_grid(grid)
    err = est(g) - model.pdf(g)
    return float(TWO_PI * np.mean(err * err))


def theoretical_bias(model: DensityModel, kernel: DirectionalKernel, h: float, x):
    """Leading bias ``(a_{1,1}/a_{0,1}) f''(x) h^2``."""
    ratio = moment_a(kernel, 1, 1).value / moment_a(kernel, 0, 1).value
    return ratio * model.d2(x) * h * h


def theoretical_variance(model: DensityModel, kernel: DirectionalKernel, h: float, n: int, x):
    """Leading variance ``2^{-3/2} (n h)^{-1} (a_{0,2}/a_{0,1}^2) f(x)``."""
    if n < 1 or not h > 0:
        raise DomainError("need n >= 1 and h > 0")
    const = 2.0**-1.5 * moment_a(kernel, 0, 2).value / moment_a(kernel, 0, 1).value ** 2
    return const * model.pdf(x) / (n * h)


def score_Sf(model: DensityModel) -> float:
    """Curvature score ``int_{-pi}^{pi} f''(t)^2 dt``."""
    def integrand(t):
        return float(model.d2(t)) ** 2

    pts = list(np.linspace(-math.pi, math.pi, 17)[1:-1])
    val, _ = integrate.quad(integrand, -math.pi, math.pi, points=pts,
                            epsabs=1e-14, epsrel=1e-11, limit=500)
    return float(val)


def _amise_constants(kernel: DirectionalKernel):
    a01 = moment_a(kernel, 0, 1).value
    a11 = moment_a(kernel, 1, 1).value
    a02 = moment_a(kernel, 0, 2).value
    return a01, a11, a02


def amise(score: float, kernel: DirectionalKernel, h, n: int):
    """Leading MISE terms ``h^4 (a11/a01)^2 S_f + 2^{-3/2} (nh)^{-1} a02/a01^2``."""
    a01, a11, a02 = _amise_constants(kernel)
    h = np.asarray(h, dtype=float)
    out = h**4 * (a11 / a01) ** 2 * score + 2.0**-1.5 * a02 / (a01**2 * n * h)
    return float(out) if out.ndim == 0 else out


def h_amise(score: float, kernel: DirectionalKernel, n: int) -> float:
    """Bandwidth minimizing :func:`amise`."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if not score > 0:
        raise DegenerateCurvatureError(
            f"curvature score S_f = {score}; the asymptotic MISE has no finite minimizer"
        )
    _, a11, a02 = _amise_constants(kernel)
    return 2.0**-0.7 * (a02 / (a11**2 * score)) ** 0.2 * n**-0.2


def _ise_rep(model, kernel, h, n, seed, rep, grid):
    rng = np.random.default_rng([seed, rep])
    est = DensityEstimate(model.sample(n, rng), kernel, h)
    return integrated_squared_error(est, model, grid)


def mise_empirical(model: DensityModel, kernel: DirectionalKernel, h: float, n: int, reps: int,
                   seed: int = 0, grid: int = GRID_SIZE, threads: Optional[int] = None) -> float:
    """Monte Carlo MISE: average ISE over ``reps`` independent samples.

    Replicate ``r`` uses the generator seeded by ``(seed, r)``, so the result
    does not depend on the number of worker threads.
    """
    if reps < 2:
        raise DomainError(f"reps must be at least 2, got {reps}")
    workers = worker_count(threads)
    args = [(model, kernel, h, n, seed, r, grid) for r in range(reps)]
    if workers == 1:
        ises = [_ise_rep(*a) for a in args]
    else:
        with ThreadPoolExecutor(workers) as pool:
            ises = list(pool.map(lambda a: _ise_rep(*a), args))
    return float(np.mean(ises))
