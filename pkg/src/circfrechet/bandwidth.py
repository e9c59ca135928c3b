"""Bandwidth selection: AMISE plug-in for densities, leave-one-out CV.

Cross-validation leaves out groups of identical (angle, response) pairs
rather than single rows, so duplicating every observation leaves the CV
curve unchanged.
"""

from __future__ import annotations

import enum
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circle import CircularSample, TWO_PI
from .errors import (
    DegenerateCurvatureError,
    DomainError,
    EmptyWindowError,
    NoValidBandwidthError,
    SingularDesignError,
)
from .frechet_lc import PairedSample, lc_estimate
from .frechet_ll import ll_estimate
from .kde import DensityEstimate, angle_grid, density_at, h_amise
from .kernel import DirectionalKernel, normalizing_c
from .metric import MetricSpace
from .parallel import worker_count

__all__ = [
    "GridScale",
    "BandwidthGrid",
    "CVResult",
    "plugin_bandwidth",
    "curvature_score_estimate",
    "cv_bandwidth_frechet",
    "cv_bandwidth_density",
]

PILOT_GRID = 512
MIN_SCORE = 1e-12


class GridScale(enum.Enum):
    LOG = "log"
    LINEAR = "lin"


@dataclass(frozen=True, eq=False)
class BandwidthGrid:
    values: np.ndarray
    scale: GridScale = GridScale.LOG

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if v.ndim != 1 or v.size == 0:
            raise DomainError("bandwidth grid must be a non-empty list")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise DomainError("bandwidths must be positive and finite")
        if np.any(np.diff(v) <= 0):
            raise DomainError("bandwidth grid must be strictly increasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    @classmethod
    def make(cls, lo: float, hi: float, num: int, scale: GridScale | str = GridScale.LOG) -> "BandwidthGrid":
        scale = GridScale(scale)
        if num < 1 or not 0 < lo <= hi:
            raise DomainError(f"bad grid range {lo}:{hi} with {num} points")
        if num == 1:
            return cls(np.array([lo]), scale)
        vals = np.geomspace(lo, hi, num) if scale is GridScale.LOG else np.linspace(lo, hi, num)
        return cls(vals, scale)

    @classmethod
    def parse(cls, text: str) -> "BandwidthGrid":
        """Parse ``"lo:hi:NUM[log|lin]"`` or a comma-separated list."""
        m = re.fullmatch(r"\s*([^:]+):([^:]+):(\d+)\s*(log|lin)?\s*", text)
        try:
            if m:
                return cls.make(float(m.group(1)), float(m.group(2)), int(m.group(3)), m.group(4) or "log")
            return cls(np.array([float(t) for t in text.split(",")]), GridScale.LINEAR)
        except ValueError:
            raise DomainError(f"cannot parse bandwidth grid {text!r}") from None


@dataclass(frozen=True, eq=False)
class CVResult:
    selected_h: float
    grid: BandwidthGrid
    scores: np.ndarray
    failures: np.ndarray

    def to_dict(self) -> dict:
        return {
            "selected_h": self.selected_h,
            "scores": [{"h": float(h), "cv": float(s), "failed_folds": int(f)}
                       for h, s, f in zip(self.grid.values, self.scores, self.failures)],
        }


def _second_difference_energy(f: np.ndarray, step: float) -> float:
    d2 = (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / step**2
    return float(step * np.sum(d2 * d2))


def curvature_score_estimate(sample: CircularSample, kernel: DirectionalKernel, pilot_h: float,
                             grid: int = PILOT_GRID, drop_diagonal: bool = True) -> float:
    """``int f''^2`` of a pilot estimate, by periodic second differences.

    With ``drop_diagonal`` the self-pair terms of the squared sum, which do
    not depend on the density and are pure noise of size ``O(1/(n h^5))``,
    are subtracted.  Near-uniform data then give a score near zero.
    """
    theta = angle_grid(grid)
    step = TWO_PI / grid
    n = len(sample)
    score = _second_difference_energy(density_at(DensityEstimate(sample, kernel, pilot_h), theta), step)
    if drop_diagonal:
        # one bump centred on a grid node; the grid contains angle 0
        bump = density_at(DensityEstimate(CircularSample([0.0]), kernel, pilot_h), theta)
        score -= _second_difference_energy(bump, step) / n
    return score


def plugin_bandwidth(sample: CircularSample, kernel: DirectionalKernel, pilot_h: float | None = None) -> float:
    """AMISE-optimal bandwidth with the curvature score taken from a pilot KDE.

    Parameters
    ----------
    pilot_h : float, optional
        Pilot bandwidth; defaults to ``n^{-1/7}``, the rate that balances
        bias and variance when estimating a second-derivative functional.
    """
    n = len(sample)
    if n < 10:
        raise DomainError(f"plug-in bandwidth needs at least 10 observations, got {n}")
    if pilot_h is None:
        pilot_h = n ** (-1.0 / 7.0)
    score = curvature_score_estimate(sample, kernel, pilot_h)
    if not score >= MIN_SCORE:
        raise DegenerateCurvatureError(
            f"estimated curvature score {score:.3g} is below {MIN_SCORE:g}; data look uniform"
        )
    return h_amise(score, kernel, n)


def _duplicate_groups(space: MetricSpace, sample: PairedSample):
    """Index arrays of exactly identical (angle, response) rows, in first-seen order."""
    resp = space.as_points(sample.responses)
    rows = np.column_stack([sample.angles, resp.reshape(len(resp), -1)])
    _, first, inverse = np.unique(rows, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(first, kind="stable")
    return [np.nonzero(inverse == g)[0] for g in order]


def _default_penalty(space: MetricSpace, sample: PairedSample) -> float:
    if space.diameter_bound is not None:
        return float(space.diameter_bound) ** 2
    return space.max_sq_distance(sample.responses)


def cv_bandwidth_frechet(space: MetricSpace, sample: PairedSample, kernel: DirectionalKernel,
                         grid: BandwidthGrid, estimator: str = "lc", penalty: float | None = None,
                         threads: int | None = None) -> CVResult:
    """Leave-one-out CV over a bandwidth grid for the LC or LL estimator.

    ``CV(h) = n^{-1} sum_i d^2(Y_i, m_h^{(-i)}(X_i))``.  A fold whose fit fails
    (empty window, singular design) contributes ``penalty``, by default the
    squared diameter bound or else the largest observed squared distance.
    The lowest-index minimizer is returned.
    """
    n = len(sample)
    if n < 20:
        raise DomainError(f"cross-validation needs at least 20 observations, got {n}")
    if not isinstance(grid, BandwidthGrid):
        grid = BandwidthGrid(grid)
    est_fn = {"lc": lc_estimate, "ll": ll_estimate}.get(str(estimator).lower())
    if est_fn is None:
        raise DomainError(f"unknown estimator {estimator!r}; expected lc or ll")
    pen = _default_penalty(space, sample) if penalty is None else float(penalty)
    groups = _duplicate_groups(space, sample)
    resp = space.as_points(sample.responses)
    held_out = [np.setdiff1d(np.arange(n), g, assume_unique=True) for g in groups]

    def fold_losses(h):
        losses = np.empty(len(groups))
        failed = np.zeros(len(groups), dtype=bool)
        for k, (g, rest) in enumerate(zip(groups, held_out)):
            i = g[0]
            try:
                if rest.size == 0:
                    raise EmptyWindowError("no observations left")
                fit = est_fn(space, sample.subset(rest), kernel, h, float(sample.angles[i]))
                losses[k] = space.sq_distances(resp[g[:1]], fit.minimizer)[0] * g.size
            except (EmptyWindowError, SingularDesignError):
                losses[k] = pen * g.size
                failed[k] = True
        return losses, failed

    with ThreadPoolExecutor(worker_count(threads)) as pool:
        results = list(pool.map(fold_losses, grid.values))
    scores = np.array([math.fsum(l) / n for l, _ in results])
    failures = np.array([int(f.sum()) for _, f in results])
    if np.all(failures == len(groups)):
        raise NoValidBandwidthError("every bandwidth failed on every fold")
    best = int(np.argmin(scores))
    assert np.all(scores[best] <= scores)
    return CVResult(float(grid.values[best]), grid, scores, failures)


def cv_bandwidth_density(sample: CircularSample, kernel: DirectionalKernel, grid: BandwidthGrid,
                         quad_grid: int = 1024) -> CVResult:
    """Least-squares cross-validation ``int fhat^2 - 2/n sum_i fhat_{-i}(X_i)``."""
    n = len(sample)
    if n < 2:
        raise DomainError("density cross-validation needs at least two observations")
    if not isinstance(grid, BandwidthGrid):
        grid = BandwidthGrid(grid)
    theta = angle_grid(quad_grid)
    angles = sample.angles
    scores = np.empty(len(grid))
    for a, h in enumerate(grid.values):
        est = DensityEstimate(sample, kernel, h)
        f = density_at(est, theta)
        sq = TWO_PI * float(np.mean(f * f))
        c0 = normalizing_c(kernel, h, 0, 1).value
        full = density_at(est, angles) * n * c0
        loo = (full - kernel(0.0)) / ((n - 1) * c0)
        scores[a] = sq - 2.0 * math.fsum(loo) / n
    best = int(np.argmin(scores))
    return CVResult(float(grid.values[best]), grid, scores, np.zeros(len(grid), dtype=int))
