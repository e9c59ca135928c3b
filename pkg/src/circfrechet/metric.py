"""Response spaces and the weighted Fréchet mean.

A space knows how to validate a collection of points, compute squared
distances in bulk and, where one exists, produce the exact minimizer of
``sum_i w_i d^2(y_i, y)``.  Otherwise the minimizer is searched over a finite
candidate set (sample points first, then an optional grid) and the lowest
candidate index wins ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats
from scipy.optimize import isotonic_regression

from .circle import TWO_PI, canonical_angle
from .errors import DegenerateWeightsError, DomainError, InvalidPointError, PayloadTypeError

__all__ = [
    "MetricSpace",
    "EuclideanReal",
    "CircleArc",
    "Wasserstein1D",
    "FrechetEstimate",
    "get_space",
    "distance",
    "weighted_frechet_mean",
    "normal_quantiles",
    "default_levels",
]

# candidate-by-sample block size for objective evaluation
_BLOCK = 4_000_000


class MetricSpace:
    """Base class; subclasses fill in the geometry."""

    name = "abstract"
    diameter_bound: Optional[float] = None

    def as_points(self, points) -> np.ndarray:
        raise NotImplementedError

    def as_point(self, y):
        raise NotImplementedError

    def take(self, points: np.ndarray, i: int):
        return self.as_point(points[i])

    def sq_dist_matrix(self, candidates: np.ndarray, points: np.ndarray) -> np.ndarray:
        """``D[a, i] = d^2(candidates[a], points[i])``."""
        raise NotImplementedError

    def sq_distances(self, points, y) -> np.ndarray:
        pts = self.as_points(points)
        cand = self.as_points(self._lift(self.as_point(y)))
        return self.sq_dist_matrix(cand, pts)[0]

    def _lift(self, y):
        return np.asarray(y, dtype=float)[None, ...]

    def distance(self, y1, y2) -> float:
        d2 = self.sq_distances(self._lift(self.as_point(y1)), y2)[0]
        return math.sqrt(max(float(d2), 0.0))

    def closed_form_mean(self, points: np.ndarray, weights: np.ndarray):
        """Exact minimizer, or ``None`` when only search applies."""
        return None

    def grid(self) -> Optional[np.ndarray]:
        return None

    def candidate_set(self, points: np.ndarray) -> np.ndarray:
        g = self.grid()
        if g is None:
            return points
        return np.concatenate([points, g], axis=0)

    def max_sq_distance(self, points) -> float:
        pts = self.as_points(points)
        best = 0.0
        step = max(1, _BLOCK // max(len(pts), 1))
        for start in range(0, len(pts), step):
            best = max(best, float(np.max(self.sq_dist_matrix(pts[start:start + step], pts))))
        return best

    def __repr__(self):
        return f"{type(self).__name__}()"


def _numeric(points, what) -> np.ndarray:
    try:
        arr = np.asarray(points, dtype=float)
    except (TypeError, ValueError):
        raise PayloadTypeError(f"{what} payload must be numeric") from None
    if not np.all(np.isfinite(arr)):
        raise InvalidPointError(f"{what} payload contains non-finite values")
    return arr


class EuclideanReal(MetricSpace):
    """``R^dim`` with the Euclidean distance.

    For ``dim == 1`` a collection is a 1-d array and a point is a float.
    """

    name = "euclidean"

    def __init__(self, dim: int = 1, diameter_bound: Optional[float] = None):
        if dim < 1:
            raise DomainError("dimension must be at least 1")
        self.dim = int(dim)
        self.diameter_bound = diameter_bound

    def as_points(self, points):
        arr = _numeric(points, "EuclideanReal")
        if self.dim == 1:
            if arr.ndim == 2 and arr.shape[1] == 1:
                arr = arr[:, 0]
            if arr.ndim != 1:
                raise PayloadTypeError(f"scalar EuclideanReal points must be 1-d, got shape {arr.shape}")
        elif arr.ndim != 2 or arr.shape[1] != self.dim:
            raise PayloadTypeError(f"expected shape (n, {self.dim}), got {arr.shape}")
        return arr

    def as_point(self, y):
        arr = _numeric(y, "EuclideanReal")
        if self.dim == 1:
            if arr.size != 1:
                raise PayloadTypeError(f"scalar EuclideanReal point expected, got shape {arr.shape}")
            return float(arr.reshape(()))
        if arr.shape != (self.dim,):
            raise PayloadTypeError(f"expected a point of shape ({self.dim},), got {arr.shape}")
        return arr

    def sq_dist_matrix(self, candidates, points):
        if self.dim == 1:
            return (candidates[:, None] - points[None, :]) ** 2
        diff = candidates[:, None, :] - points[None, :, :]
        return np.einsum("abk,abk->ab", diff, diff)

    def closed_form_mean(self, points, weights):
        total = math.fsum(weights)
        if not total > 1e-14 * math.fsum(np.abs(weights)):
            raise DegenerateWeightsError(
                f"weights sum to {total:g}; the weighted squared-distance objective has no minimizer"
            )
        if self.dim == 1:
            return float(np.dot(weights, points) / total)
        return weights @ points / total

    def __repr__(self):
        return f"EuclideanReal(dim={self.dim})"


class CircleArc(MetricSpace):
    """The circle with the geodesic (arc length) distance; points are angles."""

    name = "circle"
    diameter_bound = math.pi

    def __init__(self, grid_resolution: Optional[int] = None):
        if grid_resolution is not None and grid_resolution < 1:
            raise DomainError("grid resolution must be positive")
        self.grid_resolution = grid_resolution

    def as_points(self, points):
        arr = _numeric(points, "CircleArc")
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        if arr.ndim != 1:
            raise PayloadTypeError(f"CircleArc points must be angles, got shape {arr.shape}")
        return canonical_angle(arr)

    def as_point(self, y):
        arr = _numeric(y, "CircleArc")
        if arr.size != 1:
            raise PayloadTypeError(f"CircleArc point must be a single angle, got shape {arr.shape}")
        return canonical_angle(float(arr.reshape(())))

    def sq_dist_matrix(self, candidates, points):
        d = canonical_angle(candidates[:, None] - points[None, :])
        return d * d

    def grid(self):
        if self.grid_resolution is None:
            return None
        return -math.pi + TWO_PI * np.arange(self.grid_resolution) / self.grid_resolution

    def __repr__(self):
        return f"CircleArc(grid_resolution={self.grid_resolution})"


def default_levels(size: int = 101) -> np.ndarray:
    """Equispaced probability levels from 0.005 to 0.995 (for ``size=101``)."""
    if size < 2:
        raise DomainError("need at least two quantile levels")
    half_step = 0.5 / (size - 1)
    return np.linspace(half_step, 1.0 - half_step, size)


def normal_quantiles(mean: float, sd: float, levels=None) -> np.ndarray:
    levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
    return mean + sd * stats.norm.ppf(levels)


class Wasserstein1D(MetricSpace):
    """One-dimensional distributions as quantile vectors on fixed levels.

    The distance is the root-mean-square difference of quantile vectors, a
    discretized 2-Wasserstein distance.
    """

    name = "wasserstein"

    def __init__(self, levels=None, size: int = 101, diameter_bound: Optional[float] = None):
        self.levels = default_levels(size) if levels is None else np.asarray(levels, dtype=float)
        if self.levels.ndim != 1 or np.any(np.diff(self.levels) <= 0):
            raise DomainError("quantile levels must be strictly increasing")
        self.size = self.levels.size
        self.diameter_bound = diameter_bound

    def _check_monotone(self, arr, offset=0):
        bad = np.nonzero(np.any(np.diff(arr, axis=-1) < 0, axis=-1))[0]
        if bad.size:
            raise InvalidPointError(f"non-monotone quantiles, row {int(bad[0]) + offset}")

    def as_points(self, points):
        arr = _numeric(points, "Wasserstein1D")
        if arr.ndim != 2 or arr.shape[1] != self.size:
            raise PayloadTypeError(f"expected quantile rows of length {self.size}, got shape {arr.shape}")
        self._check_monotone(arr)
        return arr

    def as_point(self, y):
        arr = _numeric(y, "Wasserstein1D")
        if arr.shape != (self.size,):
            raise PayloadTypeError(f"expected a quantile vector of length {self.size}, got shape {arr.shape}")
        if np.any(np.diff(arr) < 0):
            raise InvalidPointError("non-monotone quantiles")
        return arr

    def sq_dist_matrix(self, candidates, points):
        # ||a - b||^2 via the expansion would lose precision for close rows
        out = np.empty((len(candidates), len(points)))
        for a, c in enumerate(candidates):
            diff = points - c
            out[a] = np.einsum("ik,ik->i", diff, diff) / self.size
        return out

    def closed_form_mean(self, points, weights):
        total = math.fsum(weights)
        if np.all(weights >= 0):
            return weights @ points / total
        if total > 1e-14 * math.fsum(np.abs(weights)):
            # sum w_i ||q_i - q||^2 = total * ||q - qbar||^2 + const, so the
            # minimizer over monotone vectors is the isotonic projection of qbar
            qbar = weights @ points / total
            return isotonic_regression(qbar).x
        return None

    def __repr__(self):
        return f"Wasserstein1D(size={self.size})"


_SPACES = {"euclidean": EuclideanReal, "circle": CircleArc, "wasserstein": Wasserstein1D}


def get_space(name: str, **kwargs) -> MetricSpace:
    try:
        cls = _SPACES[name.lower()]
    except KeyError:
        raise DomainError(f"unknown space {name!r}; expected euclidean, circle or wasserstein") from None
    return cls(**kwargs)


def distance(space: MetricSpace, y1, y2) -> float:
    return space.distance(y1, y2)


@dataclass(frozen=True, eq=False)
class FrechetEstimate:
    minimizer: object
    objective: float
    candidates_evaluated: int
    runner_up_gap: float
    index: Optional[int] = None


def _objectives(space, candidates, points, weights):
    out = np.empty(len(candidates))
    step = max(1, _BLOCK // max(len(points), 1))
    for start in range(0, len(candidates), step):
        block = space.sq_dist_matrix(candidates[start:start + step], points)
        out[start:start + step] = block @ weights
    return out


def weighted_frechet_mean(space: MetricSpace, points, weights, candidates=None,
                          method: str = "auto") -> FrechetEstimate:
    """Minimize ``sum_i w_i d^2(points[i], y)`` over ``y``.

    Parameters
    ----------
    candidates : array, optional
        Explicit search set; implies ``method="search"``.
    method : {"auto", "search"}
        ``auto`` uses the space's exact minimizer when it has one.
    """
    pts = space.as_points(points)
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size != len(pts):
        raise DomainError(f"got {w.size} weights for {len(pts)} points")
    if len(pts) == 0:
        raise DegenerateWeightsError("no points")
    if not np.all(np.isfinite(w)):
        raise DomainError("weights must be finite")
    if not np.any(w != 0):
        raise DegenerateWeightsError("all weights are zero")
    if method not in ("auto", "search"):
        raise DomainError(f"unknown method {method!r}")

    if candidates is None and method == "auto":
        y = space.closed_form_mean(pts, w)
        if y is not None:
            obj = float(np.dot(space.sq_distances(pts, y), w))
            return FrechetEstimate(y, obj, 1, math.inf, None)

    cand = space.candidate_set(pts) if candidates is None else space.as_points(candidates)
    obj = _objectives(space, cand, pts, w)
    best = int(np.argmin(obj))
    if len(obj) > 1:
        gap = float(np.partition(obj, 1)[1] - obj[best])
    else:
        gap = math.inf
    return FrechetEstimate(space.take(cand, best), float(obj[best]), len(cand), gap, best)
