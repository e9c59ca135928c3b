"""Geometry of the unit circle.

Angles in ``[-pi, pi)`` are the storage format; unit vectors are built on
demand.  ``rotate(x, t)`` is the counter-clockwise rotation of ``x`` by ``t``
and ``angle_between`` is its inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, EmptySampleError

__all__ = [
    "UNIT_TOL",
    "canonical_angle",
    "angle_diff",
    "unit_vector",
    "angle_of",
    "rotate",
    "angle_between",
    "chord_arg",
    "chord_arg_angles",
    "CircularSample",
    "sample_von_mises",
    "circular_mean",
    "mean_resultant_length",
]

UNIT_TOL = 1e-12
TWO_PI = 2.0 * math.pi


def canonical_angle(theta):
    """Map angles to the half-open range ``[-pi, pi)``."""
    t = np.asarray(theta, dtype=float)
    out = np.mod(t + math.pi, TWO_PI) - math.pi
    # mod can round up to exactly 2*pi for tiny negative inputs
    out = np.where(out >= math.pi, -math.pi, out)
    if np.ndim(theta) == 0:
        return float(out)
    return out


def angle_diff(theta, x):
    """Signed angle from ``x`` to ``theta``, i.e. ``Phi_x^{-1}`` in angle form."""
    return canonical_angle(np.asarray(theta, dtype=float) - x)


def unit_vector(theta) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


def _as_unit(x, name="x") -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape[-1:] != (2,):
        raise DomainError(f"{name} must be a 2-vector")
    norm2 = np.sum(v * v, axis=-1)
    if np.any(np.abs(norm2 - 1.0) > 1e-10):
        raise DomainError(f"{name} is not on the unit circle (|{name}|^2 = {norm2})")
    return v


def angle_of(x) -> float:
    v = _as_unit(x)
    return canonical_angle(np.arctan2(v[..., 1], v[..., 0]))


def rotate(x, theta) -> np.ndarray:
    """``x cos(theta) + (R x) sin(theta)`` with ``R`` the quarter-turn matrix."""
    v = _as_unit(x)
    rx = np.stack([-v[..., 1], v[..., 0]], axis=-1)
    t = np.asarray(theta, dtype=float)[..., None]
    return v * np.cos(t) + rx * np.sin(t)


def angle_between(x, z):
    """The unique ``theta`` in ``[-pi, pi)`` with ``rotate(x, theta) == z``.

    The antipode maps to ``-pi``.
    """
    v = _as_unit(x, "x")
    w = _as_unit(z, "z")
    cos_t = np.sum(v * w, axis=-1)
    sin_t = v[..., 0] * w[..., 1] - v[..., 1] * w[..., 0]
    return canonical_angle(np.arctan2(sin_t, cos_t))


def chord_arg(x, z, h: float):
    """``(1 - <z, x>) / h**2`` for unit vectors."""
    if not h > 0:
        raise DomainError(f"bandwidth must be positive, got {h}")
    return chord_arg_angles(angle_between(x, z), 0.0, h)


def chord_arg_angles(theta, x, h: float):
    """Chord argument between angles ``theta`` and query angle ``x``.

    Uses ``1 - cos(d) = 2 sin(d/2)^2``, which keeps full relative precision
    for nearby angles.
    """
    if not h > 0:
        raise DomainError(f"bandwidth must be positive, got {h}")
    d = np.asarray(theta, dtype=float) - x
    out = 2.0 * np.sin(0.5 * d) ** 2 / (h * h)
    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True, eq=False)
class CircularSample:
    """Observed angles, canonicalized on construction."""

    angles: np.ndarray
    seed: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.angles, dtype=float))
        if a.ndim != 1:
            raise DomainError("angles must be one-dimensional")
        if not np.all(np.isfinite(a)):
            raise DomainError("angles must be finite")
        a = canonical_angle(a)
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    def __len__(self):
        return self.angles.size

    def require_nonempty(self):
        if self.angles.size == 0:
            raise EmptySampleError("sample has no observations")
        return self

    def rotated(self, alpha: float) -> "CircularSample":
        return CircularSample(self.angles + alpha, self.seed)


def _best_fisher(kappa: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Best & Fisher (1979) rejection sampler for von Mises(0, kappa)."""
    tau = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho * rho) / (2.0 * rho)
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = max(16, int(1.4 * (n - filled)))
        u1, u2, u3 = rng.random((3, m))
        z = np.cos(math.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        with np.errstate(divide="ignore", invalid="ignore"):
            ok = (c * (2.0 - c) - u2 > 0) | (np.log(c / u2) + 1.0 - c >= 0)
        draws = np.sign(u3[ok] - 0.5) * np.arccos(np.clip(f[ok], -1.0, 1.0))
        take = min(draws.size, n - filled)
        out[filled:filled + take] = draws[:take]
        filled += take
    return out


def sample_von_mises(mu: float, kappa: float, n: int, seed=None, rng=None) -> CircularSample:
    """Draw ``n`` i.i.d. von Mises(mu, kappa) angles.

    Either an integer ``seed`` or an explicit ``rng`` may be given; no global
    random state is touched.  ``kappa = 0`` is the uniform law.
    """
    if kappa < 0:
        raise DomainError(f"kappa must be non-negative, got {kappa}")
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if rng is None:
        rng = np.random.default_rng(seed)
    if kappa < 1e-8:
        draws = rng.uniform(-math.pi, math.pi, n)
    else:
        draws = _best_fisher(float(kappa), int(n), rng)
    return CircularSample(draws + mu, seed)


def circular_mean(angles) -> float:
    a = np.asarray(angles, dtype=float)
    return canonical_angle(math.atan2(np.mean(np.sin(a)), np.mean(np.cos(a))))


def mean_resultant_length(angles) -> float:
    a = np.asarray(angles, dtype=float)
    return float(math.hypot(np.mean(np.cos(a)), np.mean(np.sin(a))))
