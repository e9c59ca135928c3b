"""Synthetic regression models used by tests, the harness and the CLI."""

from __future__ import annotations

import numpy as np
from scipy import stats

from .circle import canonical_angle
from .errors import DomainError
from .frechet_lc import RegressionModel
from .kde import DensityModel, mixture_density, uniform_density, von_mises_density
from .metric import CircleArc, EuclideanReal, Wasserstein1D

__all__ = [
    "sine_model",
    "wasserstein_model",
    "circle_response_model",
    "density_from_spec",
    "model_from_spec",
]


def sine_model(kappa: float = 1.0, noise_sd: float = 0.0, mu: float = 0.0,
               predictor: DensityModel | None = None) -> RegressionModel:
    """``Y = sin(X) + N(0, noise_sd^2)`` with von Mises predictors on the real line."""
    pred = von_mises_density(mu, kappa) if predictor is None else predictor

    def noise(resp, rng):
        return resp + noise_sd * rng.standard_normal(resp.shape)

    return RegressionModel(
        predictor=pred, truth=np.sin, space=EuclideanReal(1),
        noise=noise if noise_sd > 0 else None, noise_variance=noise_sd**2,
        name="sine", params={"kappa": kappa, "mu": mu, "noise_sd": noise_sd},
    )


def wasserstein_model(kappa: float = 1.0, sd: float = 1.0, shift_sd: float = 0.0,
                      size: int = 101) -> RegressionModel:
    """Normal distributions ``N(sin(X) + eps, sd^2)`` stored as quantile vectors.

    A random mean shift ``eps ~ N(0, shift_sd^2)`` translates every quantile,
    so ``E[d^2(Y, y) | X] = d^2(m(X), y) + shift_sd^2``.
    """
    space = Wasserstein1D(size=size)
    z = stats.norm.ppf(space.levels)

    def truth(theta):
        theta = np.asarray(theta, dtype=float)
        return np.sin(theta)[:, None] + sd * z[None, :]

    def noise(resp, rng):
        return resp + shift_sd * rng.standard_normal(len(resp))[:, None]

    return RegressionModel(
        predictor=von_mises_density(0.0, kappa), truth=truth, space=space,
        noise=noise if shift_sd > 0 else None, noise_variance=shift_sd**2,
        name="wasserstein", params={"kappa": kappa, "sd": sd, "shift_sd": shift_sd},
    )


def circle_response_model(kappa: float = 1.0, noise_kappa: float = 0.0,
                          grid_resolution: int = 720) -> RegressionModel:
    """Angular responses ``Y = X/2 + noise`` on the circle.

    With von Mises noise the conditional objective has no closed form, so
    the model is not flagged as a location family.
    """
    def truth(theta):
        return canonical_angle(0.5 * np.asarray(theta, dtype=float))

    def noise(resp, rng):
        return canonical_angle(resp + rng.vonmises(0.0, noise_kappa, len(resp)))

    return RegressionModel(
        predictor=von_mises_density(0.0, kappa), truth=truth,
        space=CircleArc(grid_resolution), noise=noise if noise_kappa > 0 else None,
        location_family=noise_kappa <= 0, name="circle",
        params={"kappa": kappa, "noise_kappa": noise_kappa},
    )


def density_from_spec(spec) -> DensityModel:
    """Build a density from ``"von_mises:mu:kappa"``, ``"uniform"`` or a dict.

    Dicts use ``{"type": "von_mises", "mu": .., "kappa": ..}`` or
    ``{"type": "mixture", "components": [...], "weights": [...]}``.
    """
    if isinstance(spec, DensityModel):
        return spec
    if isinstance(spec, str):
        parts = spec.split(":")
        kind = parts[0].lower()
        try:
            nums = [float(p) for p in parts[1:]]
        except ValueError:
            raise DomainError(f"bad density spec {spec!r}") from None
        if kind in ("von_mises", "vonmises", "vm"):
            if len(nums) > 2:
                raise DomainError(f"bad density spec {spec!r}")
            mu, kappa = nums + [0.0, 1.0][len(nums):]
            return von_mises_density(mu, kappa)
        if kind == "uniform" and not nums:
            return uniform_density()
        raise DomainError(f"bad density spec {spec!r}")
    if isinstance(spec, dict):
        kind = str(spec.get("type", "")).lower()
        if kind in ("von_mises", "vonmises", "vm"):
            return von_mises_density(float(spec.get("mu", 0.0)), float(spec.get("kappa", 1.0)))
        if kind == "uniform":
            return uniform_density()
        if kind == "mixture":
            comps = [density_from_spec(c) for c in spec["components"]]
            return mixture_density(comps, spec["weights"])
    raise DomainError(f"bad density spec {spec!r}")


def model_from_spec(spec) -> RegressionModel:
    """Build a regression model from a dict ``{"type": "sine", ...}``."""
    if isinstance(spec, RegressionModel):
        return spec
    if isinstance(spec, str):
        spec = {"type": spec}
    if not isinstance(spec, dict):
        raise DomainError(f"bad model spec {spec!r}")
    kind = str(spec.get("type", "")).lower()
    kw = {k: v for k, v in spec.items() if k != "type"}
    try:
        if kind == "sine":
            pred = kw.pop("predictor", None)
            if pred is not None:
                kw["predictor"] = density_from_spec(pred)
            return sine_model(**kw)
        if kind == "wasserstein":
            return wasserstein_model(**kw)
        if kind == "circle":
            return circle_response_model(**kw)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {kind} model: {exc}") from None
    raise DomainError(f"unknown model type {kind!r}; expected sine, wasserstein or circle")
