"""Directional kernels on the circle and their moment constants.

A directional kernel is a non-increasing profile ``L : [0, inf) -> [0, inf)``
applied to the scaled chord argument ``(1 - cos(theta)) / h**2``.  Three
families have closed-form moments; arbitrary profiles are accepted as
``Custom`` kernels and handled by quadrature.
"""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import DomainError, IntegrabilityError

__all__ = [
    "KernelFamily",
    "DirectionalKernel",
    "KernelMoment",
    "NormalizingConstant",
    "von_mises_kernel",
    "exponential_kernel",
    "uniform_kernel",
    "custom_kernel",
    "get_kernel",
    "eval_kernel",
    "moment_a",
    "normalizing_c",
    "lambda_h",
    "check_condition_l1",
]

EPSREL = 1e-10
TAIL_FRACTION = 1e-14
MAX_DOUBLINGS = 60


class KernelFamily(enum.Enum):
    VON_MISES = "von_mises"
    EXPONENTIAL = "exponential"
    UNIFORM = "uniform"
    CUSTOM = "custom"


def _von_mises_profile(s):
    return np.exp(-s)


def _exponential_profile(s):
    return np.exp(-np.sqrt(s))


def _uniform_profile(s):
    return np.where(s <= 1.0, 1.0, 0.0)


@dataclass(frozen=True)
class DirectionalKernel:
    """A kernel profile ``L(s)`` together with its family tag.

    ``scale`` multiplies the profile; named families keep their tag under
    scaling so closed-form moments stay available.
    """

    family: KernelFamily
    profile: Callable[[np.ndarray], np.ndarray]
    support_bound: Optional[float] = None
    scale: float = 1.0
    name: str = ""

    def __call__(self, s):
        return eval_kernel(self, s)

    def scaled(self, c: float) -> "DirectionalKernel":
        if not c > 0:
            raise DomainError(f"kernel scale must be positive, got {c}")
        return replace(self, scale=self.scale * c)

    @property
    def label(self) -> str:
        return self.name or self.family.value


def von_mises_kernel() -> DirectionalKernel:
    return DirectionalKernel(KernelFamily.VON_MISES, _von_mises_profile, name="von_mises")


def exponential_kernel() -> DirectionalKernel:
    return DirectionalKernel(KernelFamily.EXPONENTIAL, _exponential_profile, name="exponential")


def uniform_kernel() -> DirectionalKernel:
    return DirectionalKernel(
        KernelFamily.UNIFORM, _uniform_profile, support_bound=1.0, name="uniform"
    )


def custom_kernel(profile, support_bound=None, name="custom") -> DirectionalKernel:
    """Wrap a vectorized profile ``s -> L(s)`` as a kernel.

    The profile must be non-increasing and non-negative; see
    :func:`check_condition_l1`.  ``support_bound`` is the ``s`` beyond which
    the profile vanishes, if any.
    """
    return DirectionalKernel(KernelFamily.CUSTOM, profile, support_bound, 1.0, name)


_NAMED = {
    "von_mises": von_mises_kernel,
    "vonmises": von_mises_kernel,
    "exponential": exponential_kernel,
    "uniform": uniform_kernel,
}


def get_kernel(name: str) -> DirectionalKernel:
    try:
        return _NAMED[name.lower()]()
    except KeyError:
        raise DomainError(
            f"unknown kernel {name!r}; expected one of von_mises, exponential, uniform"
        ) from None


def eval_kernel(kernel: DirectionalKernel, s):
    """Evaluate ``L(s)``; scalar in, scalar out."""
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("kernel argument must be non-negative")
    out = kernel.scale * np.asarray(kernel.profile(arr), dtype=float)
    if np.ndim(s) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class KernelMoment:
    j: int
    k: int
    value: float
    source: str  # "closed_form" or "quadrature"


@dataclass(frozen=True)
class NormalizingConstant:
    h: float
    j: int
    k: int
    value: float


def _check_jk(j, k):
    if int(j) != j or j < 0:
        raise DomainError(f"moment order j must be a non-negative integer, got {j}")
    if k not in (1, 2):
        raise DomainError(f"kernel power k must be 1 or 2, got {k}")


def _double_factorial(m: int) -> int:
    # (-1)!! = 1
    return math.prod(range(m, 0, -2)) if m > 0 else 1


def _closed_form_moment(kernel: DirectionalKernel, j: int, k: int) -> Optional[float]:
    fam = kernel.family
    if fam is KernelFamily.VON_MISES:
        df = _double_factorial(2 * j - 1)
        base = df / 2 ** (j + 1) * math.sqrt(math.pi) if k == 1 else df / 2 ** (2 * j + 1) * math.sqrt(math.pi / 2)
    elif fam is KernelFamily.EXPONENTIAL:
        base = math.factorial(2 * j) if k == 1 else math.factorial(2 * j) / 2 ** (2 * j + 1)
    elif fam is KernelFamily.UNIFORM:
        base = 1.0 / (2 * j + 1)
    else:
        return None
    return base * kernel.scale**k


def _quad(fn, a, b, points=None, epsabs=0.0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        pts = None
        if points is not None:
            pts = [p for p in points if a < p < b] or None
        val, err, info = integrate.quad(
            fn, a, b, epsabs=epsabs, epsrel=EPSREL, limit=500, points=pts, full_output=1
        )[:3]
    if not np.isfinite(val):
        raise IntegrabilityError(f"quadrature on [{a}, {b}] did not produce a finite value")
    return val, err


def _quadrature_moment(kernel: DirectionalKernel, j: int, k: int) -> float:
    def integrand(r):
        return float(eval_kernel(kernel, r * r)) ** k * r ** (2 * j)

    if kernel.support_bound is not None:
        rmax = math.sqrt(kernel.support_bound)
        val, _ = _quad(integrand, 0.0, rmax)
        if not val > 0:
            raise IntegrabilityError("kernel moment is not positive")
        return val

    lo, hi = 0.0, 1.0
    total = 0.0
    for _ in range(MAX_DOUBLINGS):
        panel, _ = _quad(integrand, lo, hi, epsabs=1e-300)
        total += panel
        if lo > 0 and total > 0 and abs(panel) < TAIL_FRACTION * total:
            return total
        lo, hi = hi, 2 * hi
    raise IntegrabilityError(
        f"a_{{{j},{k}}} tail did not become negligible up to R={lo:g}; "
        "kernel does not look integrable"
    )


def moment_a(kernel: DirectionalKernel, j: int, k: int, method: Optional[str] = None) -> KernelMoment:
    """Kernel moment ``a_{j,k}(L) = int_0^inf L^k(r^2) r^{2j} dr``.

    Parameters
    ----------
    method : {None, "closed_form", "quadrature"}
        ``None`` picks the closed form for named families and quadrature
        otherwise.
    """
    _check_jk(j, k)
    j = int(j)
    if method not in (None, "closed_form", "quadrature"):
        raise DomainError(f"unknown moment method {method!r}")
    if method != "quadrature":
        value = _closed_form_moment(kernel, j, k)
        if value is not None:
            return KernelMoment(j, k, value, "closed_form")
        if method == "closed_form":
            raise DomainError(f"no closed form for {kernel.label} kernel")
    return KernelMoment(j, k, _quadrature_moment(kernel, j, k), "quadrature")


def window_angle(kernel: DirectionalKernel, h: float) -> Optional[float]:
    """Angle beyond which the kernel window is empty, or None."""
    if kernel.support_bound is None:
        return None
    t = h * h * kernel.support_bound
    return math.pi if t >= 2.0 else math.acos(1.0 - t)


def _dyadic_points(scale, upper, count=14):
    return [scale * 2.0**m for m in range(count) if scale * 2.0**m < upper]


@functools.lru_cache(maxsize=4096)
def _c_value(kernel: DirectionalKernel, h: float, j: int, k: int) -> float:
    theta_star = window_angle(kernel, h)
    if kernel.family is KernelFamily.UNIFORM:
        # indicator window: integrand is scale^k * theta^j on [0, theta*]
        return 2.0 * kernel.scale**k * theta_star ** (j + 1) / (j + 1)

    def integrand(theta):
        s = 2.0 * math.sin(0.5 * theta) ** 2 / (h * h)
        return float(eval_kernel(kernel, s)) ** k * theta**j

    upper = math.pi if theta_star is None else theta_star
    val, _ = _quad(integrand, 0.0, upper, points=_dyadic_points(h, upper))
    return 2.0 * val


def normalizing_c(kernel: DirectionalKernel, h: float, j: int, k: int) -> NormalizingConstant:
    """``c_{h,j,k}(L) = int_{-pi}^{pi} L^k((1 - cos t)/h^2) t^j dt``.

    Odd ``j`` returns exactly zero without integrating.
    """
    _check_jk(j, k)
    if not h > 0:
        raise DomainError(f"bandwidth must be positive, got {h}")
    j = int(j)
    if j % 2 == 1:
        return NormalizingConstant(float(h), j, k, 0.0)
    return NormalizingConstant(float(h), j, k, _c_value(kernel, float(h), j, k))


def lambda_h(kernel: DirectionalKernel, h: float, j: int, k: int) -> float:
    """``lambda_{h,j,k}(L) = int_0^{sqrt2/h} L^k(r^2) r^{2j} (2 - h^2 r^2)^{-1/2} dr``.

    Computed after substituting ``r = (sqrt2/h) sin(u)``, which turns the
    inverse-square-root endpoint singularity into a bounded integrand on
    ``[0, pi/2]``.
    """
    _check_jk(j, k)
    if not h > 0:
        raise DomainError(f"bandwidth must be positive, got {h}")
    j = int(j)
    rscale = math.sqrt(2.0) / h

    def integrand(u):
        r = rscale * math.sin(u)
        return float(eval_kernel(kernel, r * r)) ** k * r ** (2 * j) / h

    upper = 0.5 * math.pi
    if kernel.support_bound is not None:
        upper = math.asin(min(1.0, math.sqrt(kernel.support_bound) / rscale))
    points = [math.asin(min(1.0, m / rscale)) for m in _dyadic_points(1.0, rscale)]
    val, _ = _quad(integrand, 0.0, upper, points=points)
    return val


def check_condition_l1(kernel: DirectionalKernel, s_max: float = 50.0, num: int = 4001,
                       max_order: int = 4) -> None:
    """Raise :class:`DomainError` unless the kernel looks admissible.

    Checks non-negativity and monotonicity on a grid, then that every moment
    ``a_{j,k}`` with ``j <= max_order`` is finite and positive.
    """
    s = np.linspace(0.0, s_max, num)
    vals = eval_kernel(kernel, s)
    if np.any(vals < 0):
        raise DomainError(f"{kernel.label} kernel takes negative values")
    if np.any(np.diff(vals) > 1e-15 * max(1.0, float(np.max(vals)))):
        raise DomainError(f"{kernel.label} kernel is not non-increasing")
    for j in range(max_order + 1):
        for k in (1, 2):
            m = moment_a(kernel, j, k, method="quadrature")
            if not (0 < m.value < math.inf):
                raise IntegrabilityError(f"a_{{{j},{k}}} = {m.value} is not in (0, inf)")
