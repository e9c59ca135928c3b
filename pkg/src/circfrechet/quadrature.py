"""Angle quadrature around a query point.

Population quantities such as ``E[L((1 - X'x)/h^2) g(X)]`` are integrals over
the offset ``t = X - x`` in ``[-pi, pi)``.  The kernel factor is concentrated
in ``|t| ~ h``, so the rule uses composite Gauss-Legendre panels with dyadic
breakpoints at ``h, 2h, 4h, ...`` and, for compact kernels, an exact break at
the window edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circle import canonical_angle, chord_arg_angles
from .errors import DomainError
from .kernel import DirectionalKernel, window_angle

NODES_PER_PANEL = 40


@lru_cache(maxsize=8)
def _gauss_legendre(m: int):
    return np.polynomial.legendre.leggauss(m)


@dataclass(frozen=True, eq=False)
class AngleRule:
    """Nodes ``theta = x + t`` with plain quadrature weights and kernel values."""

    theta: np.ndarray
    offset: np.ndarray
    weight: np.ndarray
    kernel_value: np.ndarray


def breakpoints(kernel: DirectionalKernel, h: float) -> np.ndarray:
    edges = [0.0]
    step = h
    while step < math.pi:
        edges.append(step)
        step *= 2.0
    edges.append(math.pi)
    theta_star = window_angle(kernel, h)
    if theta_star is not None and theta_star < math.pi:
        edges.append(theta_star)
    pos = np.unique(np.asarray(edges))
    return np.concatenate([-pos[::-1], pos[1:]])


def angle_rule(kernel: DirectionalKernel, h: float, x: float,
               nodes_per_panel: int = NODES_PER_PANEL) -> AngleRule:
    if not h > 0:
        raise DomainError(f"bandwidth must be positive, got {h}")
    g_nodes, g_weights = _gauss_legendre(nodes_per_panel)
    edges = breakpoints(kernel, h)
    a, b = edges[:-1, None], edges[1:, None]
    t = (0.5 * (b - a) * g_nodes + 0.5 * (a + b)).ravel()
    w = (0.5 * (b - a) * g_weights).ravel()
    lv = kernel(chord_arg_angles(t, 0.0, h))
    return AngleRule(canonical_angle(x + t), t, w, lv)
