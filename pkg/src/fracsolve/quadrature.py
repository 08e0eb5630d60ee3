"""Quadrature rules feeding the approximant constructors.

Gaussian rules (Legendre, Jacobi with weight (1-x)^(-alpha) (1+x)^(alpha-1),
generalized Laguerre with weight x^(alpha-1) e^(-delta x)) come from the
Golub-Welsch eigenproblem as implemented by scipy.special; the truncated
trapezoid rule in the log variable and the graded midpoint rule are direct.
All rules carry strictly increasing nodes and strictly positive weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.special


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    domain: str

    def __post_init__(self):
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("quadrature nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be strictly positive")


def gauss_legendre(m: int) -> QuadratureRule:
    """m-point Gauss-Legendre rule on (-1, 1)."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    x, w = np.polynomial.legendre.leggauss(m)
    return QuadratureRule(nodes=x, weights=w, domain="interval(-1,1)")


def gauss_legendre_01(m: int) -> QuadratureRule:
    """Gauss-Legendre rule mapped to (0, 1)."""
    base = gauss_legendre(m)
    return QuadratureRule(
        nodes=(base.nodes + 1.0) / 2.0,
        weights=base.weights / 2.0,
        domain="interval(0,1)",
    )


def gauss_jacobi(m: int, alpha: float) -> QuadratureRule:
    """Gaussian rule on (-1,1) for the weight (1-x)^(-alpha) (1+x)^(alpha-1)."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    x, w = scipy.special.roots_jacobi(m, -alpha, alpha - 1.0)
    return QuadratureRule(nodes=x, weights=w, domain="interval(-1,1)")


def gauss_laguerre_generalized(m: int, alpha: float, delta: float) -> QuadratureRule:
    """Gaussian rule on (0, inf) for the weight x^(alpha-1) e^(-delta x).

    Standard generalized Laguerre rule with parameter alpha-1, nodes scaled
    by 1/delta and weights by delta^(-alpha).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    x, w = scipy.special.roots_genlaguerre(m, alpha - 1.0)
    return QuadratureRule(
        nodes=x / delta,
        weights=w * delta ** (-alpha),
        domain="half_line",
    )


def midpoint_01(m: int) -> QuadratureRule:
    """Uniform midpoint rule on (0, 1)."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    i = np.arange(1, m + 1)
    return QuadratureRule(
        nodes=(i - 0.5) / m,
        weights=np.full(m, 1.0 / m),
        domain="interval(0,1)",
    )


def log_trapezoid(m: int, step: float) -> QuadratureRule:
    """Symmetric truncated trapezoid rule in the log variable.

    m odd equispaced nodes j*step, j = -(m-1)/2 .. (m-1)/2, weight = step.
    """
    if m < 1 or m % 2 == 0:
        raise ValueError(f"m must be a positive odd integer, got {m}")
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    half = (m - 1) // 2
    j = np.arange(-half, half + 1)
    L = half * step
    return QuadratureRule(
        nodes=j * step,
        weights=np.full(m, step),
        domain=f"real_line_truncated({L:g})",
    )


def graded_midpoint(m: int, alpha: float, t_max: float) -> QuadratureRule:
    """Midpoint rule on (0, t_max) with cells graded as t_max*(i/m)^(1/alpha).

    The grading equidistributes the t^(alpha-1) endpoint singularity.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if t_max <= 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    edges = t_max * (np.arange(m + 1) / m) ** (1.0 / alpha)
    return QuadratureRule(
        nodes=(edges[:-1] + edges[1:]) / 2.0,
        weights=np.diff(edges),
        domain=f"interval(0,{t_max:g})",
    )
