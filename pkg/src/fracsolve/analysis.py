"""Error measurement: scalar sup-error scans and bound verification.

The scalar accuracy eps of an approximant is a sampled supremum over
log-spaced points of [delta, Lambda] plus any supplied eigenvalues, never a
proved one; every inequality check reports both sides and applies a 1e-10
relative slack for floating-point summation noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .operators import Eigenpairs, d_norm

INEQ_SLACK = 1e-10


@dataclass(frozen=True)
class ScalarErrorEstimate:
    eps_abs: float
    eps_rel: float
    interval: tuple[float, float]
    samples: int
    eps_log: float | None = None


@dataclass(frozen=True)
class BoundCheckReport:
    lhs: float
    rhs: float
    satisfied: bool
    context: str


def _report(lhs: float, rhs: float, context: str) -> BoundCheckReport:
    return BoundCheckReport(lhs=lhs, rhs=rhs,
                            satisfied=lhs <= rhs * (1.0 + INEQ_SLACK),
                            context=context)


def sample_points(interval: tuple[float, float],
                  eigenvalues: Sequence[float] | None,
                  n_samples: int) -> np.ndarray:
    lo, hi = interval
    if not (0 < lo <= hi):
        raise ValueError(f"invalid spectral interval {interval}")
    if n_samples < 2:
        raise ValueError(f"need at least 2 samples, got {n_samples}")
    pts = [np.geomspace(lo, hi, n_samples), np.array([lo, hi])]
    if eigenvalues is not None:
        pts.append(np.asarray(eigenvalues, dtype=float))
    return np.unique(np.concatenate(pts))


def scan_scalar_error(evaluator: Callable[[np.ndarray], np.ndarray], alpha: float,
                      interval: tuple[float, float],
                      eigenvalues: Sequence[float] | None = None,
                      n_samples: int = 10_000,
                      log_evaluator: Callable[[np.ndarray], np.ndarray] | None = None,
                      ) -> ScalarErrorEstimate:
    """Sampled sup of |r(lambda) - lambda^(-alpha)|, absolute and relative.

    log_evaluator, when given, is the rational log approximation s(lambda);
    its sup deviation from alpha*log(lambda) is reported as eps_log.
    """
    lam = sample_points(interval, eigenvalues, n_samples)
    try:
        r = np.asarray(evaluator(lam), dtype=float)
    except Exception as exc:
        raise RuntimeError(f"evaluator failed on the scan grid: {exc}") from exc
    exact = lam ** (-alpha)
    err = np.abs(r - exact)
    eps_log = None
    if log_evaluator is not None:
        s = np.asarray(log_evaluator(lam), dtype=float)
        eps_log = float(np.max(np.abs(s - alpha * np.log(lam))))
    return ScalarErrorEstimate(
        eps_abs=float(np.max(err)),
        eps_rel=float(np.max(err / exact)),
        interval=(float(interval[0]), float(interval[1])),
        samples=lam.size,
        eps_log=eps_log,
    )


def evaluator_apply(evaluator: Callable[[np.ndarray], np.ndarray], eig: Eigenpairs,
                    phi: np.ndarray) -> np.ndarray:
    """Exact operator application of a scalar map through the eigenbasis."""
    coeffs = eig.vectors.T @ np.asarray(phi, dtype=float)
    r = np.asarray(evaluator(eig.values), dtype=float)
    return eig.vectors @ (r * coeffs)


def check_estimate_11(evaluator: Callable[[np.ndarray], np.ndarray], eig: Eigenpairs,
                      alpha: float, phi: np.ndarray, norm_power: float,
                      eps_abs: float | None = None,
                      n_samples: int = 10_000) -> BoundCheckReport:
    """Absolute-error propagation ||u~ - u*||_D <= eps_abs * ||phi||_D for
    D = A^norm_power (norm_power 0 and alpha realize the paper's two cases)."""
    interval = (float(eig.values[0]), float(eig.values[-1]))
    if eps_abs is None:
        eps_abs = scan_scalar_error(evaluator, alpha, interval,
                                    eigenvalues=eig.values,
                                    n_samples=n_samples).eps_abs
    u_star = evaluator_apply(lambda lam: lam ** (-alpha), eig, phi)
    u_tilde = evaluator_apply(evaluator, eig, phi)
    lhs = d_norm(eig, norm_power, u_tilde - u_star)
    rhs = eps_abs * d_norm(eig, norm_power, phi)
    return _report(lhs, rhs, f"estimate-11(D=A^{norm_power:g})")


def check_estimates_13_14(evaluator: Callable[[np.ndarray], np.ndarray],
                          eig: Eigenpairs, alpha: float, phi: np.ndarray,
                          eps_rel: float | None = None,
                          n_samples: int = 10_000,
                          ) -> tuple[BoundCheckReport, BoundCheckReport]:
    """Relative-error propagation: the pair of weighted-norm bounds
    ||u~-u*||_{A^alpha} <= eps ||phi||_{A^-alpha} and
    ||u~-u*|| <= eps ||phi||_{A^-2alpha}."""
    interval = (float(eig.values[0]), float(eig.values[-1]))
    if eps_rel is None:
        eps_rel = scan_scalar_error(evaluator, alpha, interval,
                                    eigenvalues=eig.values,
                                    n_samples=n_samples).eps_rel
    u_star = evaluator_apply(lambda lam: lam ** (-alpha), eig, phi)
    u_tilde = evaluator_apply(evaluator, eig, phi)
    diff = u_tilde - u_star
    first = _report(d_norm(eig, alpha, diff),
                    eps_rel * d_norm(eig, -alpha, phi), "estimate-13")
    second = _report(d_norm(eig, 0.0, diff),
                     eps_rel * d_norm(eig, -2.0 * alpha, phi), "estimate-14")
    return first, second


def check_theorem(theorem_id: int, solution: np.ndarray, eig: Eigenpairs,
                  alpha: float, phi: np.ndarray, eps: float,
                  eps0: float | None) -> BoundCheckReport:
    """Composite bound for an inexact pipeline run.

    Theorems 1 and 2 share the budget (eps + eps0*(delta^-alpha + eps))*||phi||;
    theorem 3 reads eps as the log-scan sup eps1 and uses
    eps0*||phi|| + (exp(eps1)-1)*||phi||_{A^-2alpha}.
    """
    if eps0 is None:
        raise ValueError("theorem checks need a certified inner budget eps0")
    phi = np.asarray(phi, dtype=float)
    u_star = evaluator_apply(lambda lam: lam ** (-alpha), eig, phi)
    lhs = float(np.linalg.norm(np.asarray(solution) - u_star))
    delta = float(eig.values[0])
    if theorem_id in (1, 2):
        rhs = (eps + eps0 * (delta ** (-alpha) + eps)) * float(np.linalg.norm(phi))
    elif theorem_id == 3:
        rhs = eps0 * float(np.linalg.norm(phi)) \
            + math.expm1(eps) * d_norm(eig, -2.0 * alpha, phi)
    else:
        raise ValueError(f"unknown theorem id {theorem_id}")
    return _report(lhs, rhs, f"theorem-{theorem_id}")
