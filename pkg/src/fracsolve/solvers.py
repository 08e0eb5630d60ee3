"""Conjugate-gradient solves of (b I + c A) w = rhs with certified error bounds.

The stopping rule converts the prescribed solution accuracy eps into a residual
target through the SPD error-residual inequality
    ||w_approx - w_exact|| <= ||residual|| / lambda_min(b I + c A),
with lambda_min >= b + c*delta, so every successful solve carries a certificate
that the returned bound actually holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import SpdOperator

#: residual reduction used when a caller requests an "exact" solve (eps = 0)
MACHINE_RTOL = 1e-14


@dataclass(frozen=True)
class ShiftedSolveResult:
    solution: np.ndarray
    iterations: int
    final_error_bound: float


class ShiftedSolveError(RuntimeError):
    """Iteration cap exceeded; carries the best iterate and the achieved bound."""

    def __init__(self, message: str, best: np.ndarray, achieved_bound: float,
                 iterations: int):
        super().__init__(message)
        self.best = best
        self.achieved_bound = achieved_bound
        self.iterations = iterations


@dataclass(frozen=True)
class ToleranceSchedule:
    """Per-shift inner-solve accuracies eps_i = eps0 / (b_i + delta)."""

    eps0: float
    per_shift: np.ndarray


def make_tolerance_schedule(eps0: float, delta: float, shifts) -> ToleranceSchedule:
    if eps0 <= 0:
        raise ValueError(f"eps0 must be positive, got {eps0}")
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    b = np.asarray(shifts, dtype=float)
    if np.any(b < 0):
        raise ValueError("shifts must be nonnegative")
    return ToleranceSchedule(eps0=eps0, per_shift=eps0 / (b + delta))


def cg_affine(op: SpdOperator, b: float, c: float, rhs: np.ndarray,
              residual_target: float, maxiter: int | None = None) -> tuple[np.ndarray, int, float]:
    """CG on (b I + c A) x = rhs down to ||r|| <= residual_target.

    Returns (solution, iterations, final residual norm). b + c*delta > 0 is
    required for definiteness; c >= 0.
    """
    lam_min = b + c * op.spectral_lower
    if lam_min <= 0 or c < 0:
        raise ValueError(
            f"(b + c*delta) must be positive (b={b}, c={c}, delta={op.spectral_lower})"
        )
    rhs = np.asarray(rhs, dtype=float)
    n = op.dim
    cap = 10 * n if maxiter is None else maxiter

    def matvec(v):
        out = c * op.apply(v)
        if b != 0.0:
            out = out + b * v
        return out

    x = np.zeros_like(rhs)
    r = rhs.copy()
    rnorm = float(np.linalg.norm(r))
    if rnorm <= residual_target:
        return x, 0, rnorm
    p = r.copy()
    rs = rnorm**2
    for it in range(1, cap + 1):
        ap = matvec(p)
        denom = float(p @ ap)
        if denom <= 0:
            raise ValueError("operator is not positive definite on the Krylov space")
        alpha = rs / denom
        x = x + alpha * p
        r = r - alpha * ap
        rs_new = float(r @ r)
        rnorm = np.sqrt(rs_new)
        if rnorm <= residual_target:
            # recomputed (not recursively updated) residual guards the certificate
            r_true = rhs - matvec(x)
            rnorm = float(np.linalg.norm(r_true))
            if rnorm <= residual_target:
                return x, it, rnorm
            r = r_true
            rs_new = rnorm**2
            p = r.copy()
            rs = rs_new
            continue
        beta = rs_new / rs
        rs = rs_new
        p = r + beta * p
    return x, cap + 1, rnorm  # caller decides whether to raise


def solve_affine(op: SpdOperator, b: float, c: float, rhs: np.ndarray,
                 eps: float) -> ShiftedSolveResult:
    """Solve (b I + c A) w = rhs with certified ||w - w*|| <= eps * ||rhs||.

    eps = 0 requests a machine-tolerance solve.
    """
    rhs = np.asarray(rhs, dtype=float)
    rhs_norm = float(np.linalg.norm(rhs))
    lam_min = b + c * op.spectral_lower
    if rhs_norm == 0.0:
        return ShiftedSolveResult(np.zeros_like(rhs), 0, 0.0)
    eps_eff = eps if eps > 0 else MACHINE_RTOL
    target = eps_eff * lam_min * rhs_norm
    x, it, rnorm = cg_affine(op, b, c, rhs, target)
    bound = rnorm / (lam_min * rhs_norm)
    if it > 10 * op.dim:
        # machine-tolerance requests may stagnate a hair above the target;
        # accept as long as the certificate is still far below any eps a
        # caller could meaningfully request
        if eps == 0 and bound <= 1e-10:
            return ShiftedSolveResult(solution=x, iterations=it, final_error_bound=bound)
        raise ShiftedSolveError(
            f"CG failed to reach eps={eps_eff:g} within {10 * op.dim} iterations "
            f"(achieved bound {bound:g})",
            best=x, achieved_bound=bound, iterations=it,
        )
    return ShiftedSolveResult(solution=x, iterations=it, final_error_bound=bound)


def solve_shifted(op: SpdOperator, shift: float, rhs: np.ndarray,
                  eps_i: float) -> ShiftedSolveResult:
    """Solve (shift I + A) w = rhs to the certified accuracy eps_i (0 = machine)."""
    if shift + op.spectral_lower <= 0:
        raise ValueError(f"shift + delta must be positive, got {shift + op.spectral_lower}")
    if eps_i < 0:
        raise ValueError(f"eps_i must be nonnegative, got {eps_i}")
    return solve_affine(op, shift, 1.0, rhs, eps_i)
