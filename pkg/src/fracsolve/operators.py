"""SPD operators, model Laplacians and the dense spectral oracle.

The oracle (full symmetric eigendecomposition) is the ground truth used by
every verification in this package: it evaluates arbitrary spectral powers
of an operator and the associated weighted norms exactly, at desk scale.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

DEFAULT_ORACLE_CAP = 4096


class OracleCapError(ValueError):
    """Raised when a dense eigendecomposition is requested above the cap."""


@dataclass(frozen=True)
class SpdOperator:
    """Matrix-free symmetric positive definite operator with known spectral bounds."""

    dim: int
    apply: Callable[[np.ndarray], np.ndarray]
    spectral_lower: float
    spectral_upper: float
    structure_tag: str = "dense"
    # dense matrix kept when cheaply available; the oracle falls back to
    # applying the operator to the identity otherwise
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"operator dimension must be positive, got {self.dim}")
        if not (0.0 < self.spectral_lower <= self.spectral_upper):
            raise ValueError(
                f"need 0 < spectral_lower <= spectral_upper, got "
                f"[{self.spectral_lower}, {self.spectral_upper}]"
            )

    def as_matrix(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        cols = [self.apply(e) for e in np.eye(self.dim)]
        return np.column_stack(cols)


@dataclass(frozen=True)
class Eigenpairs:
    """Full eigendecomposition of an SpdOperator: ascending values, orthonormal vectors."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.values) < 0):
            raise ValueError("eigenvalues must be ascending")


@dataclass(frozen=True)
class FracPowerSpec:
    """Fractional power exponent and the spectral shift used by shifted forms."""

    alpha: float
    delta: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.delta <= 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")


def laplacian_1d_eigenvalues(n: int) -> np.ndarray:
    """Eigenvalues (4/h^2) sin^2(k pi h / 2) of the Dirichlet 1D Laplacian."""
    h = 1.0 / (n + 1)
    k = np.arange(1, n + 1)
    return (4.0 / h**2) * np.sin(k * np.pi * h / 2.0) ** 2


def build_laplacian_1d(n_interior: int) -> SpdOperator:
    """Standard (1/h^2) tridiag(-1, 2, -1) Dirichlet Laplacian on (0,1)."""
    if n_interior < 1:
        raise ValueError(f"n_interior must be >= 1, got {n_interior}")
    h = 1.0 / (n_interior + 1)
    lam = laplacian_1d_eigenvalues(n_interior)
    inv_h2 = 1.0 / h**2

    def apply(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = 2.0 * v.copy()
        out[:-1] -= v[1:]
        out[1:] -= v[:-1]
        return inv_h2 * out

    return SpdOperator(
        dim=n_interior,
        apply=apply,
        spectral_lower=float(lam[0]),
        spectral_upper=float(lam[-1]),
        structure_tag="tridiagonal",
    )


def build_laplacian_2d(nx: int, ny: int) -> SpdOperator:
    """5-point Dirichlet Laplacian on the unit square, hx = 1/(nx+1), hy = 1/(ny+1)."""
    if nx < 1 or ny < 1:
        raise ValueError(f"grid dimensions must be >= 1, got ({nx}, {ny})")
    lx = laplacian_1d_eigenvalues(nx)
    ly = laplacian_1d_eigenvalues(ny)
    inv_hx2 = float(nx + 1) ** 2
    inv_hy2 = float(ny + 1) ** 2

    def apply(v: np.ndarray) -> np.ndarray:
        g = np.asarray(v, dtype=float).reshape(ny, nx)
        out = 2.0 * (inv_hx2 + inv_hy2) * g
        out[:, :-1] -= inv_hx2 * g[:, 1:]
        out[:, 1:] -= inv_hx2 * g[:, :-1]
        out[:-1, :] -= inv_hy2 * g[1:, :]
        out[1:, :] -= inv_hy2 * g[:-1, :]
        return out.reshape(-1)

    return SpdOperator(
        dim=nx * ny,
        apply=apply,
        spectral_lower=float(lx[0] + ly[0]),
        spectral_upper=float(lx[-1] + ly[-1]),
        structure_tag="pentadiagonal-2d",
    )


def build_diagonal(values) -> SpdOperator:
    """Diagonal SPD operator from strictly positive entries (test workhorse)."""
    d = np.asarray(values, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("need a nonempty 1D array of diagonal entries")
    if np.any(d <= 0):
        raise ValueError("diagonal entries must be strictly positive")
    return SpdOperator(
        dim=d.size,
        apply=lambda v: d * np.asarray(v, dtype=float),
        spectral_lower=float(d.min()),
        spectral_upper=float(d.max()),
        structure_tag="diagonal",
        matrix=np.diag(d),
    )


def build_dense(matrix, spectral_lower: float, spectral_upper: float) -> SpdOperator:
    """Wrap a dense symmetric matrix; spectral bounds must be supplied by the caller."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"need a square matrix, got shape {a.shape}")
    return SpdOperator(
        dim=a.shape[0],
        apply=lambda v: a @ np.asarray(v, dtype=float),
        spectral_lower=spectral_lower,
        spectral_upper=spectral_upper,
        structure_tag="dense",
        matrix=a,
    )


def oracle_cap() -> int:
    return int(os.environ.get("FRACSOLVE_ORACLE_CAP", DEFAULT_ORACLE_CAP))


def spectral_oracle(op: SpdOperator, cap: int | None = None) -> Eigenpairs:
    """Dense eigendecomposition of op; refuses dimensions above the cap."""
    limit = oracle_cap() if cap is None else cap
    if op.dim > limit:
        raise OracleCapError(
            f"oracle restricted to dim <= {limit}, operator has dim {op.dim}"
        )
    values, vectors = scipy.linalg.eigh(op.as_matrix())
    return Eigenpairs(values=values, vectors=vectors)


def oracle_apply_function(eig: Eigenpairs, alpha_signed: float, v: np.ndarray) -> np.ndarray:
    """Apply the spectral power A^alpha_signed to v exactly through the eigenbasis."""
    if np.any(eig.values <= 0):
        raise ValueError("spectral powers require strictly positive eigenvalues")
    coeffs = eig.vectors.T @ np.asarray(v, dtype=float)
    return eig.vectors @ (eig.values**alpha_signed * coeffs)


def d_norm(eig: Eigenpairs, power: float, v: np.ndarray) -> float:
    """Weighted norm (sum_k lambda_k^power <v, psi_k>^2)^(1/2); power=0 is Euclidean."""
    if np.any(eig.values <= 0):
        raise ValueError("weighted norms require strictly positive eigenvalues")
    coeffs = eig.vectors.T @ np.asarray(v, dtype=float)
    return float(np.sqrt(np.sum(eig.values**power * coeffs**2)))
