"""Forward Gibbs map: partition function, thermal state, expectation map,
and its spectral Jacobian.

All quantities at a query point beta derive from a single eigendecomposition
of M = sum_i beta_i O_i (the dominant O(N^3) cost).  Exponentials are shifted
by the minimum eigenvalue before exponentiation so nothing overflows as the
flow drives |beta| toward the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .linalg import (
    NumericalError,
    OperatorSet,
    ValidationError,
    check_density,
    degeneracy_threshold,
)

__all__ = [
    "ThermalPoint",
    "thermal_point",
    "log_partition",
    "gibbs_state",
    "expectation_map",
    "jacobian",
    "expectation_and_jacobian",
    "entropy",
]

BETA_NORM_CAP = 1e6


@dataclass(frozen=True)
class ThermalPoint:
    """Shared spectral data for all Gibbs-map quantities at one beta.

    lam holds the eigenvalues of M = sum_i beta_i O_i (ascending), weights
    the shifted Boltzmann factors exp(-(lam - lam[0])), and modes[i] the
    matrix elements of O_i in the eigenbasis.
    """

    beta: np.ndarray
    lam: np.ndarray
    vectors: np.ndarray
    modes: np.ndarray
    weights: np.ndarray
    z_shifted: float
    log_z: float
    expectations: np.ndarray
    saturated: bool


def _check_beta(beta, S: OperatorSet) -> np.ndarray:
    b = np.asarray(beta, dtype=float)
    if b.shape != (S.n,):
        raise ValidationError(f"beta has shape {b.shape}, expected ({S.n},)")
    if not np.all(np.isfinite(b)):
        raise NumericalError(f"beta is not finite: {b}")
    return b


def thermal_point(beta, S: OperatorSet) -> ThermalPoint:
    b = _check_beta(beta, S)
    M = np.tensordot(b, S.ops, axes=1)
    # M is Hermitian by construction and every derived quantity is invariant
    # under eigenvector phases, so skip the validated eig_hermitian path here
    # (this runs once per flow step and dominates small-N overhead)
    try:
        lam, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise NumericalError(f"eigensolver failed to converge: {exc}") from exc
    shift = lam[0]
    weights = np.exp(-(lam - shift))
    z_shifted = float(weights.sum())
    log_z = float(-shift + np.log(z_shifted))
    modes = np.matmul(V.conj().T, np.matmul(S.ops, V))
    diag = np.diagonal(modes, axis1=1, axis2=2).real
    exps = diag @ weights / z_shifted
    return ThermalPoint(
        beta=b,
        lam=lam,
        vectors=V,
        modes=modes,
        weights=weights,
        z_shifted=z_shifted,
        log_z=log_z,
        expectations=exps,
        saturated=bool(np.linalg.norm(b) > BETA_NORM_CAP),
    )


def log_partition(beta, S: OperatorSet) -> float:
    """ln tr exp(-sum_i beta_i O_i), log-sum-exp stabilized."""
    return thermal_point(beta, S).log_z


def gibbs_state(beta, S: OperatorSet) -> np.ndarray:
    """rho_beta = exp(-sum_i beta_i O_i) / Z; strictly positive."""
    pt = thermal_point(beta, S)
    p = pt.weights / pt.z_shifted
    return (pt.vectors * p) @ pt.vectors.conj().T


def expectation_map(beta, S: OperatorSet) -> np.ndarray:
    """E_i(beta) = tr(O_i rho_beta) = -d ln Z / d beta_i."""
    return thermal_point(beta, S).expectations


def _jacobian_at(pt: ThermalPoint) -> np.ndarray:
    lam_shifted = pt.lam - pt.lam[0]
    tol = degeneracy_threshold(pt.lam)
    H = _kernels.h_matrix(lam_shifted, tol)
    return _kernels.jacobian_from_modes(pt.modes, H, pt.z_shifted, pt.expectations)


def jacobian(beta, S: OperatorSet) -> np.ndarray:
    """Spectral Jacobian J_ij = dE_j / d beta_i; symmetric negative definite."""
    return _jacobian_at(thermal_point(beta, S))


def expectation_and_jacobian(beta, S: OperatorSet) -> tuple[np.ndarray, np.ndarray]:
    """E and J from one shared eigendecomposition (one flow step's worth)."""
    pt = thermal_point(beta, S)
    return pt.expectations, _jacobian_at(pt)


def entropy(rho) -> float:
    """von Neumann entropy -sum p ln p, with 0 ln 0 = 0."""
    R = check_density(rho)
    p = np.linalg.eigvalsh(R)
    p = p[p > 0.0]
    return float(-np.sum(p * np.log(p)))
