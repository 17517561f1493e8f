"""Algebraic membership and purity certificates, independent of the flow.

For a full traceless basis, non-negativity of the covariance-style matrix
M(x) = Z^k x_k + g - x x^T is an exact membership test (a strengthening of
the uncertainty relations).  Purity of a state is checked three equivalent
ways: quadratic coordinate conditions, characteristic-polynomial
coefficients via power sums, and vanishing 2x2 subdeterminants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    BasisSet,
    StructureTensors,
    ValidationError,
    check_density,
    coords_from_state,
    state_from_coords,
)

__all__ = [
    "PurityReport",
    "positivity_matrix",
    "is_member_positivity",
    "uncertainty_residual",
    "purity_report",
]

PURITY_TOL = 1e-8


def positivity_matrix(x, tensors: StructureTensors) -> np.ndarray:
    """M_ij(x) = Z^k_ij x_k + g_ij - x_i x_j; Hermitian, and non-negative
    exactly when x is the coordinate vector of a valid state."""
    x = np.asarray(x, dtype=float)
    K = tensors.gee.shape[0]
    if x.shape != (K,):
        raise ValidationError(f"coordinate vector has shape {x.shape}, expected ({K},)")
    M = np.tensordot(tensors.zee, x, axes=([2], [0])) + tensors.gee - np.outer(x, x)
    return 0.5 * (M + M.conj().T)


def is_member_positivity(x, tensors: StructureTensors, tol: float = 1e-9) -> bool:
    """Exact membership test for the full-basis expectation body."""
    lam = np.linalg.eigvalsh(positivity_matrix(x, tensors))
    return bool(lam[0] >= -tol)


def uncertainty_residual(rho, O1, O2) -> float:
    """Slack of the strengthened uncertainty bound; >= 0 for every valid state.

    (dO1)^2 (dO2)^2 - |<i[O1,O2]>/2|^2 - |<{O1,O2}>/2 - <O1><O2>|^2
    """
    R = check_density(rho)
    A = np.asarray(O1, dtype=np.complex128)
    B = np.asarray(O2, dtype=np.complex128)
    if A.shape != R.shape or B.shape != R.shape:
        raise ValidationError(
            f"operator dimensions {A.shape}, {B.shape} do not match state {R.shape}"
        )
    ea = np.trace(R @ A).real
    eb = np.trace(R @ B).real
    var_a = np.trace(R @ A @ A).real - ea * ea
    var_b = np.trace(R @ B @ B).real - eb * eb
    ab = np.trace(R @ A @ B)
    ba = np.trace(R @ B @ A)
    comm = abs(1j * (ab - ba) / 2.0) ** 2
    anti = abs((ab + ba) / 2.0 - ea * eb) ** 2
    return float(var_a * var_b - comm - anti)


@dataclass(frozen=True)
class PurityReport:
    """Residuals of the three equivalent pure-state characterizations."""

    r_quadratic: tuple[float, float]  # (norm condition, cubic coordinate condition)
    r_charpoly: np.ndarray  # |e_2|, ..., |e_N| from Newton's identities
    r_subdet: float  # max |2x2 subdeterminant| of rho
    tol: float

    @property
    def quadratic_pure(self) -> bool:
        return max(self.r_quadratic) < self.tol

    @property
    def charpoly_pure(self) -> bool:
        return float(np.max(self.r_charpoly)) < self.tol

    @property
    def subdet_pure(self) -> bool:
        return self.r_subdet < self.tol

    @property
    def verdict(self) -> str:
        pure = self.quadratic_pure and self.charpoly_pure and self.subdet_pure
        return "pure" if pure else "mixed"


def _charpoly_residuals(rho: np.ndarray) -> np.ndarray:
    # elementary symmetric polynomials of the spectrum via power sums and
    # Newton's identities; a pure state has e_1 = 1 and e_k = 0 for k >= 2
    N = rho.shape[0]
    power = rho.copy()
    p = [0.0] * (N + 1)
    for m in range(1, N + 1):
        p[m] = float(np.trace(power).real)
        power = power @ rho
    e = [1.0] + [0.0] * N
    for k in range(1, N + 1):
        acc = 0.0
        for m in range(1, k + 1):
            acc += (-1.0) ** (m - 1) * e[k - m] * p[m]
        e[k] = acc / k
    return np.abs(np.array(e[2:]))


def purity_report(state, basis: BasisSet, tensors: StructureTensors, tol: float = PURITY_TOL) -> PurityReport:
    """Evaluate all pure-state residual families for a state or its coordinates."""
    arr = np.asarray(state)
    if arr.ndim == 1:
        x = np.asarray(arr, dtype=float)
        rho = state_from_coords(x, basis)
    else:
        rho = check_density(arr)
        x = coords_from_state(rho, basis)
    N = basis.dim
    r_norm = abs(float(np.sum(x * x)) - (N - 1.0))
    cubic = np.einsum("abc,b,c->a", tensors.s, x, x)
    r_cubic = float(np.max(np.abs((1.0 - 2.0 / N) * x - cubic)))
    r_charpoly = _charpoly_residuals(rho)
    sub = np.einsum("ij,kl->ikjl", rho, rho) - np.einsum("il,kj->ikjl", rho, rho)
    r_subdet = float(np.max(np.abs(sub)))
    return PurityReport(
        r_quadratic=(r_norm, r_cubic),
        r_charpoly=r_charpoly,
        r_subdet=r_subdet,
        tol=tol,
    )
