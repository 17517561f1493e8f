"""Hot numeric kernels for the spectral Gibbs-map formulas.

Two lanes are provided: numba @njit kernels (default when numba imports)
and pure-numpy fallbacks.  Set EXPECTATION_ATLAS_NO_NUMBA=1 to force the
numpy lane; benchmarks/benchmark_kernels.py compares the two.

The kernels consume shifted eigenvalues lam (lam - lam_min, so the
exponentials never overflow) of M = sum_i beta_i O_i and the operator
matrix elements A_i = V^dag O_i V in the eigenbasis.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["USE_NUMBA", "h_matrix", "jacobian_from_modes"]

_DISABLED = os.environ.get("EXPECTATION_ATLAS_NO_NUMBA", "").lower() in ("1", "true", "yes")


def h_matrix_numpy(lam: np.ndarray, deg_tol: float) -> np.ndarray:
    """Divided-difference kernel H[m, n] = (e^{-lam_m} - e^{-lam_n}) / (lam_n - lam_m),
    with the analytic limit e^{-(lam_m + lam_n)/2} on (near-)degenerate pairs."""
    w = np.exp(-lam)
    diff = lam[np.newaxis, :] - lam[:, np.newaxis]  # lam_n - lam_m
    degenerate = np.abs(diff) < deg_tol
    safe = np.where(degenerate, 1.0, diff)
    H = (w[:, np.newaxis] - w[np.newaxis, :]) / safe
    mid = np.exp(-0.5 * (lam[:, np.newaxis] + lam[np.newaxis, :]))
    return np.where(degenerate, mid, H)


def jacobian_from_modes_numpy(A: np.ndarray, H: np.ndarray, Z: float, E: np.ndarray) -> np.ndarray:
    """J_ij = -(1/Z) sum_{m,n} A_i[m,n] conj(A_j[m,n]) H[m,n] + E_i E_j."""
    n = A.shape[0]
    J = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            val = float(np.sum(A[i] * np.conj(A[j]) * H).real)
            J[i, j] = J[j, i] = -val / Z + E[i] * E[j]
    return J


USE_NUMBA = False
if not _DISABLED:
    try:
        from numba import njit, prange

        USE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

if USE_NUMBA:

    @njit(cache=True)
    def _h_matrix_nb(lam, deg_tol):
        N = lam.shape[0]
        w = np.exp(-lam)
        H = np.empty((N, N))
        for m in range(N):
            for n in range(N):
                d = lam[n] - lam[m]
                if abs(d) < deg_tol:
                    H[m, n] = np.exp(-0.5 * (lam[m] + lam[n]))
                else:
                    H[m, n] = (w[m] - w[n]) / d
        return H

    @njit(cache=True, parallel=True)
    def _mode_overlap_nb(A, H):
        # parallelize over eigenbasis rows; pair sums are reduced afterwards
        nops = A.shape[0]
        N = A.shape[1]
        npairs = nops * (nops + 1) // 2
        partial = np.zeros((N, npairs))
        for m in prange(N):
            p = 0
            for i in range(nops):
                for j in range(i, nops):
                    acc = 0.0
                    for n in range(N):
                        a = A[i, m, n]
                        b = A[j, m, n]
                        acc += (a.real * b.real + a.imag * b.imag) * H[m, n]
                    partial[m, p] = acc
                    p += 1
        return partial.sum(axis=0)

    def h_matrix_numba(lam: np.ndarray, deg_tol: float) -> np.ndarray:
        return _h_matrix_nb(np.ascontiguousarray(lam), deg_tol)

    def jacobian_from_modes_numba(A, H, Z, E):
        nops = A.shape[0]
        flat = _mode_overlap_nb(np.ascontiguousarray(A), np.ascontiguousarray(H))
        J = np.empty((nops, nops))
        p = 0
        for i in range(nops):
            for j in range(i, nops):
                J[i, j] = J[j, i] = -flat[p] / Z + E[i] * E[j]
                p += 1
        return J

    h_matrix = h_matrix_numba
    jacobian_from_modes = jacobian_from_modes_numba
else:
    h_matrix = h_matrix_numpy
    jacobian_from_modes = jacobian_from_modes_numpy
