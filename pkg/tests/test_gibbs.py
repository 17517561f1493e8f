import numpy as np
import pytest
from scipy.linalg import expm

from expectation_atlas import (
    OperatorSet,
    build_basis,
    entropy,
    expectation_and_jacobian,
    expectation_map,
    gibbs_state,
    jacobian,
    log_partition,
    random_hermitian,
    thermal_point,
)
from expectation_atlas._kernels import h_matrix_numpy


def _random_set(N, n, seed):
    mats = []
    for k in range(n):
        M = random_hermitian(N, seed=seed + k)
        M -= np.trace(M).real / N * np.eye(N)
        mats.append(M)
    return OperatorSet.from_matrices(mats)


def test_gibbs_state_matches_expm(ops_pair):
    beta = np.array([0.7, -0.3])
    M = ops_pair.combination(beta)
    ref = expm(-M)
    ref /= np.trace(ref).real
    assert np.allclose(gibbs_state(beta, ops_pair), ref, atol=1e-12)
    assert log_partition(beta, ops_pair) == pytest.approx(
        np.log(np.trace(expm(-M)).real), abs=1e-12
    )


def test_log_partition_stable_at_large_beta(ops_pair):
    # naive tr(exp(-M)) overflows well before |beta| = 500
    lz = log_partition(np.array([500.0, 0.0]), ops_pair)
    assert np.isfinite(lz)
    # ln Z -> -beta * lambda_min + ln(ground degeneracy)
    assert lz == pytest.approx(500.0 + np.log(2.0), rel=1e-12)


def test_pauli_closed_form(pauli_set):
    beta = np.array([0.3, -0.7, 0.5])
    nb = np.linalg.norm(beta)
    E = expectation_map(beta, pauli_set)
    assert np.allclose(E, -np.tanh(nb) * beta / nb, atol=1e-12)


def test_jacobian_at_zero_is_minus_gram_over_N(ops_pair):
    J = jacobian(np.zeros(2), ops_pair)
    assert np.allclose(J, -ops_pair.gram / 3.0, atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_jacobian_matches_finite_differences(seed):
    S = _random_set(6, 3, seed * 10)
    rng = np.random.default_rng(seed)
    beta = rng.standard_normal(3) * 0.4
    J = jacobian(beta, S)
    h = 1e-6
    Jfd = np.zeros_like(J)
    for k in range(3):
        bp, bm = beta.copy(), beta.copy()
        bp[k] += h
        bm[k] -= h
        Jfd[:, k] = (expectation_map(bp, S) - expectation_map(bm, S)) / (2 * h)
    assert np.abs(J - Jfd).max() / np.abs(J).max() < 1e-5
    assert np.allclose(J, J.T, atol=1e-14)
    assert np.linalg.eigvalsh(J)[-1] < 0


def test_jacobian_symmetric_with_degenerate_spectrum():
    # O1 has a doubly degenerate level, exercising the kernel's limit branch
    O1 = np.diag([-1.0, -1.0, 2.0])
    O2 = np.array([[0, 1, 1], [1, 0, 0], [1, 0, 0]], dtype=float)
    S = OperatorSet.from_matrices([O1, O2])
    J = jacobian(np.array([2.0, 0.0]), S)
    assert np.array_equal(J, J.T)
    assert np.linalg.eigvalsh(J)[-1] < 0


def test_h_kernel_degenerate_limit():
    lam = np.array([1.0, 1.0 + 1e-12, 3.0])
    H = h_matrix_numpy(lam, 1e-9)
    assert abs(H[0, 1] - np.exp(-1.0)) < 1e-10
    assert H[0, 2] == pytest.approx((np.exp(-1.0) - np.exp(-3.0)) / 2.0, rel=1e-12)
    assert np.allclose(H, H.T)


def test_thermal_point_shares_decomposition(ops_pair):
    beta = np.array([0.2, 0.1])
    pt = thermal_point(beta, ops_pair)
    E, J = expectation_and_jacobian(beta, ops_pair)
    assert np.allclose(E, pt.expectations)
    assert np.allclose(E, ops_pair.expectations(gibbs_state(beta, ops_pair)), atol=1e-12)
    assert not pt.saturated
    assert thermal_point(np.array([2e6, 0.0]), ops_pair).saturated


def test_entropy():
    assert entropy(np.eye(4) / 4) == pytest.approx(np.log(4.0))
    psi = np.array([1.0, 0.0])
    assert entropy(np.outer(psi, psi)) == pytest.approx(0.0, abs=1e-12)


def test_max_entropy_property(ops_pair):
    # among states with the same expectations, the Gibbs state maximizes entropy
    beta = np.array([0.5, -0.2])
    rho = gibbs_state(beta, ops_pair)
    e = ops_pair.expectations(rho)
    basis = build_basis(3)
    # perturbation directions trace-orthogonal to both operators
    span = np.real(np.einsum("iab,kba->ik", ops_pair.ops, basis.elements))
    _, _, vt = np.linalg.svd(span)
    null = vt[2:]
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(20):
        d = null.T @ rng.standard_normal(len(null)) * 0.05
        pert = rho + np.tensordot(d, basis.elements, axes=1) / 3.0
        if np.linalg.eigvalsh(pert)[0] <= 1e-12:
            continue
        assert np.abs(ops_pair.expectations(pert) - e).max() < 1e-12
        assert entropy(pert) <= entropy(rho) + 1e-12
        checked += 1
    assert checked > 0
