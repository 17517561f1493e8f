"""Dense complex Hermitian linear algebra and operator-basis machinery.

Everything downstream (Gibbs map, flow, boundary tracing, certificates)
consumes the primitives defined here: validated Hermitian operators,
ordered operator sets with their Gram matrix, the generalized Gell-Mann
basis rescaled to tr(T_a T_b) = N delta_ab, the structure tensors of the
operator algebra, and the state <-> coordinate maps.

All functions are pure and all container types are frozen; instances are
safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ValidationError",
    "NumericalError",
    "EigenDecomposition",
    "BasisSet",
    "StructureTensors",
    "OperatorSet",
    "as_hermitian",
    "check_hermitian",
    "check_density",
    "eig_hermitian",
    "degeneracy_threshold",
    "build_basis",
    "structure_tensors",
    "state_from_coords",
    "coords_from_state",
    "kron",
    "random_hermitian",
    "random_density",
    "split_traceless",
]

HERMITICITY_RTOL = 1e-12
TRACE_TOL = 1e-12
GRAM_RCOND = 1e-10
MIN_EIG_TOL = 1e-10


class ValidationError(ValueError):
    """Input violates a documented precondition or type invariant."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge."""


def as_hermitian(H, name: str = "operator") -> np.ndarray:
    """Convert to a square complex128 array and verify Hermiticity.

    Hermiticity is required to within 1e-12 relative Frobenius norm.
    """
    A = np.asarray(H, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {A.shape}")
    check_hermitian(A, name=name)
    return A


def check_hermitian(H: np.ndarray, rtol: float = HERMITICITY_RTOL, name: str = "operator") -> None:
    scale = max(np.linalg.norm(H), 1.0)
    dev = np.linalg.norm(H - H.conj().T)
    if dev > rtol * scale:
        raise ValidationError(
            f"{name} is not Hermitian: |H - H^dag|_F = {dev:.3e} (scale {scale:.3e})"
        )


def check_density(rho, name: str = "rho") -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, min eigenvalue >= -1e-10."""
    R = as_hermitian(rho, name=name)
    tr = np.trace(R)
    if abs(tr - 1.0) > 1e-12 * max(1.0, abs(tr)):
        raise ValidationError(f"{name} has trace {tr}, expected 1")
    lam = np.linalg.eigvalsh(R)
    if lam[0] < -MIN_EIG_TOL:
        raise ValidationError(f"{name} has negative eigenvalue {lam[0]:.3e}")
    return R


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition of a Hermitian operator.

    values are sorted ascending; vectors holds orthonormal eigenvectors in
    the columns, with a fixed phase convention (the largest-magnitude
    component of each eigenvector is real and positive) so the output is
    reproducible across runs.
    """

    values: np.ndarray
    vectors: np.ndarray


def eig_hermitian(H) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian operator with deterministic output."""
    A = as_hermitian(H)
    A = 0.5 * (A + A.conj().T)
    try:
        values, vectors = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise NumericalError(f"eigensolver failed to converge: {exc}") from exc
    # phase convention: rotate each column so its largest-magnitude entry
    # is real-positive
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.abs(pivots), 1.0)
    vectors = vectors / phases[np.newaxis, :]
    return EigenDecomposition(values=values, vectors=vectors)


def degeneracy_threshold(values: np.ndarray) -> float:
    """Scale-relative threshold below which two eigenvalues count as degenerate."""
    scale = float(np.max(np.abs(values))) if len(values) else 0.0
    return 1e-9 * max(1.0, scale)


@dataclass(frozen=True)
class BasisSet:
    """Generalized Gell-Mann basis of traceless Hermitian operators.

    elements has shape (N^2-1, N, N) and satisfies tr(T_a T_b) = N delta_ab.
    Ordering: symmetric off-diagonal pairs (j<k, lexicographic), then
    antisymmetric off-diagonal pairs, then the N-1 diagonal elements.  For
    N = 2 this is exactly (sigma_x, sigma_y, sigma_z).
    """

    dim: int
    elements: np.ndarray

    def __len__(self) -> int:
        return self.elements.shape[0]


def build_basis(N: int) -> BasisSet:
    """Generalized Gell-Mann family rescaled so tr(T_a T_b) = N delta_ab."""
    if N < 2:
        raise ValidationError(f"basis requires dimension >= 2, got {N}")
    scale = np.sqrt(N / 2.0)
    mats = []
    for j in range(N):
        for k in range(j + 1, N):
            M = np.zeros((N, N), dtype=np.complex128)
            M[j, k] = 1.0
            M[k, j] = 1.0
            mats.append(scale * M)
    for j in range(N):
        for k in range(j + 1, N):
            M = np.zeros((N, N), dtype=np.complex128)
            M[j, k] = -1.0j
            M[k, j] = 1.0j
            mats.append(scale * M)
    for l in range(1, N):
        d = np.zeros(N)
        d[:l] = 1.0
        d[l] = -l
        M = np.diag(d.astype(np.complex128)) * np.sqrt(2.0 / (l * (l + 1)))
        mats.append(scale * M)
    return BasisSet(dim=N, elements=np.array(mats))


@dataclass(frozen=True)
class StructureTensors:
    """Algebra tensors of a traceless orthogonal basis.

    With tr(T_a T_b) = N delta_ab the products close as
        T_a T_b = sum_k zee[a, b, k] T_k + gee[a, b] * 1
    where zee[a, b, k] = tr(T_a T_b T_k) / N and gee[a, b] = tr(T_a T_b) / N.
    The totally symmetric tensor s_abc = tr({T_a, T_b} T_c) / (2 N^2)
    carries the anticommutator part; it enters the quadratic pure-state
    conditions as (1 - 2/N) x_a = s_abc x_b x_c.
    """

    s: np.ndarray
    zee: np.ndarray
    gee: np.ndarray


def structure_tensors(basis: BasisSet) -> StructureTensors:
    T = basis.elements
    N = basis.dim
    # triple[a, b, c] = tr(T_a T_b T_c)
    prod = np.einsum("aij,bjk->abik", T, T)
    triple = np.einsum("abik,cki->abc", prod, T)
    zee = triple / N
    s = np.real(triple + np.swapaxes(triple, 0, 1)) / (2.0 * N * N)
    gee = np.real(np.einsum("aij,bji->ab", T, T)) / N
    return StructureTensors(s=s, zee=zee, gee=gee)


def reconstruction_residual(basis: BasisSet, tensors: StructureTensors) -> float:
    """Max Frobenius residual of T_a T_b = zee[a,b,k] T_k + gee[a,b] 1."""
    T = basis.elements
    N = basis.dim
    eye = np.eye(N)
    recon = np.einsum("abk,kij->abij", tensors.zee, T) + tensors.gee[:, :, None, None] * eye
    prod = np.einsum("aij,bjk->abik", T, T)
    return float(np.max(np.linalg.norm(prod - recon, axis=(2, 3))))


def state_from_coords(x, basis: BasisSet) -> np.ndarray:
    """rho = (1/N)(1 + sum_a x_a T_a); Hermitian and unit trace, not
    necessarily positive -- the caller decides whether to check."""
    x = np.asarray(x, dtype=float)
    if x.shape != (len(basis),):
        raise ValidationError(
            f"coordinate vector has length {x.shape}, expected ({len(basis)},)"
        )
    N = basis.dim
    return (np.eye(N) + np.tensordot(x, basis.elements, axes=1)) / N


def coords_from_state(rho, basis: BasisSet) -> np.ndarray:
    """x_a = tr(rho T_a); inverse of state_from_coords."""
    R = check_density(rho)
    if R.shape[0] != basis.dim:
        raise ValidationError(
            f"state dimension {R.shape[0]} does not match basis dimension {basis.dim}"
        )
    return np.real(np.einsum("aij,ji->a", basis.elements, R))


def kron(A, B) -> np.ndarray:
    """Tensor (Kronecker) product; preserves Hermiticity."""
    return np.kron(np.asarray(A, dtype=np.complex128), np.asarray(B, dtype=np.complex128))


def random_hermitian(N: int, seed: int) -> np.ndarray:
    """Gaussian-unitary-ensemble sample, deterministic per seed."""
    if N < 1:
        raise ValidationError(f"dimension must be >= 1, got {N}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return 0.5 * (G + G.conj().T)


def random_density(N: int, seed: int, rank: int | None = None) -> np.ndarray:
    """Normalized complex Wishart sample of the given rank, deterministic per seed."""
    if N < 1:
        raise ValidationError(f"dimension must be >= 1, got {N}")
    if rank is None:
        rank = N
    if not 1 <= rank <= N:
        raise ValidationError(f"rank must be in [1, {N}], got {rank}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((N, rank)) + 1j * rng.standard_normal((N, rank))
    W = G @ G.conj().T
    return W / np.trace(W).real


def split_traceless(mats) -> tuple[list[np.ndarray], np.ndarray]:
    """Split each O_i = O_i' + c_i * 1 into a traceless part and offset c_i.

    Solvers operate on the traceless parts; expectation values for the
    original operators are recovered by adding the offsets back.
    """
    out = []
    offsets = []
    for i, M in enumerate(mats):
        A = as_hermitian(M, name=f"operator {i}")
        c = np.trace(A).real / A.shape[0]
        out.append(A - c * np.eye(A.shape[0]))
        offsets.append(c)
    return out, np.array(offsets)


@dataclass(frozen=True)
class OperatorSet:
    """Ordered set of linearly independent traceless Hermitian operators.

    ops has shape (n, N, N); gram is the n x n matrix tr(O_i O_j), kept
    because it is the Jacobian of the Gibbs map at beta = 0 (up to -1/N)
    and certifies linear independence.
    """

    ops: np.ndarray
    gram: np.ndarray
    labels: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.ops.shape[0]

    @property
    def dim(self) -> int:
        return self.ops.shape[1]

    @classmethod
    def from_matrices(cls, mats, labels=None) -> "OperatorSet":
        if len(mats) == 0:
            raise ValidationError("operator set must contain at least one operator")
        arr = []
        N = None
        for i, M in enumerate(mats):
            A = as_hermitian(M, name=f"operator {i}")
            if N is None:
                N = A.shape[0]
            elif A.shape[0] != N:
                raise ValidationError(
                    f"operator {i} has dimension {A.shape[0]}, expected {N}"
                )
            tr = np.trace(A).real
            if abs(tr) > TRACE_TOL * N:
                raise ValidationError(
                    f"operator {i} is not traceless: tr = {tr:.3e} "
                    "(split off the identity part with split_traceless)"
                )
            arr.append(A)
        ops = np.array(arr)
        gram = np.real(np.einsum("aij,bji->ab", ops, ops))
        gram = 0.5 * (gram + gram.T)
        ev = np.linalg.eigvalsh(gram)
        if ev[0] < GRAM_RCOND * ev[-1]:
            raise ValidationError(
                f"operators are not linearly independent: Gram eigenvalues span "
                f"[{ev[0]:.3e}, {ev[-1]:.3e}]"
            )
        if labels is None:
            labels = tuple(f"O{i + 1}" for i in range(len(arr)))
        return cls(ops=ops, gram=gram, labels=tuple(labels))

    def combination(self, coeffs) -> np.ndarray:
        """sum_i coeffs_i O_i."""
        c = np.asarray(coeffs, dtype=float)
        if c.shape != (self.n,):
            raise ValidationError(f"expected {self.n} coefficients, got {c.shape}")
        return np.tensordot(c, self.ops, axes=1)

    def expectations(self, rho) -> np.ndarray:
        """tr(rho O_i) for each operator."""
        R = np.asarray(rho, dtype=np.complex128)
        return np.real(np.einsum("aij,ji->a", self.ops, R))
