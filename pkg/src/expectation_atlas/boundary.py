"""Geometry of the joint expectation body E_S from its supporting half-spaces.

Every direction ê gives the half-space ê·x >= lambda_min(ê·O).  The contact
set of the supporting hyperplane is a single point when the minimum
eigenvalue is non-degenerate, and otherwise a lower-dimensional face equal
to the expectation body of the operators compressed to the ground space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .linalg import (
    OperatorSet,
    ValidationError,
    degeneracy_threshold,
    eig_hermitian,
)

__all__ = [
    "BoundaryFace",
    "EigensetPoint",
    "OuterHull",
    "support_value",
    "face",
    "trace_boundary",
    "sampled_outer_hull",
    "sphere_directions",
    "commuting_polytope",
    "eigenset",
]


def _unit_direction(e_hat, n: int) -> np.ndarray:
    d = np.asarray(e_hat, dtype=float)
    if d.shape != (n,):
        raise ValidationError(f"direction has shape {d.shape}, expected ({n},)")
    norm = np.linalg.norm(d)
    if norm < 1e-9:
        raise ValidationError("direction vector is (numerically) zero")
    return d / norm


@dataclass(frozen=True)
class BoundaryFace:
    """Contact set of the supporting hyperplane ê·x = lambda_min(ê·O).

    For a non-degenerate ground level (ground_dim == 1) the face is the
    single expectation point of the ground state.  Otherwise projected_ops
    holds the operators compressed to an orthonormal ground-space basis
    (shape (n, m, m)); their own expectation body is the face, and segment
    carries its endpoints when the sweep has resolved them (n == 2 only).
    """

    direction: np.ndarray
    support: float
    ground_dim: int
    point: np.ndarray | None = None
    projected_ops: np.ndarray | None = None
    segment: tuple[np.ndarray, np.ndarray] | None = None


@dataclass(frozen=True)
class EigensetPoint:
    direction: np.ndarray
    level: int
    point: np.ndarray


def support_value(e_hat, S: OperatorSet) -> float:
    """Minimum eigenvalue of ê·O; the support value of the half-space H_ê."""
    d = _unit_direction(e_hat, S.n)
    return float(eig_hermitian(S.combination(d)).values[0])


def face(e_hat, S: OperatorSet) -> BoundaryFace:
    """Boundary face in direction ê, with ground-space projection when degenerate."""
    d = _unit_direction(e_hat, S.n)
    dec = eig_hermitian(S.combination(d))
    lam = dec.values
    tol = degeneracy_threshold(lam)
    m = int(np.sum(lam <= lam[0] + tol))
    support = float(lam[0])
    if m == 1:
        v = dec.vectors[:, 0]
        point = np.real(np.einsum("i,aij,j->a", v.conj(), S.ops, v))
        return BoundaryFace(direction=d, support=support, ground_dim=1, point=point)
    Vg = dec.vectors[:, :m]
    projected = np.einsum("im,aij,jn->amn", Vg.conj(), S.ops, Vg)
    return BoundaryFace(
        direction=d, support=support, ground_dim=m, projected_ops=projected
    )


def _segment_endpoints(f: BoundaryFace) -> tuple[np.ndarray, np.ndarray]:
    # on the ground space ê·O is support * identity; the transverse
    # coordinate ranges over the spectrum of the projected perpendicular
    # combination (the single-operator interval result)
    d = f.direction
    perp = np.array([-d[1], d[0]])
    P = np.tensordot(perp, f.projected_ops, axes=1)
    t = np.linalg.eigvalsh(0.5 * (P + P.conj().T))
    lo = f.support * d + t[0] * perp
    hi = f.support * d + t[-1] * perp
    return lo, hi


def trace_boundary(S: OperatorSet, num_dirs: int) -> list[BoundaryFace]:
    """Sweep ê(theta) over uniform angles and emit the boundary faces in order.

    Only n = 2 operator sets sweep a circle; use sampled_outer_hull for
    higher n.  Degenerate faces carry their segment endpoints, ordered so
    the emitted points traverse the boundary counterclockwise.
    """
    if S.n != 2:
        raise ValidationError(
            f"trace_boundary requires exactly 2 operators, got {S.n}; "
            "use sampled_outer_hull for general n"
        )
    if num_dirs < 8:
        raise ValidationError(f"num_dirs must be >= 8, got {num_dirs}")
    out = []
    for theta in np.linspace(0.0, 2.0 * np.pi, num_dirs, endpoint=False):
        f = face(np.array([np.cos(theta), np.sin(theta)]), S)
        if f.ground_dim > 1:
            f = BoundaryFace(
                direction=f.direction,
                support=f.support,
                ground_dim=f.ground_dim,
                projected_ops=f.projected_ops,
                segment=_segment_endpoints(f),
            )
        out.append(f)
    return out


@dataclass(frozen=True)
class OuterHull:
    """Certified outer approximation of E_S from sampled support half-spaces.

    contains(x) == False certifies x is outside E_S; True is necessary but
    not sufficient at finite sampling.
    """

    directions: np.ndarray  # (d, n)
    supports: np.ndarray  # (d,)

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.directions @ x >= self.supports - tol))


def sampled_outer_hull(S: OperatorSet, dirs) -> OuterHull:
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    if dirs.shape[0] == 0:
        raise ValidationError("need at least one direction")
    rows = np.array([_unit_direction(d, S.n) for d in dirs])
    supports = np.array([support_value(d, S) for d in rows])
    return OuterHull(directions=rows, supports=supports)


SPHERE_SEED = 20231001  # documented seed of the low-discrepancy direction sequence


def sphere_directions(n: int, count: int, seed: int = SPHERE_SEED) -> np.ndarray:
    """Deterministic low-discrepancy sequence of unit vectors in R^n."""
    from scipy.stats import norm

    sampler = qmc.Sobol(d=n, scramble=True, seed=seed)
    u = sampler.random(count)
    g = norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def commuting_polytope(S: OperatorSet, tol: float = 1e-8) -> list[np.ndarray]:
    """Vertices of E_S for a commuting set: the extreme joint eigenvalue vectors."""
    max_comm = 0.0
    for i in range(S.n):
        for j in range(i + 1, S.n):
            c = S.ops[i] @ S.ops[j] - S.ops[j] @ S.ops[i]
            max_comm = max(max_comm, float(np.linalg.norm(c)))
    if max_comm >= tol:
        raise ValidationError(
            f"operators do not commute: max commutator norm {max_comm:.3e} >= {tol:.3e}"
        )
    scale = max(1.0, float(np.max(np.abs(S.ops))))
    points = None
    for attempt in range(8):
        rng = np.random.default_rng(1000 + attempt)
        c = rng.standard_normal(S.n)
        c /= np.linalg.norm(c)
        dec = eig_hermitian(S.combination(c))
        V = dec.vectors
        diag_ops = np.einsum("im,aij,jn->amn", V.conj(), S.ops, V)
        off = diag_ops.copy()
        for a in range(S.n):
            np.fill_diagonal(off[a], 0.0)
        if float(np.max(np.abs(off))) < 1e-8 * scale:
            points = np.real(np.einsum("akk->ka", diag_ops))
            break
    if points is None:
        raise ValidationError(
            "failed to simultaneously diagonalize the commuting set; "
            "degenerate joint spectra beyond tolerance"
        )
    merged: list[np.ndarray] = []
    for p in points:
        if not any(np.linalg.norm(p - q) < 1e-9 for q in merged):
            merged.append(p)
    return _extreme_points(np.array(merged))


def _extreme_points(points: np.ndarray) -> list[np.ndarray]:
    """Vertices of the convex hull, robust to degenerate (low-rank) clouds."""
    if len(points) <= 2:
        return [p for p in points]
    centered = points - points.mean(axis=0)
    rank = np.linalg.matrix_rank(centered, tol=1e-10 * max(1.0, np.abs(points).max()))
    if rank == 0:
        return [points[0]]
    if rank == 1:
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        t = centered @ vt[0]
        return [points[int(np.argmin(t))], points[int(np.argmax(t))]]
    from scipy.spatial import ConvexHull

    hull = ConvexHull(points)
    return [points[i] for i in sorted(hull.vertices)]


def eigenset(S: OperatorSet, num_dirs: int) -> list[EigensetPoint]:
    """Expectation points of all eigenstates of ê·O over the direction sweep.

    Level-0 points fall on the boundary of E_S; higher levels trace the
    nested interior sheets of the eigenset."""
    if S.n != 2:
        raise ValidationError(f"eigenset requires exactly 2 operators, got {S.n}")
    out = []
    for theta in np.linspace(0.0, 2.0 * np.pi, num_dirs, endpoint=False):
        d = np.array([np.cos(theta), np.sin(theta)])
        dec = eig_hermitian(S.combination(d))
        modes = np.einsum("im,aij,jn->amn", dec.vectors.conj(), S.ops, dec.vectors)
        for k in range(S.dim):
            point = np.real(modes[:, k, k])
            out.append(EigensetPoint(direction=d, level=k, point=point))
    return out
