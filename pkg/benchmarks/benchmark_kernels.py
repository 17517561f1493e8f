"""Compare the numba and pure-numpy kernel lanes.

Times the two hot kernels (the divided-difference h matrix and the Jacobian
mode contraction) head to head across problem sizes, plus one full flow
solve per lane.  Run:

    python benchmarks/benchmark_kernels.py [--sizes 100 400 1000] [--repeats 5]

The numpy lane is what you get at import time with EXPECTATION_ATLAS_NO_NUMBA=1.
"""

import argparse
import time

import numpy as np

from expectation_atlas import FlowParams, OperatorSet, integrate_flow, random_hermitian
from expectation_atlas._kernels import (
    USE_NUMBA,
    h_matrix_numpy,
    jacobian_from_modes_numpy,
)

if USE_NUMBA:
    from expectation_atlas._kernels import h_matrix_numba, jacobian_from_modes_numba


def _best_of(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _inputs(N, n, seed):
    rng = np.random.default_rng(seed)
    lam = np.sort(rng.uniform(0.0, 8.0, N))
    lam -= lam[0]
    A = rng.standard_normal((n, N, N)) + 1j * rng.standard_normal((n, N, N))
    A = 0.5 * (A + np.conj(np.swapaxes(A, 1, 2)))
    H = h_matrix_numpy(lam, 1e-9)
    Z = float(np.exp(-lam).sum())
    E = rng.standard_normal(n)
    return lam, A, H, Z, E


def bench_kernels(sizes, n, repeats):
    print(f"{'N':>6} {'h numpy':>12} {'h numba':>12} {'J numpy':>12} {'J numba':>12}")
    for N in sizes:
        lam, A, H, Z, E = _inputs(N, n, seed=N)
        row = [N]
        row.append(_best_of(lambda: h_matrix_numpy(lam, 1e-9), repeats))
        if USE_NUMBA:
            h_matrix_numba(lam, 1e-9)  # warm the JIT
            row.append(_best_of(lambda: h_matrix_numba(lam, 1e-9), repeats))
        else:
            row.append(np.nan)
        row.append(_best_of(lambda: jacobian_from_modes_numpy(A, H, Z, E), repeats))
        if USE_NUMBA:
            jacobian_from_modes_numba(A, H, Z, E)
            row.append(_best_of(lambda: jacobian_from_modes_numba(A, H, Z, E), repeats))
        else:
            row.append(np.nan)
        print(f"{row[0]:>6} {row[1]:>12.2e} {row[2]:>12.2e} {row[3]:>12.2e} {row[4]:>12.2e}")


def bench_flow(N, repeats):
    mats = []
    for k in range(2):
        M = random_hermitian(N, seed=N + k)
        M -= np.trace(M).real / N * np.eye(N)
        M /= np.linalg.norm(M, 2)
        mats.append(M)
    S = OperatorSet.from_matrices(mats)
    from expectation_atlas import expectation_map

    e = expectation_map(np.array([0.4, -0.3]), S)
    params = FlowParams(dt=0.4, max_steps=30, delta_tol=1e-6)
    t = _best_of(lambda: integrate_flow(S, e, params=params), repeats)
    lane = "numba" if USE_NUMBA else "numpy"
    print(f"\nfull flow solve, N={N}, lane={lane}: {t:.2f}s best of {repeats}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 400, 1000])
    ap.add_argument("--operators", type=int, default=4)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--flow-dim", type=int, default=400)
    args = ap.parse_args()
    print(f"numba lane available: {USE_NUMBA}")
    bench_kernels(args.sizes, args.operators, args.repeats)
    bench_flow(args.flow_dim, max(2, args.repeats // 2))


if __name__ == "__main__":
    main()
