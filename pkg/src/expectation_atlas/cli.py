"""Command-line surface.

Subcommands: validate, boundary, eigenset, betamap, solve, family, marginal,
certify.  Results go to stdout or --output (CSV for plot series, JSON for
structured results); diagnostics go to stderr, with verbosity controlled by
EXPECTATION_ATLAS_LOG in {error, info, debug}.

Exit codes encode the membership verdict so shell pipelines can branch
without parsing: 0 interior/ok, 2 exterior, 3 boundary, 4 inconclusive,
1 validation or input error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io
from .boundary import eigenset, face, _segment_endpoints
from .certificates import is_member_positivity, positivity_matrix, purity_report
from .flow import (
    Classification,
    FlowParams,
    integrate_flow,
    partial_trace,
    solve_marginal,
    state_family,
)
from .gibbs import expectation_map
from .linalg import (
    NumericalError,
    OperatorSet,
    ValidationError,
    build_basis,
    split_traceless,
    structure_tensors,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CODES = {
    Classification.INTERIOR: 0,
    Classification.EXTERIOR: 2,
    Classification.BOUNDARY: 3,
    Classification.INCONCLUSIVE: 4,
}

log = logging.getLogger("expectation_atlas.cli")


def _setup_logging() -> None:
    level = os.environ.get("EXPECTATION_ATLAS_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        stream=sys.stderr,
        level=levels.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip() != ""])
    except ValueError:
        raise ValidationError(f"cannot parse vector {text!r}; expected 'v1,v2,...'") from None


def _flow_params(args) -> FlowParams:
    return FlowParams(
        dt=args.dt,
        max_steps=args.max_steps,
        delta_tol=args.delta_tol,
        beta_cap=args.beta_cap,
        integrator=args.integrator,
    )


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- commands


def cmd_validate(args) -> int:
    mats, labels, N = io.load_operator_matrices(args.input)
    lines = [f"dim: {N}", f"operators: {len(mats)}"]
    offsets = None
    if args.project_traceless:
        mats, offsets = split_traceless(mats)
        lines.append("projected to traceless parts (offsets recorded)")
    violations = []
    traces = []
    for i, M in enumerate(mats):
        herm = float(np.linalg.norm(M - M.conj().T))
        if herm > 1e-12 * max(1.0, float(np.linalg.norm(M))):
            violations.append(f"operator {i} ({labels[i]}) is not Hermitian: residual {herm:.3e}")
        tr = float(np.trace(M).real)
        traces.append(tr)
        if abs(tr) > 1e-12 * N:
            violations.append(
                f"operator {i} ({labels[i]}) is not traceless: tr = {tr:.6e} "
                "(rerun with --project-traceless)"
            )
    lines.append("trace norms: " + ", ".join(io.fmt(abs(t)) for t in traces))
    ops = np.array([np.asarray(M, dtype=np.complex128) for M in mats])
    gram = np.real(np.einsum("aij,bji->ab", ops, ops))
    gev = np.linalg.eigvalsh(0.5 * (gram + gram.T))
    lines.append("gram spectrum: " + ", ".join(io.fmt(v) for v in gev))
    if gev[0] < 1e-10 * max(gev[-1], 0.0):
        violations.append(
            f"operators are linearly dependent: Gram eigenvalues [{gev[0]:.3e}, {gev[-1]:.3e}]"
        )
    comms = []
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            comms.append(float(np.linalg.norm(ops[i] @ ops[j] - ops[j] @ ops[i])))
    if comms:
        lines.append("commutator norms: " + ", ".join(io.fmt(c) for c in comms))
    if offsets is not None:
        lines.append("identity offsets: " + ", ".join(io.fmt(c) for c in offsets))
    for v in violations:
        lines.append("VIOLATION: " + v)
    lines.append("status: " + ("ok" if not violations else "invalid"))
    if args.format == "json":
        doc = {
            "dim": N,
            "n": len(mats),
            "labels": labels,
            "trace_norms": [abs(t) for t in traces],
            "gram_spectrum": [float(v) for v in gev],
            "commutator_norms": comms,
            "violations": violations,
            "valid": not violations,
        }
        if offsets is not None:
            doc["identity_offsets"] = [float(c) for c in offsets]
            doc["operators"] = [io.complex_matrix_to_json(M) for M in mats]
        io.write_json(doc, args.output)
    else:
        io.write_text("\n".join(lines), args.output)
    return EXIT_OK if not violations else EXIT_ERROR


def _load_pair_set(args) -> OperatorSet:
    S = io.load_operator_set(args.input)
    if S.n != 2:
        raise ValidationError(
            f"this command requires exactly 2 operators, got {S.n}; "
            "for general n build a support table with sampled_outer_hull"
        )
    return S


def cmd_boundary(args) -> int:
    S = _load_pair_set(args)
    thetas = np.linspace(0.0, 2.0 * np.pi, args.dirs, endpoint=False)

    def sweep(theta):
        f = face(np.array([np.cos(theta), np.sin(theta)]), S)
        if f.ground_dim == 1:
            pts = [f.point]
        else:
            pts = list(_segment_endpoints(f))
        return [(float(theta), p, f.support, f.ground_dim) for p in pts]

    rows = []
    for chunk in _pmap(sweep, thetas, args.threads):
        for theta, p, support, m in chunk:
            rows.append((theta, float(p[0]), float(p[1]), float(support), m, 0))
    io.write_csv(["theta", "e1", "e2", "support", "ground_dim", "level"], rows, args.output)
    return EXIT_OK


def cmd_eigenset(args) -> int:
    S = _load_pair_set(args)
    pts = eigenset(S, args.dirs)
    rows = []
    for pt in pts:
        theta = float(np.arctan2(pt.direction[1], pt.direction[0])) % (2.0 * np.pi)
        support = float(pt.direction @ pt.point)
        rows.append((theta, float(pt.point[0]), float(pt.point[1]), support, 1, pt.level))
    io.write_csv(["theta", "e1", "e2", "support", "ground_dim", "level"], rows, args.output)
    return EXIT_OK


def cmd_betamap(args) -> int:
    S = _load_pair_set(args)
    lo, hi, steps = args.beta_min, args.beta_max, args.grid_steps
    axis = np.linspace(lo, hi, steps)
    grid = [(b1, b2) for b1 in axis for b2 in axis]

    def eval_point(bb):
        E = expectation_map(np.array(bb), S)
        return (float(bb[0]), float(bb[1]), float(E[0]), float(E[1]))

    rows = _pmap(eval_point, grid, args.threads)
    io.write_csv(["beta1", "beta2", "E1", "E2"], rows, args.output)
    return EXIT_OK


def _flow_doc(result, target) -> dict:
    doc = {
        "classification": result.classification.value,
        "exit_code": EXIT_CODES[result.classification],
        "target": [float(v) for v in target],
        "beta_final": [float(v) for v in result.beta_final],
        "residual": float(result.residual),
        "steps": result.steps,
        "trajectory": [
            {"t": float(t), "delta": float(d)} for (t, _, _, d) in result.trajectory
        ],
    }
    achieved = result.achieved
    if achieved is not None:
        doc["achieved"] = [float(v) for v in achieved]
    if result.state is not None:
        doc["state"] = io.complex_matrix_to_json(result.state)
    return doc


def cmd_solve(args) -> int:
    S = io.load_operator_set(args.input)
    target = _parse_vector(args.target)
    result = integrate_flow(S, target, params=_flow_params(args))
    io.write_json(_flow_doc(result, target), args.output)
    return EXIT_CODES[result.classification]


def cmd_family(args) -> int:
    S = io.load_operator_set(args.input)
    target = _parse_vector(args.target)
    params = _flow_params(args)
    result = integrate_flow(S, target, params=params)
    doc = _flow_doc(result, target)
    if result.classification is Classification.INTERIOR:
        fam = state_family(S, target, params=params)
        doc["family"] = {
            "perp_dim": int(len(fam.perp_basis)),
            "intervals": [[float(a), float(b)] for a, b in fam.intervals],
            "perp_basis": [io.complex_matrix_to_json(P) for P in fam.perp_basis],
        }
    io.write_json(doc, args.output)
    return EXIT_CODES[result.classification]


def cmd_marginal(args) -> int:
    rhoA, rhoB = io.load_marginal_pair(args.input)
    result = solve_marginal(rhoA, rhoB, params=_flow_params(args))
    from .flow import marginal_target

    target = marginal_target(rhoA, rhoB)
    doc = _flow_doc(result, target)
    if result.state is not None:
        NA, NB = rhoA.shape[0], rhoB.shape[0]
        doc["marginal_A"] = io.complex_matrix_to_json(partial_trace(result.state, (NA, NB), 0))
        doc["marginal_B"] = io.complex_matrix_to_json(partial_trace(result.state, (NA, NB), 1))
    io.write_json(doc, args.output)
    return EXIT_CODES[result.classification]


def cmd_certify(args) -> int:
    if args.dim is None:
        raise ValidationError("certify requires --dim (full-basis mode)")
    x = _parse_vector(args.target)
    N = args.dim
    basis = build_basis(N)
    if x.shape != (len(basis),):
        raise ValidationError(
            f"coordinate vector has length {len(x)}, expected N^2-1 = {len(basis)}"
        )
    tensors = structure_tensors(basis)
    M = positivity_matrix(x, tensors)
    min_eig = float(np.linalg.eigvalsh(M)[0])
    member = is_member_positivity(x, tensors)
    report = purity_report(x, basis, tensors)
    doc = {
        "dim": N,
        "x": [float(v) for v in x],
        "positivity_min_eigenvalue": min_eig,
        "member": bool(member),
        "purity": {
            "verdict": report.verdict,
            "r_quadratic": [float(v) for v in report.r_quadratic],
            "r_charpoly": [float(v) for v in report.r_charpoly],
            "r_subdet": float(report.r_subdet),
        },
    }
    if args.cross_check:
        S = OperatorSet.from_matrices(list(basis.elements))
        result = integrate_flow(S, x, params=_flow_params(args))
        flow_member = result.classification in (
            Classification.INTERIOR,
            Classification.BOUNDARY,
        )
        doc["cross_check"] = {
            "classification": result.classification.value,
            "agrees": bool(flow_member == member)
            or abs(min_eig) < 1e-6,  # margin band: verdicts may legitimately differ
        }
        if not doc["cross_check"]["agrees"]:
            log.error(
                "certificate/flow disagreement: member=%s, flow=%s, min eig %.3e",
                member,
                result.classification.value,
                min_eig,
            )
    io.write_json(doc, args.output)
    return EXIT_OK if member else EXIT_CODES[Classification.EXTERIOR]


# ---------------------------------------------------------------- parser


def _add_flow_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dt", type=float, default=0.4)
    p.add_argument("--max-steps", type=int, default=500)
    p.add_argument("--delta-tol", type=float, default=1e-18)
    p.add_argument("--beta-cap", type=float, default=1e3)
    p.add_argument("--integrator", choices=["euler", "rk4"], default="euler")


def _add_common(p: argparse.ArgumentParser, need_input=True) -> None:
    if need_input:
        p.add_argument("--input", required=True, help="operator-set JSON path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None, help="write here (atomic); default stdout")
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="expectation-atlas",
        description="Map joint expectation-value bodies of Hermitian operator sets.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an operator-set file against the preconditions")
    _add_common(p)
    p.add_argument("--project-traceless", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("boundary", help="trace the boundary curve for a 2-operator set (CSV)")
    _add_common(p)
    p.add_argument("--dirs", type=int, default=360)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("eigenset", help="emit all eigenstate expectation points (CSV)")
    _add_common(p)
    p.add_argument("--dirs", type=int, default=360)
    p.set_defaults(func=cmd_eigenset)

    p = sub.add_parser("betamap", help="sample the beta -> E map on a rectangular grid (CSV)")
    _add_common(p)
    p.add_argument("--beta-min", type=float, default=-2.0)
    p.add_argument("--beta-max", type=float, default=2.0)
    p.add_argument("--grid-steps", type=int, default=21)
    p.set_defaults(func=cmd_betamap)

    p = sub.add_parser("solve", help="classify a target and construct the realizing state (JSON)")
    _add_common(p)
    p.add_argument("--target", required=True, help='target vector "v1,v2,..."')
    _add_flow_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("family", help="solve, then describe all states with the target values")
    _add_common(p)
    p.add_argument("--target", required=True)
    _add_flow_flags(p)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("marginal", help="two-party quantum marginal problem (JSON in/out)")
    _add_common(p)
    _add_flow_flags(p)
    p.set_defaults(func=cmd_marginal)

    p = sub.add_parser("certify", help="full-basis positivity-matrix membership and purity")
    _add_common(p, need_input=False)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--target", required=True, help='coordinate vector "x1,...,x_{N^2-1}"')
    p.add_argument("--cross-check", action="store_true")
    _add_flow_flags(p)
    p.set_defaults(func=cmd_certify)

    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
