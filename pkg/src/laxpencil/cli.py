"""Command-line front end: verification suites, flows, and report generation.

Every command writes a JSON report of the form

    {"checks": [{"name": ..., "defect": ..., "tol": ..., "pass": ...}, ...],
     "meta": {"seed": ..., "version": ...}}

with checks sorted by name, and exits 0 when all checks pass, 1 when a
numerical check fails (the failing check is named on stderr), and 2 on input
parse errors.  Identical seed and configuration produce byte-identical
reports; every tolerance in a report comes from the command line, never a
hidden default of the library.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .algebra import MatPoly, Poly
from .flows import (
    InvariantBasis,
    curve_point_at,
    divisor_trajectory,
    integrate,
    isospectral_drift,
    linear_fit_residual,
    linearizing_trajectory,
)
from .neumann import (
    NeumannState,
    classical_energy,
    constraint_defects,
    hamiltonian,
    integrate_neumann,
    separation_coordinates,
)
from .phasespace import (
    BracketPencil,
    CoordinateFunction,
    PhasePoint,
    bracket_r_form,
    bracket_tensor_form,
    jacobi_check,
    spanning_pencils,
)
from .serialize import (
    SchemaError,
    curve_to_dict,
    divisor_to_dict,
    divisor_trajectory_rows,
    dump_json,
    load_json,
    neumann_from_dict,
    neumann_trajectory_rows,
    pencil_from_dict,
    phase_point_from_dict,
    phase_point_to_dict,
    trajectory_rows,
    write_csv,
)
from .sov import SectionChoice, canonical_relations_defect, compute_divisor, divisor_via_adjugate
from .spectral import casimir_defect, casimir_sweep_reconstruction, char_curve, commutation_table
from .nijenhuis import normal_form_check


def _random_phase_point(rng: np.random.Generator, r: int, n: int,
                        scale: float = 1.0) -> PhasePoint:
    coeffs = scale * (rng.standard_normal((n + 1, r, r))
                      + 1j * rng.standard_normal((n + 1, r, r)))
    return PhasePoint(MatPoly(coeffs, r=r), n)


def _load_phase_point(args) -> PhasePoint:
    if args.input:
        return phase_point_from_dict(load_json(args.input), args.input)
    rng = np.random.default_rng(args.seed)
    return _random_phase_point(rng, args.r, args.n)


def _load_pencil(args, n: int) -> BracketPencil:
    if args.pencil:
        if args.pencil.strip().startswith("{"):
            doc = json.loads(args.pencil)
            pencil = pencil_from_dict(doc, "--pencil")
        else:
            pencil = pencil_from_dict(load_json(args.pencil), args.pencil)
    else:
        pencil = BracketPencil(Poly((1.0,)), 0.0)
    pencil.validate_for(n)
    return pencil


def _report(checks: list[dict], seed: int) -> dict:
    return {
        "checks": sorted(checks, key=lambda c: c["name"]),
        "meta": {"seed": seed, "version": __version__},
    }


def _finish(report: dict, out: str | None) -> int:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failing = [c["name"] for c in report["checks"] if not c["pass"]]
    if failing:
        print("failed checks: " + ", ".join(failing), file=sys.stderr)
        return 1
    return 0


def _check(name: str, defect: float, tol: float) -> dict:
    return {"name": name, "defect": float(defect), "tol": float(tol),
            "pass": bool(defect <= tol)}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_curve(args) -> int:
    at = _load_phase_point(args)
    curve = char_curve(at)
    if args.curve_out:
        dump_json(curve_to_dict(curve), args.curve_out)
    checks = [_check("curve-degree-profile", 0.0, args.tol)]
    return _finish(_report(checks, args.seed), args.out)


def cmd_divisor(args) -> int:
    at = _load_phase_point(args)
    sec = SectionChoice.default(at.r)
    curve = char_curve(at)
    div = compute_divisor(at, sec, tol=args.tol, curve=curve)
    membership = max((curve.membership_defect(l, z) for l, z in div.points), default=0.0)
    adj = divisor_via_adjugate(at, sec)
    if len(adj) == len(div):
        srt = adj.sorted()
        match = max(float(np.max(np.abs(srt.lams - div.lams))),
                    float(np.max(np.abs(srt.zs - div.zs)))) if len(div) else 0.0
    else:
        match = float("inf")
    if args.divisor_out:
        dump_json(divisor_to_dict(div), args.divisor_out)
    checks = [
        _check("divisor-curve-membership", membership, args.tol),
        _check("divisor-adjugate-match", match, max(args.tol, 1e-7)),
        _check("divisor-count-vs-expected", abs(len(div) - div.expected_count), 0.0),
    ]
    return _finish(_report(checks, args.seed), args.out)


def cmd_bracket_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    at = _random_phase_point(rng, args.r, args.n)
    a = Poly(rng.standard_normal(args.n + 2) + 1j * rng.standard_normal(args.n + 2))
    pencils = [BracketPencil(a, 0.0), BracketPencil(a, complex(rng.standard_normal(), 0.0))]
    worst_eq = 0.0
    worst_skew = 0.0
    scale = 0.0
    for pencil in pencils:
        for _ in range(args.probes):
            i, j, k, l = (int(v) for v in rng.integers(0, args.r, 4))
            lam0 = complex(*rng.standard_normal(2))
            mu0 = complex(*rng.standard_normal(2))
            if abs(lam0 - mu0) < 1e-3:
                mu0 = mu0 + 1.0
            f = CoordinateFunction.evaluation(i, j, lam0)
            g = CoordinateFunction.evaluation(k, l, mu0)
            v_r = bracket_r_form(f, g, at, pencil)
            v_t = bracket_tensor_form(i, j, lam0, k, l, mu0, at, pencil)
            v_sw = bracket_tensor_form(k, l, mu0, i, j, lam0, at, pencil)
            worst_eq = max(worst_eq, abs(v_r - v_t))
            worst_skew = max(worst_skew, abs(v_t + v_sw))
            scale = max(scale, abs(v_r), abs(v_t))
    scale = max(scale, 1.0)
    checks = [
        _check("bracket-rform-vs-tensor", worst_eq / scale, args.tol),
        _check("bracket-skew-symmetry", worst_skew / scale, args.tol),
    ]
    return _finish(_report(checks, args.seed), args.out)


def cmd_jacobi_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    at = _random_phase_point(rng, args.r, args.n)
    coords = [CoordinateFunction.coefficient(int(i), int(j), int(k))
              for (i, j, k) in rng.integers(0, (args.r, args.r, args.n + 1), (9, 3))]
    triples = [tuple(coords[3 * m : 3 * m + 3]) for m in range(3)]
    checks = []
    for idx, pencil in enumerate(spanning_pencils()):
        defect = jacobi_check(at, pencil, triples, h=args.h)
        checks.append(_check(f"jacobi-pencil-{idx}", defect, args.tol))
    return _finish(_report(checks, args.seed), args.out)


def cmd_casimir_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    at = _random_phase_point(rng, args.r, args.n)
    c0 = complex(rng.standard_normal(), rng.standard_normal())
    pencil = BracketPencil(Poly((-c0, 1.0)), 0.0)
    defect = casimir_defect(c0, at, pencil)
    sweep = casimir_sweep_reconstruction(at)
    checks = [
        _check("casimir-bracket-defect", defect, args.tol),
        _check("casimir-sweep-reconstruction", sweep, args.tol),
    ]
    return _finish(_report(checks, args.seed), args.out)


def cmd_nijenhuis_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    at = PhasePoint(MatPoly(rng.standard_normal((args.n + 1, args.r, args.r)),
                            r=args.r), args.n)
    checks = []
    for idx, pencil in enumerate(spanning_pencils()):
        d = canonical_relations_defect(at, pencil, h=args.h)
        checks.append(_check(f"canonical-relations-pencil-{idx}", d.max(), args.tol))
    nf = normal_form_check(at, list(spanning_pencils()), h=args.h)
    checks.append(_check("normal-form-block-diagonalization", nf, args.tol))
    return _finish(_report(checks, args.seed), args.out)


def cmd_flow(args) -> int:
    at = _load_phase_point(args)
    pencil = _load_pencil(args, at.n)
    j, k = (int(v) for v in args.hamiltonian.split(","))
    traj = integrate((j, k), at, pencil, args.T, args.step,
                     save_every=max(1, int(round(args.T / args.step / 200))))
    drift = isospectral_drift(traj)
    if args.csv:
        header, rows = trajectory_rows(traj.times, list(traj.states))
        write_csv(args.csv, header, rows)
    checks = [_check("flow-isospectral-drift", drift, args.tol)]
    if not traj.complete:
        checks.append(_check("flow-completed", 1.0, 0.0))
    return _finish(_report(checks, args.seed), args.out)


def cmd_linearize(args) -> int:
    at = _load_phase_point(args)
    pencil = _load_pencil(args, at.n)
    j, k = (int(v) for v in args.hamiltonian.split(","))
    curve = char_curve(at)
    traj = integrate((j, k), at, pencil, args.T, args.step,
                     save_every=max(1, int(round(args.T / args.step / 40))))
    divs = divisor_trajectory(traj)
    base = curve_point_at(curve, complex(-3.0, -2.0))
    labels = [(0, kk) for kk in range(at.n)] if pencil.a.degree == 0 \
        else [(0, kk) for kk in range(1, at.n + 1)]
    basis = InvariantBasis(at.r, at.n, tuple(labels))
    qs = linearizing_trajectory(divs, curve, pencil, basis, base)
    resid = linear_fit_residual(traj.times, qs)
    if args.csv:
        header, rows = divisor_trajectory_rows(traj.times, divs)
        write_csv(args.csv, header, rows)
    checks = [_check("linearize-affine-fit-residual", resid, args.tol)]
    return _finish(_report(checks, args.seed), args.out)


def cmd_neumann(args) -> int:
    if args.input:
        state = neumann_from_dict(load_json(args.input), args.input)
    else:
        rng = np.random.default_rng(args.seed)
        alpha = np.sort(rng.uniform(0.0, 3.0, args.n))
        state = NeumannState.random(alpha, rng)
    times, states = integrate_neumann(state, args.T, args.step,
                                      save_every=max(1, int(round(args.T / args.step / 200))))
    from .neumann import build_phi

    cons = max(max(constraint_defects(s)) for s in states)
    h0 = hamiltonian(state)
    energy = max(abs(hamiltonian(s) - h0) for s in states)
    table0 = char_curve(build_phi(state)).coefficient_table()
    iso = 0.0
    for s in states[:: max(1, len(states) // 40)]:
        table = char_curve(build_phi(s)).coefficient_table()
        iso = max(iso, max(abs(table.get(key, 0.0) - val) for key, val in table0.items()))
    sep = separation_coordinates(state)
    div = compute_divisor(build_phi(state), SectionChoice.default(2))
    sep_match = max(float(np.max(np.abs(sep.lams - div.lams))),
                    float(np.max(np.abs(sep.zs - div.zs)))) if len(sep) == len(div) else float("inf")
    if args.csv:
        header, rows = neumann_trajectory_rows(times, states)
        write_csv(args.csv, header, rows)
    checks = [
        _check("neumann-constraint-drift", cons, args.tol),
        _check("neumann-energy-drift", energy, args.tol),
        _check("neumann-isospectral-drift", iso, args.tol),
        _check("neumann-separation-vs-sov", sep_match, max(args.tol, 1e-8)),
    ]
    return _finish(_report(checks, args.seed), args.out)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, with_rn: bool = True) -> None:
    p.add_argument("--input", help="input JSON file (otherwise a seeded random instance)")
    p.add_argument("--pencil", help="pencil JSON file or inline JSON")
    p.add_argument("--tol", type=float, default=1e-8, help="check tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed for random instances and probes")
    p.add_argument("--out", help="report output path (default stdout)")
    if with_rn:
        p.add_argument("--r", type=int, default=2, help="matrix size for random instances")
        p.add_argument("--n", type=int, default=3, help="degree bound for random instances")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laxpencil",
        description="Verification suites and flows for pencils of r-matrix "
                    "Poisson brackets on matrix polynomials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", help="spectral curve of a phase point")
    _add_common(p)
    p.add_argument("--curve-out", help="write the curve JSON here")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("divisor", help="divisor coordinates and their validation")
    _add_common(p)
    p.add_argument("--divisor-out", help="write the divisor JSON here")
    p.set_defaults(func=cmd_divisor)

    p = sub.add_parser("bracket-check", help="R-form vs tensor-form bracket agreement")
    _add_common(p)
    p.add_argument("--probes", type=int, default=8, help="probe pairs per pencil")
    p.set_defaults(func=cmd_bracket_check)

    p = sub.add_parser("jacobi-check", help="finite-difference Jacobi identity")
    _add_common(p)
    p.add_argument("--h", type=float, default=1e-5, help="finite-difference step")
    p.set_defaults(func=cmd_jacobi_check)

    p = sub.add_parser("casimir-check", help="Casimirs at a zero of the pencil polynomial")
    _add_common(p)
    p.set_defaults(func=cmd_casimir_check)

    p = sub.add_parser("nijenhuis-check", help="canonical relations and normal form")
    _add_common(p)
    p.add_argument("--h", type=float, default=1e-6, help="finite-difference step")
    p.set_defaults(func=cmd_nijenhuis_check)

    p = sub.add_parser("flow", help="integrate a spectral-Hamiltonian flow")
    _add_common(p)
    p.add_argument("--hamiltonian", default="0,0", help="curve label 'j,k'")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--csv", help="trajectory CSV path")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("linearize", help="linearizing coordinates along a flow")
    _add_common(p)
    p.add_argument("--hamiltonian", default="0,0", help="curve label 'j,k'")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--step", type=float, default=2e-3)
    p.add_argument("--csv", help="divisor-trajectory CSV path")
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("neumann", help="Neumann oscillator trajectory and checks")
    _add_common(p, with_rn=False)
    p.add_argument("--n", type=int, default=3, help="degrees of freedom for random states")
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--csv", help="trajectory CSV path")
    p.set_defaults(func=cmd_neumann)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
