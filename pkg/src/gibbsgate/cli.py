"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 ``--strict`` and not admissible,
3 internal invariant violation (oracle disagreement or an identity check
failing).  Reports go to stdout and contain no timestamps, so reruns with
identical inputs and seeds are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from .chain import DEFAULT_ABS_TOL, GENERATOR, ChainConfig, slln_estimate
from .ergodic import (
    check_aperiodic,
    compute_s0,
    doeblin_certificate,
    fitted_rate,
    spectral_rate,
    tv_curve,
)
from .errors import BudgetExceeded, InvariantViolation, JointError
from .fileformat import InputError, read_joint, read_kjoint, read_observable, read_sets
from .kernel import bc_iterates, build_kernel, verify_theorem_41
from .kgibbs import check_k_admissible, oracle_d_trivial
from .sigma import check_gibbs_admissible, find_condition_6_violation, witness_is_valid
from .tip import communicates, is_tip, tip_union_chain

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_ADMISSIBLE = 2
EXIT_INVARIANT = 3

DISCREPANCY_LIMIT = 1e-10


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1); 2 is reserved for ``--strict``."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _num(x):
    """JSON-safe float: NaN becomes null."""
    x = float(x)
    return None if math.isnan(x) else x


def _labels(labels, mask):
    return [labels[k] for k in np.nonzero(mask)[0]]


def _emit(report, headline, fmt, out):
    if fmt == "json":
        out.write(json.dumps(report, indent=2) + "\n")
        return
    out.write(headline + "\n")
    for key, value in report.items():
        if key in ("admissible", "atoms", "verdict"):
            continue
        out.write(f"{key}: {json.dumps(value)}\n")


def _yes(flag):
    return "true" if flag else "false"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# --------------------------------------------------------------------------
# commands


def cmd_check(args, out):
    J = read_joint(args.input)
    rep = check_gibbs_admissible(J)
    report = {"admissible": rep.admissible, "atoms": rep.atom_count}
    if args.witness:
        w = rep.witness
        report["witness"] = None if w is None else {
            "U": _labels(J.x_labels, w.u),
            "V": _labels(J.y_labels, w.v),
        }
    if args.atoms:
        report["atom_cells"] = [
            [[J.x_labels[i], J.y_labels[j]] for i, j in zip(*np.nonzero(rep.atoms == a))]
            for a in range(rep.atom_count)
        ]
        report["atom_masses"] = [float(m) for m in rep.atom_masses(J)]
    if args.oracle:
        violation = find_condition_6_violation(J)
        if (violation is None) != rep.admissible:
            raise InvariantViolation("oracle disagreement: rectangle scan and graph test differ")
        if rep.witness is not None and not witness_is_valid(J, rep.witness):
            raise InvariantViolation("oracle disagreement: witness rectangle is not a violation")
        report["oracle"] = "agree"
    headline = f"admissible: {_yes(rep.admissible)}, atoms: {rep.atom_count}"
    _emit(report, headline, args.format, out)
    if args.strict and not rep.admissible:
        return EXIT_NOT_ADMISSIBLE
    return EXIT_OK


def cmd_iterate(args, out):
    J = read_joint(args.input)
    phi = read_observable(args.phi, J.shape)
    if args.steps < 1:
        raise InputError("--steps must be >= 1")
    trace = bc_iterates(J, phi, args.steps, first=args.first)
    discrepancy = verify_theorem_41(J, phi, max(1, args.steps // 2), first=args.first)
    axis, labels = (1, J.x_labels) if args.first == "y" else (0, J.y_labels)
    even = []
    for n in range(2, args.steps + 1, 2):
        grid = trace.steps[n]
        line = grid[:, 0] if axis == 1 else grid[0, :]
        even.append({"n": n, "values": [_num(v) for v in line]})
    report = {
        "steps": args.steps,
        "first": args.first,
        "axis": "x" if args.first == "y" else "y",
        "labels": list(labels),
        "even_steps": even,
        "max_discrepancy": discrepancy,
    }
    if args.csv:
        rows = []
        for n, grid in enumerate(trace.steps):
            for i, j in np.ndindex(J.shape):
                rows.append([n, J.x_labels[i], J.y_labels[j], repr(float(grid[i, j]))])
        _write_csv(args.csv, ["n", "x", "y", "value"], rows)
    if args.format == "json":
        _emit(report, "", "json", out)
    else:
        name = report["axis"]
        for e in even:
            vals = " ".join("nan" if v is None else repr(v) for v in e["values"])
            out.write(f"phi_{e['n']} by {name}: {vals}\n")
        out.write(f"max discrepancy: {discrepancy:.3e}\n")
    if not discrepancy <= DISCREPANCY_LIMIT:
        sys.stderr.write(f"gibbsgate: kernel/iterate discrepancy {discrepancy:.3e} exceeds {DISCREPANCY_LIMIT}\n")
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_ergodic(args, out):
    J = read_joint(args.input)
    if args.max_steps < 1:
        raise InputError("--max-steps must be >= 1")
    K = build_kernel(J)
    curve = tv_curve(J, K, args.max_steps)
    rep = check_gibbs_admissible(J)
    if curve.ergodic:
        verdict = "ergodic"
    elif rep.atom_count > 1:
        verdict = f"not ergodic: {rep.atom_count} atoms"
    else:
        verdict = f"not converged within {args.max_steps} steps"
    rate = fitted_rate(curve)
    report = {
        "verdict": verdict,
        "atoms": rep.atom_count,
        "s0_full": bool(compute_s0(J, K).all()),
        "aperiodic": check_aperiodic(J, K),
        "final_tv": float(curve.values[-1]),
        "fitted_rate": rate,
    }
    if args.doeblin:
        cert = doeblin_certificate(J)
        if cert is None:
            report["certificate"] = None
        else:
            n = curve.steps
            bound = cert.rate_bound ** n.astype(float)
            report["certificate"] = {
                "U": _labels(J.x_labels, cert.u),
                "V": _labels(J.y_labels, cert.v),
                "s": cert.s,
                "t": cert.t,
                "epsilon": cert.epsilon,
                "rate_bound": cert.rate_bound,
                "dominated": bool(np.all(curve.values <= bound + 1e-12)),
            }
    if args.spectral:
        report["spectral_rate"] = spectral_rate(K)
    if args.csv:
        _write_csv(args.csv, ["n", "sup_tv"], [[int(n), repr(float(v))] for n, v in zip(curve.steps, curve.values)])
    _emit(report, f"verdict: {verdict}", args.format, out)
    return EXIT_OK


def _parse_start(text, J):
    if text == "stationary":
        return "stationary"
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise InputError(f"--start: expected 'stationary' or 'x,y', got {text!r}")
    out = []
    for p, labels in zip(parts, (J.x_labels, J.y_labels)):
        if p in labels:
            out.append(list(labels).index(p))
        else:
            try:
                out.append(int(p))
            except ValueError:
                raise InputError(f"--start: unknown label or index {p!r}") from None
    return tuple(out)


def cmd_simulate(args, out):
    J = read_joint(args.input)
    phi = read_observable(args.phi, J.shape)
    cfg = ChainConfig(seed=args.seed, steps=args.steps, start=_parse_start(args.start, J), chains=args.chains)
    rep = slln_estimate(J, phi, cfg, abs_tol=args.tol)
    report = {
        "verdict": "pass" if rep.verdict else "fail",
        "generator": GENERATOR,
        "seed": args.seed,
        "steps": args.steps,
        "chains": args.chains,
        "target": rep.target,
        "finals": [float(v) for v in rep.finals],
        "max_abs_error": float(rep.final_abs_error.max()),
        "band": rep.band,
    }
    if args.csv:
        idx = list(range(args.stride - 1, args.steps, args.stride))
        if not idx or idx[-1] != args.steps - 1:
            idx.append(args.steps - 1)
        rows = [[k + 1] + [repr(float(m[k])) for m in rep.running_means] for k in idx]
        _write_csv(args.csv, ["n"] + [f"m_{c}" for c in range(args.chains)], rows)
    _emit(report, f"verdict: {report['verdict']}", args.format, out)
    return EXIT_OK


def cmd_kcheck(args, out):
    KJ = read_kjoint(args.input)
    rep = check_k_admissible(KJ)
    report = {"admissible": rep.admissible, "atoms": rep.atom_count, "shape": list(KJ.shape)}
    if args.atoms:
        report["atom_cells"] = [
            [list(map(int, c)) for c in np.argwhere(rep.atoms == a)] for a in range(rep.atom_count)
        ]
    if args.oracle:
        if oracle_d_trivial(KJ) != rep.admissible:
            raise InvariantViolation("oracle disagreement: event enumeration and Hamming test differ")
        report["oracle"] = "agree"
    _emit(report, f"admissible: {_yes(rep.admissible)}, atoms: {rep.atom_count}", args.format, out)
    if args.strict and not rep.admissible:
        return EXIT_NOT_ADMISSIBLE
    return EXIT_OK


def cmd_tip(args, out):
    J = read_joint(args.input)
    sets = read_sets(args.sets, J.shape)
    for k, H in enumerate(sets):
        if not H.any():
            raise InputError(f"{args.sets}: sets[{k}]: empty set")
    reports = [is_tip(J.mu, J.nu, H) for H in sets]
    report = {"tip": [r.tip for r in reports], "components": [r.components for r in reports]}
    if len(sets) == 1:
        headline = f"tip: {_yes(reports[0].tip)}"
    else:
        comms = [communicates(J.mu, J.nu, sets[k], sets[k + 1]) for k in range(len(sets) - 1)]
        report["communicates"] = [
            {"step": k + 1, "communicates": c.communicates, "via": c.via, "index": c.index}
            for k, c in enumerate(comms)
        ]
        chain = tip_union_chain(J.mu, J.nu, sets)
        if chain.valid:
            verdict = "chain valid, union TIP"
        elif chain.reason == "not TIP":
            verdict = f"not TIP at set {chain.failed_step}"
        else:
            verdict = f"no communication at step {chain.failed_step}"
        report["verdict"] = verdict
        headline = verdict
    _emit(report, headline, args.format, out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text", help="report format")

    p = _Parser(prog="gibbsgate", description="Gibbs-sampler admissibility and convergence on finite joints.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def check_args(sp):
        sp.add_argument("input", help="joint file (JSON)")
        sp.add_argument("--witness", action="store_true", help="print a violating rectangle when not admissible")
        sp.add_argument("--atoms", action="store_true", help="list the cells of each atom")
        sp.add_argument("--oracle", action="store_true", help="cross-check against the rectangle scan")
        sp.add_argument("--strict", action="store_true", help="exit 2 when not admissible")

    sp = sub.add_parser("check", parents=[common], help="decide Gibbs admissibility")
    check_args(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("atoms", parents=[common], help="same as check --atoms")
    check_args(sp)
    sp.set_defaults(func=cmd_check, atoms=True)

    sp = sub.add_parser("iterate", parents=[common], help="alternating conditional expectations")
    sp.add_argument("input")
    sp.add_argument("--phi", required=True, help="observable file with a 'values' grid")
    sp.add_argument("--steps", type=int, default=4)
    sp.add_argument("--first", choices=("y", "x"), default="y", help="coordinate conditioned on first")
    sp.add_argument("--csv", help="write every step's grid as CSV (n,x,y,value)")
    sp.set_defaults(func=cmd_iterate)

    sp = sub.add_parser("ergodic", parents=[common], help="total-variation curve and certificates")
    sp.add_argument("input")
    sp.add_argument("--max-steps", type=int, default=200)
    sp.add_argument("--doeblin", action="store_true", help="search for a minorization certificate")
    sp.add_argument("--spectral", action="store_true", help="report the second eigenvalue modulus")
    sp.add_argument("--csv", help="write the curve as CSV (n,sup_tv)")
    sp.set_defaults(func=cmd_ergodic)

    sp = sub.add_parser("simulate", parents=[common], help="seeded chain and running means")
    sp.add_argument("input")
    sp.add_argument("--phi", required=True)
    sp.add_argument("--steps", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--chains", type=int, default=1)
    sp.add_argument("--start", default="stationary", help="'stationary' or 'x,y' (labels or indices)")
    sp.add_argument("--tol", type=float, default=DEFAULT_ABS_TOL, help="absolute band for the verdict")
    sp.add_argument("--csv", help="write running means as CSV (n,m_0,...)")
    sp.add_argument("--stride", type=int, default=1, help="CSV row spacing")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("kcheck", parents=[common], help="k-component admissibility")
    sp.add_argument("input", help="file with 'shape' and flat 'weights'")
    sp.add_argument("--atoms", action="store_true")
    sp.add_argument("--oracle", action="store_true", help="cross-check by enumerating events")
    sp.add_argument("--strict", action="store_true")
    sp.set_defaults(func=cmd_kcheck)

    sp = sub.add_parser("tip", parents=[common], help="TIP, communication and union chains")
    sp.add_argument("input", help="joint file supplying shape and base measures")
    sp.add_argument("--sets", required=True, help="file with a 'sets' list of 0/1 grids")
    sp.set_defaults(func=cmd_tip)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "steps", 1) < 1 or getattr(args, "chains", 1) < 1 or getattr(args, "stride", 1) < 1:
        sys.stderr.write("gibbsgate: error: --steps, --chains and --stride must be >= 1\n")
        return EXIT_INPUT
    try:
        return args.func(args, out)
    except InvariantViolation as exc:
        sys.stderr.write(f"gibbsgate: invariant violation: {exc}\n")
        return EXIT_INVARIANT
    except (InputError, JointError, BudgetExceeded, ValueError) as exc:
        sys.stderr.write(f"gibbsgate: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
