"""Command-line front end.

Every command prints a JSON report (or writes it to ``--report``).  Reports
contain no timestamps or absolute timings, so identical inputs and flags give
byte-identical output.

Exit codes:
    0  success
    1  internal invariant violated (a bug)
    2  input or contract error (unparsable file, dimension mismatch,
       non-symmetric coupling, non-monotone or off-grid operator, node cap)
    3  fixed-point solve did not converge within the sweep budget
    4  property suite found a failure
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .core import conjugate1, conjugate2, diag_halves, sym_conjugate, symmetrize
from .errors import ContractError, InvariantViolation, ResourceError
from .fitzpatrick import (
    build_grid_coupling,
    fitzpatrick_grid,
    ft_membership_grid,
    monotonicity_check,
    pi_grid,
    sample_nodes,
    self_conjugate_representer,
)
from .fixpoint import SELECTION_RULES, DescentConfig, minimality_probe, solve_fixpoint
from .nonsymmetric import counterexample_fixture, general_minimal
from .proptest import DEFAULT_SEED, run_suite

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_NONCONVERGED = 3
EXIT_PROPERTY = 4


class Outcome:
    """What a command hands back to :func:`main`."""

    def __init__(self, inputs: dict, outputs: dict, diagnostics: dict, status: int = EXIT_OK):
        self.inputs = inputs
        self.outputs = outputs
        self.diagnostics = diagnostics
        self.status = status


def _digests(**paths) -> dict:
    return {role: {"path": str(p), "sha256": io.file_digest(p)} for role, p in paths.items() if p}


def _config(args) -> DescentConfig:
    return DescentConfig(
        tolerance=args.tol,
        max_sweeps=args.max_sweeps,
        selection_rule=args.rule,
        record_trace=bool(getattr(args, "trace", None)),
    )


def cmd_conjugate(args) -> Outcome:
    phi = io.load_coupling(args.coupling)
    h = io.load_valuation(args.valuation, phi.n)
    if args.which == "c1":
        out = conjugate1(phi, h)
    elif args.which == "c2":
        out = conjugate2(phi, h)
    else:
        out = sym_conjugate(phi, h)
    return Outcome(
        _digests(coupling=args.coupling, valuation=args.valuation),
        {"conjugate": io.valuation_payload(out)},
        {"n": phi.n, "which": args.which, "symmetric": phi.symmetric},
    )


def cmd_fixpoint(args) -> Outcome:
    phi = io.load_coupling(args.coupling)
    if not phi.symmetric and not args.symmetrize:
        raise ContractError("coupling is not symmetric; pass --symmetrize to solve for max(phi, phi^T)")
    start = io.load_valuation(args.start, phi.n) if args.start else None
    cfg = _config(args)
    if args.symmetrize:
        sym = symmetrize(phi)
        res = general_minimal(phi, start if start is not None else [float("inf")] * phi.n, cfg)
    else:
        sym = phi
        res = solve_fixpoint(phi, start, cfg)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="") as handle:
            io.write_trace_csv(res.trace, handle)
    diagnostics = res.summary()
    diagnostics.pop("h")
    diagnostics["tolerance"] = cfg.tolerance
    if res.converged:
        probe = minimality_probe(sym, res.h, args.epsilon, tolerance=cfg.tolerance)
        diagnostics["minimality_probe"] = {
            "epsilon": probe.epsilon,
            "probed": len(probe.probed),
            "failures": list(probe.failures),
            "ok": probe.ok,
        }
    else:
        diagnostics["minimality_probe"] = None
    return Outcome(
        _digests(coupling=args.coupling, start=args.start),
        {"h": io.valuation_payload(res.h), "diag_halves": io.valuation_payload(diag_halves(sym))},
        diagnostics,
        EXIT_OK if res.converged else EXIT_NONCONVERGED,
    )


def _tsv(path: Optional[str], grid, h) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            io.write_grid_tsv(grid, h, handle)


def cmd_fitz(args) -> Outcome:
    T = io.load_operator(args.operator)
    grid = io.load_grid(args.grid)
    mono = monotonicity_check(T)
    if not mono:
        i, j = mono.pair
        raise ContractError(f"operator sample is not monotone: pairs {i} and {j} give {mono.value}")
    inputs = _digests(operator=args.operator, grid=args.grid, function=args.function)
    nodes = sorted(set(sample_nodes(T, grid)))
    pi = pi_grid(grid)
    diagnostics = {"nodes": grid.size, "d": grid.d, "sample_nodes": nodes}

    if args.action == "phi":
        ft = fitzpatrick_grid(T, grid)
        _tsv(args.tsv, grid, ft)
        diagnostics["equals_pi_on_sample"] = all(ft[i] == pi[i] for i in nodes)
        diagnostics["above_pi"] = bool(np.all(pi.le(ft)))
        return Outcome(inputs, {"phi_T": io.valuation_payload(ft)}, diagnostics)

    if args.action == "represent":
        rep = self_conjugate_representer(T, grid, _config(args))
        res = rep.result
        _tsv(args.tsv, grid, res.h)
        summary = res.summary()
        summary.pop("h")
        diagnostics.update(summary)
        diagnostics["start"] = rep.start
        diagnostics["start_check"] = rep.start_check
        diagnostics["membership"] = _membership(rep.membership)
        if res.converged:
            probe = minimality_probe(build_grid_coupling(grid), res.h, args.epsilon, tolerance=args.tol)
            diagnostics["minimality_probe"] = {"probed": len(probe.probed), "failures": list(probe.failures)}
        return Outcome(
            inputs,
            {"h": io.valuation_payload(res.h)},
            diagnostics,
            EXIT_OK if res.converged else EXIT_NONCONVERGED,
        )

    if not args.function:
        raise ContractError("fitz check needs --function FILE")
    h = io.read_grid_function(args.function, grid)
    report = ft_membership_grid(T, grid, h, args.tol)
    diagnostics["membership"] = _membership(report)
    return Outcome(inputs, {"passed": report.passed, "ok": report.ok}, diagnostics)


def _membership(report) -> dict:
    return {
        "passed": report.passed,
        "below_pi": list(report.below_pi),
        "off_graph": list(report.off_graph),
        "nonconvex": [list(t) for t in report.nonconvex],
        "triples_checked": report.triples_checked,
    }


def cmd_proptest(args) -> Outcome:
    report = run_suite(args.cases, args.seed, args.size, mutate=args.mutate)
    diagnostics = {"failures": len(report.failures)}
    if report.counterexample is not None:
        path = Path(args.counterexample)
        path.write_text(io.dumps(report.counterexample), encoding="utf-8")
        diagnostics["counterexample"] = str(path)
        diagnostics["counterexample_property"] = report.counterexample["property"]
    outputs = report.payload()
    outputs["failures"] = outputs["failures"][:50]
    return Outcome({}, outputs, diagnostics, EXIT_OK if report.ok else EXIT_PROPERTY)


def cmd_fixture(args) -> Outcome:
    ex = counterexample_fixture()
    out = Path(args.directory)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "coupling": out / "coupling.json",
        "valuation": out / "valuation.json",
    }
    files["coupling"].write_text(io.dumps(io.coupling_payload(ex.phi)), encoding="utf-8")
    files["valuation"].write_text(io.dumps(io.valuation_payload(ex.h)), encoding="utf-8")
    return Outcome(
        {},
        {role: str(p) for role, p in files.items()},
        {
            "expected_c1": ex.expected_c1.tokens(),
            "expected_c2": ex.expected_c2.tokens(),
        },
    )


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-9, help="gap tolerance (default 1e-9)")
    p.add_argument("--max-sweeps", type=int, default=10_000, help="descent step budget")
    p.add_argument("--rule", choices=SELECTION_RULES, default="max-gap", help="index selection rule")
    p.add_argument("--epsilon", type=float, default=1e-3, help="minimality probe step")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conjfix",
        description="Generalized conjugations, self-conjugate fixed points and Fitzpatrick grids.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="exit codes: 0 ok, 1 internal error, 2 input error, 3 not converged, 4 property failure",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", metavar="PATH", help="write the JSON report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)
    add = lambda name, **kw: sub.add_parser(name, parents=[common], **kw)

    p = add("conjugate", help="apply C1, C2 or the symmetric conjugation")
    p.add_argument("coupling")
    p.add_argument("valuation")
    p.add_argument("--which", choices=("c1", "c2", "sym"), default="c1")
    p.set_defaults(func=cmd_conjugate)

    p = add("fixpoint", help="descend to a self-conjugate function")
    p.add_argument("coupling")
    p.add_argument("--start", metavar="VALUATION", help="starting function in H (default +inf)")
    p.add_argument("--trace", metavar="CSV", help="write one row per descent step")
    p.add_argument("--symmetrize", action="store_true", help="solve for max(phi, phi^T)")
    _solver_flags(p)
    p.set_defaults(func=cmd_fixpoint)

    p = add("fitz", help="Fitzpatrick experiments on a product grid")
    p.add_argument("action", choices=("phi", "represent", "check"))
    p.add_argument("operator")
    p.add_argument("grid")
    p.add_argument("--function", metavar="FILE", help="grid function (JSON or TSV) for check")
    p.add_argument("--tsv", metavar="PATH", help="write node values as TSV")
    _solver_flags(p)
    p.set_defaults(func=cmd_fitz)

    p = add("proptest", help="randomized identity suite")
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--size", type=int, default=16, help="largest n")
    p.add_argument("--counterexample", default="proptest-counterexample.json", metavar="PATH")
    p.add_argument("--mutate", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_proptest)

    p = add("fixture", help="write the two-point counterexample files")
    p.add_argument("directory")
    p.set_defaults(func=cmd_fixture)
    return parser


def _echo(args) -> dict:
    skip = {"func", "report"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    report = {"command": _echo(args)}
    try:
        outcome = args.func(args)
    except (ContractError, ResourceError) as exc:
        print(f"conjfix: error: {exc}", file=sys.stderr)
        report.update(error=str(exc), exit_status=EXIT_INPUT)
    except InvariantViolation as exc:
        print(f"conjfix: internal error: {exc}", file=sys.stderr)
        report.update(error=str(exc), exit_status=EXIT_INTERNAL)
    else:
        report.update(
            inputs=outcome.inputs,
            outputs=outcome.outputs,
            diagnostics=outcome.diagnostics,
            exit_status=outcome.status,
        )
    text = io.dumps(report)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return report["exit_status"]


if __name__ == "__main__":
    sys.exit(main())
