"""Command-line driver.

Subcommands:
  run      full pipeline: axioms, spectra, theorem verdicts, PCG solves
  axioms   operator-identity residuals only
  spectra  eigenvalues, omega bounds, theorem verdicts
  pcg      PCG telemetry for both solver routes
  harness  randomized checks of the abstract eigenvalue results

Exit codes: 0 all verdicts pass, 1 I/O error, 2 insufficient coarse space
(tilde(S) not SPD), 3 axiom or verdict failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import krylov, precond, spectral
from .errors import EmptyCoarseSpace, NotPositiveDefinite, UnsupportedCoarseSpace
from .harness import lemma1_check, make_instance, run_harness
from .linalg import chol_solve, cholesky
from .operators import axiom_check
from .pipeline import Instance, RunConfig, build_instance

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_IO = 1
EXIT_NOT_SPD = 2
EXIT_VERDICT = 3


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def _write_json(report: dict, path: str | None) -> None:
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    if path is None or path == "-":
        print(text)
    else:
        with open(path, "w") as handle:
            handle.write(text + "\n")


def _write_eigs(prefix: str, report: spectral.SpectralReport) -> None:
    for name, eigs in (("bddc", report.eigs_bddc), ("fetidp", report.eigs_feti)):
        with open(f"{prefix}_{name}.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["index", "eigenvalue"])
            for idx, val in enumerate(eigs):
                writer.writerow([idx, repr(float(val))])


def _config_from_args(args) -> RunConfig:
    rho_pattern = "uniform" if args.rho_ratio == 1.0 else "checkerboard"
    return RunConfig(
        nx=args.nx,
        ny=args.ny,
        m=args.m,
        coarse=args.coarse,
        scaling=args.scaling,
        rho_pattern=rho_pattern,
        rho_ratio=args.rho_ratio,
        tol=args.tol,
        maxit=args.maxit,
        seed=args.seed,
    )


def _config_dict(config: RunConfig) -> dict:
    return {
        "nx": config.nx,
        "ny": config.ny,
        "m": config.m,
        "coarse": config.coarse,
        "scaling": config.scaling,
        "rho_pattern": config.rho_pattern,
        "rho_ratio": config.rho_ratio,
        "tol": config.tol,
        "maxit": config.maxit,
        "seed": config.seed,
    }


def _pcg_section(inst: Instance) -> dict:
    """BDDC-PCG on the assembled problem and FETI-DP-PCG on the dual problem,
    both checked against the direct solve."""
    ops = inst.ops
    f = inst.unit_load()
    direct = chol_solve(cholesky(ops.shat), f)
    direct_norm = float(np.linalg.norm(direct)) or 1.0

    bddc_trace = krylov.pcg(
        lambda v: ops.shat @ v,
        lambda r: precond.bddc_apply(inst.bddc, r),
        f,
        tol=inst.config.tol,
        maxit=inst.config.maxit,
        exact=direct,
    )
    bddc_err = float(np.linalg.norm(bddc_trace.x - direct)) / direct_norm

    if inst.feti.n_lambda > 0:
        rhs = precond.feti_rhs(inst.feti, f)
        lam_exact = chol_solve(inst.feti.f_chol, rhs)
        feti_trace = krylov.pcg(
            lambda lam: precond.feti_F_apply(inst.feti, lam),
            lambda mu: precond.feti_M_apply(inst.feti, mu),
            rhs,
            tol=inst.config.tol,
            maxit=inst.config.maxit,
            exact=lam_exact,
        )
        u = precond.primal_recover(inst.feti, feti_trace.x, f)
        feti_err = float(np.linalg.norm(u - direct)) / direct_norm
        feti_iters = feti_trace.iterations
        feti_converged = feti_trace.converged
    else:
        feti_err = bddc_err
        feti_iters = 0
        feti_converged = True

    return {
        "bddc_iterations": bddc_trace.iterations,
        "bddc_converged": bddc_trace.converged,
        "bddc_rel_error": bddc_err,
        "fetidp_iterations": feti_iters,
        "fetidp_converged": feti_converged,
        "fetidp_rel_error": feti_err,
    }


def cmd_run(args) -> int:
    config = _config_from_args(args)
    try:
        inst = build_instance(config)
    except (NotPositiveDefinite, EmptyCoarseSpace, UnsupportedCoarseSpace) as err:
        _write_json(
            {"schema": SCHEMA_VERSION, "config": _config_dict(config),
             "error": str(err), "error_kind": type(err).__name__},
            args.out,
        )
        return EXIT_NOT_SPD

    report = {"schema": SCHEMA_VERSION, "config": _config_dict(config)}
    axioms = axiom_check(inst.ops)
    report["axioms"] = {
        "residuals": axioms.residuals,
        "rank_b": axioms.rank_b,
        "null_b_dim_ok": axioms.null_b_dim_ok,
        "passed": axioms.passed,
    }
    report["dimensions"] = {
        "w": inst.ops.s.shape[0],
        "w_tilde": inst.ops.w_tilde_dim,
        "w_hat": inst.ops.w_hat_dim,
        "n_lambda": inst.ops.n_lambda,
    }
    report["degenerate"] = inst.degenerate
    report["w_tilde_equals_w_hat"] = inst.w_tilde_equals_w_hat

    if inst.degenerate:
        report["note"] = "no free interface dofs; all spaces are trivial"
        _write_json(report, args.out)
        return EXIT_OK if axioms.passed else EXIT_VERDICT

    spec_report = spectral.spectral_report(inst.ops, inst.bddc, inst.feti)
    report["spectra"] = {
        "omega_bddc": spec_report.omega_bddc,
        "omega_fetidp": spec_report.omega_feti,
        "kappa_bddc": spec_report.kappa_bddc,
        "kappa_fetidp": spec_report.kappa_feti,
        "mult_one_bddc": spec_report.comparison.mult_one_bddc,
        "mult_one_fetidp": spec_report.comparison.mult_one_feti,
        "operator_identity_residual": spec_report.operator_identity_residual,
        "theorem_flags": spec_report.flags,
        "tolerances": spec_report.tolerances,
    }
    report["pcg"] = _pcg_section(inst)
    if args.eigs:
        _write_eigs(args.eigs, spec_report)
    _write_json(report, args.out)
    if not axioms.passed:
        return EXIT_VERDICT
    if not spec_report.passed:
        return EXIT_VERDICT
    if not (report["pcg"]["bddc_converged"] and report["pcg"]["fetidp_converged"]):
        return EXIT_VERDICT
    return EXIT_OK


def cmd_axioms(args) -> int:
    config = _config_from_args(args)
    try:
        inst = build_instance(config)
    except (NotPositiveDefinite, EmptyCoarseSpace, UnsupportedCoarseSpace) as err:
        _write_json({"schema": SCHEMA_VERSION, "error": str(err)}, args.out)
        return EXIT_NOT_SPD
    axioms = axiom_check(inst.ops)
    _write_json(
        {
            "schema": SCHEMA_VERSION,
            "config": _config_dict(config),
            "residuals": axioms.residuals,
            "rank_b": axioms.rank_b,
            "null_b_dim_ok": axioms.null_b_dim_ok,
            "passed": axioms.passed,
        },
        args.out,
    )
    return EXIT_OK if axioms.passed else EXIT_VERDICT


def cmd_spectra(args) -> int:
    config = _config_from_args(args)
    try:
        inst = build_instance(config)
    except (NotPositiveDefinite, EmptyCoarseSpace, UnsupportedCoarseSpace) as err:
        _write_json({"schema": SCHEMA_VERSION, "error": str(err)}, args.out)
        return EXIT_NOT_SPD
    if inst.degenerate:
        _write_json(
            {"schema": SCHEMA_VERSION, "config": _config_dict(config),
             "degenerate": True},
            args.out,
        )
        return EXIT_OK
    spec_report = spectral.spectral_report(inst.ops, inst.bddc, inst.feti)
    _write_json(
        {
            "schema": SCHEMA_VERSION,
            "config": _config_dict(config),
            "eigs_bddc": spec_report.eigs_bddc,
            "eigs_fetidp": spec_report.eigs_feti,
            "omega_bddc": spec_report.omega_bddc,
            "omega_fetidp": spec_report.omega_feti,
            "kappa_bddc": spec_report.kappa_bddc,
            "kappa_fetidp": spec_report.kappa_feti,
            "theorem_flags": spec_report.flags,
            "tolerances": spec_report.tolerances,
        },
        args.out,
    )
    if args.eigs:
        _write_eigs(args.eigs, spec_report)
    return EXIT_OK if spec_report.passed else EXIT_VERDICT


def cmd_pcg(args) -> int:
    config = _config_from_args(args)
    try:
        inst = build_instance(config)
    except (NotPositiveDefinite, EmptyCoarseSpace, UnsupportedCoarseSpace) as err:
        _write_json({"schema": SCHEMA_VERSION, "error": str(err)}, args.out)
        return EXIT_NOT_SPD
    if inst.degenerate:
        _write_json(
            {"schema": SCHEMA_VERSION, "config": _config_dict(config),
             "degenerate": True},
            args.out,
        )
        return EXIT_OK
    section = _pcg_section(inst)
    _write_json(
        {"schema": SCHEMA_VERSION, "config": _config_dict(config), "pcg": section},
        args.out,
    )
    ok = section["bddc_converged"] and section["fetidp_converged"]
    return EXIT_OK if ok else EXIT_VERDICT


def cmd_harness(args) -> int:
    summary = run_harness(args.instances, args.n_max, args.seed)
    if args.inject_fault:
        inst = make_instance(max(4, min(args.n_max, 8)), 2, args.seed)
        # deliberate violation of L T = I: shrinking L scales the whole
        # spectrum below the certified lower bound of one
        inst.l *= 1e-6
        verdict = lemma1_check(inst)
        summary["fault_injection_detected"] = not verdict.ok
        summary["all_passed"] = summary["all_passed"] and False
    _write_json({"schema": SCHEMA_VERSION, "summary": summary}, args.out)
    return EXIT_OK if summary["all_passed"] else EXIT_VERDICT


def _add_instance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--nx", type=int, default=2)
    parser.add_argument("--ny", type=int, default=2)
    parser.add_argument("--m", type=int, default=2)
    parser.add_argument(
        "--coarse", choices=("corners", "corners-edges", "none"), default="corners"
    )
    parser.add_argument(
        "--scaling", choices=("multiplicity", "stiffness"), default="multiplicity"
    )
    parser.add_argument(
        "--rho-ratio",
        type=float,
        default=1.0,
        help="1.0 for a uniform coefficient, otherwise a checkerboard with this ratio",
    )
    parser.add_argument("--tol", type=float, default=1e-10)
    parser.add_argument("--maxit", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="JSON report path (default stdout)")
    parser.add_argument("--eigs", default=None, help="prefix for eigenvalue CSV tables")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddlab")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func in (
        ("run", cmd_run),
        ("axioms", cmd_axioms),
        ("spectra", cmd_spectra),
        ("pcg", cmd_pcg),
    ):
        p = sub.add_parser(name)
        _add_instance_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("harness")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--n-max", type=int, default=30)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--inject-fault", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_harness)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
