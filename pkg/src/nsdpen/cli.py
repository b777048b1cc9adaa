"""Batch command-line front end.

Two subcommands: ``solve`` runs the outer penalty method on a registered
problem and writes a JSON report plus an optional JSONL iterate trace;
``check`` audits the derivative hooks of a problem at a point and reports
optimality residuals with recovered multipliers.

Exit codes: 0 success, 1 failed derivative audit (check), 2 iteration cap
reached, 3 inner-solver failure or infeasible start, 64 bad flags,
65 unknown problem.  Reports are written atomically (temp file + rename) and
identical flags produce byte-identical numeric payloads; wall time lives in
a separate non-compared field.
"""

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import driver, model, optimality, problems
from .errors import InvalidInputError, StartNotFeasibleError, UnknownProblemError

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_AUDIT_FAILED = 1
EXIT_MAX_OUTER = 2
EXIT_SOLVE_FAILED = 3
EXIT_USAGE = 64
EXIT_UNKNOWN_PROBLEM = 65


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def sym_to_lower(Z: np.ndarray) -> dict:
    """Serialize a symmetric matrix as its row-major lower triangle."""
    Z = np.asarray(Z, dtype=float)
    d = Z.shape[0]
    lower = [float(Z[i, j]) for i in range(d) for j in range(i + 1)]
    return {"dim": d, "lower": lower}


def lower_to_sym(doc: dict) -> np.ndarray:
    """Rebuild the symmetric matrix from its serialized lower triangle."""
    d = int(doc["dim"])
    Z = np.zeros((d, d))
    it = iter(doc["lower"])
    for i in range(d):
        for j in range(i + 1):
            v = float(next(it))
            Z[i, j] = v
            Z[j, i] = v
    return Z


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _trace_row(rec: driver.IterateRecord) -> dict:
    return {
        "k": rec.k,
        "gamma": rec.gamma,
        "delta": rec.delta,
        "u": rec.u,
        "stationarity": rec.stationarity,
        "complementarity": rec.complementarity,
        "second_order": rec.second_order,
        "epsilon": rec.epsilon,
        "subspace_dim": rec.subspace_dim,
        "f_value": rec.f_value,
        "script_F_value": rec.script_F_value,
        "script_F_at_start": rec.script_F_at_start,
        "xhat_branch": rec.xhat_branch,
        "inner_iterations": rec.inner_iterations,
        "x": [float(v) for v in rec.x],
        "y": [float(v) for v in rec.y],
        "Z": sym_to_lower(rec.Z),
    }


def _report_document(report: driver.SolveReport, seed: int | None) -> dict:
    cfg = report.config
    iterations = []
    for rec in report.iterates:
        iterations.append({
            "k": rec.k,
            "gamma": rec.gamma,
            "delta": rec.delta,
            "u": rec.u,
            "stationarity": rec.stationarity,
            "complementarity": rec.complementarity,
            "second_order": rec.second_order,
            "epsilon": rec.epsilon,
            "subspace_dim": rec.subspace_dim,
            "f_value": rec.f_value,
            "script_F_value": rec.script_F_value,
            "xhat_branch": rec.xhat_branch,
        })
    final = report.final
    doc = {
        "schema_version": SCHEMA_VERSION,
        "problem": report.problem,
        "config": {
            "eta": cfg.eta,
            "theta": cfg.theta,
            "gamma0": cfg.gamma0,
            "delta0": cfg.delta0,
            "beta": cfg.beta,
            "tol_feas": cfg.tol_feas,
            "tol_opt": cfg.tol_opt,
            "max_outer": cfg.max_outer,
            "seed": seed,
        },
        "iterations": iterations,
        "final_status": report.final_status,
        "detail": report.detail,
        "b_count": report.b_count,
        "final": None,
        "wall_time_sec": report.wall_time_sec,
    }
    if final is not None:
        doc["final"] = {
            "x": [float(v) for v in final.x],
            "y": [float(v) for v in final.y],
            "Z": sym_to_lower(final.Z),
            "f_value": final.f_value,
            "u": final.u,
        }
    return doc


def _add_solve_parser(sub):
    p = sub.add_parser("solve", help="run the penalty method on a registered problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--theta", type=float, default=10.0)
    p.add_argument("--delta0", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--tol-feas", type=float, default=1e-8)
    p.add_argument("--tol-opt", type=float, default=1e-6)
    p.add_argument("--max-outer", type=int, default=60)
    p.add_argument("--trace", default=None, help="JSONL path, one iterate record per line")
    p.add_argument("--report", default=None, help="JSON report path")
    p.add_argument("--seed", type=int, default=None, help="reserved for randomized starts")


def _add_check_parser(sub):
    p = sub.add_parser("check", help="audit derivatives and report residuals at a point")
    p.add_argument("--problem", required=True)
    p.add_argument("--at", default="start", help='comma-separated point or "start"')
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--json", default=None, help="write the audit document to this path")


def _cmd_solve(args) -> int:
    try:
        entry = problems.get_problem(args.problem)
    except UnknownProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_PROBLEM
    try:
        cfg = driver.PenaltyConfig(
            eta=args.eta, theta=args.theta, gamma0=args.gamma0,
            delta0=args.delta0, beta=args.beta,
            tol_feas=args.tol_feas, tol_opt=args.tol_opt,
            max_outer=args.max_outer,
        ).validate()
    except InvalidInputError as exc:
        raise _UsageError(str(exc)) from None

    trace_rows: list[dict] = []
    sink = (lambda rec: trace_rows.append(_trace_row(rec))) if args.trace else None
    try:
        report = driver.solve(entry.problem, cfg, b_count=entry.b_count_at_solution, sink=sink)
    except StartNotFeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVE_FAILED

    if args.trace:
        _atomic_write(args.trace, "".join(json.dumps(row, sort_keys=True) + "\n" for row in trace_rows))
    if args.report:
        _atomic_write(args.report, _dump_json(_report_document(report, args.seed)))

    final = report.final
    print(f"{report.problem}: {report.final_status} after {len(report.iterates)} outer iterations"
          + (f" ({report.detail})" if report.detail else ""))
    if final is not None:
        print(f"  u={final.u:.3e} stationarity={final.stationarity:.3e} "
              f"complementarity={final.complementarity:.3e} f={final.f_value:.10g}")
    if report.final_status == driver.FEAS_OPT_REACHED:
        return EXIT_OK
    if report.final_status == driver.MAX_OUTER:
        return EXIT_MAX_OUTER
    return EXIT_SOLVE_FAILED


def _parse_point(text: str, entry) -> np.ndarray:
    if text.strip() == "start":
        return np.asarray(entry.problem.start_point, dtype=float)
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise _UsageError(f"cannot parse point {text!r}") from None
    if len(values) != entry.problem.n:
        raise _UsageError(f"point has {len(values)} entries, problem {entry.problem.name!r} needs {entry.problem.n}")
    return np.asarray(values, dtype=float)


def _cmd_check(args) -> int:
    try:
        entry = problems.get_problem(args.problem)
    except UnknownProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_PROBLEM
    if not args.gamma > 0:
        raise _UsageError("gamma must be positive")
    x = _parse_point(args.at, entry)

    audit = model.audit_derivatives(entry.problem, x)
    res, mult = optimality.evaluate_residuals(entry.problem, x, args.gamma,
                                              entry.b_count_at_solution)
    print(f"derivative audit at {list(map(float, x))}:")
    for hook, err in sorted(audit.errors.items()):
        flag = "FAIL" if hook in audit.failures else "ok"
        print(f"  {hook:8s} rel.err={err:.3e}  [{flag}]")
    print(f"residuals (gamma={args.gamma:g}):")
    print(f"  stationarity={res.stationarity:.6e} u={res.feasibility_u:.6e} "
          f"complementarity={res.complementarity:.6e}")
    print(f"  second_order={res.second_order:.6e} subspace_dim={res.subspace_dim}")

    if args.json:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "problem": entry.problem.name,
            "at": [float(v) for v in x],
            "gamma": args.gamma,
            "audit": {
                "errors": {k: v for k, v in sorted(audit.errors.items())},
                "step": audit.step,
                "passed": audit.passed,
                "failures": sorted(audit.failures),
            },
            "residuals": {
                "stationarity": res.stationarity,
                "feasibility_u": res.feasibility_u,
                "complementarity": res.complementarity,
                "second_order": res.second_order,
                "epsilon": res.epsilon,
                "subspace_dim": res.subspace_dim,
            },
            "multipliers": {
                "y": [float(v) for v in mult.y],
                "Z": sym_to_lower(mult.Z),
            },
        }
        _atomic_write(args.json, _dump_json(doc))
    return EXIT_OK if audit.passed else EXIT_AUDIT_FAILED


def main(argv=None) -> int:
    parser = _Parser(prog="nsdpen", description="penalty-method toolkit for nonlinear SDPs")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_solve_parser(sub)
    _add_check_parser(sub)
    try:
        args = parser.parse_args(argv)
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_check(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
