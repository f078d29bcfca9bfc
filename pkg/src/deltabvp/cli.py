"""Command-line front end: problem files in, tables and reports out.

Problem files are INI-style::

    [grid]
    points = 0 0.25 0.6 1.0        # or: uniform = 0 1 25
    [equation]
    f = 1 - x^2                    # vars t, x, y
    [boundary]
    g_right = 1.0                  # or: g = t + 1  (evaluated at t_{n+2})
    [bounds]
    alpha = 0
    beta  = 1
    [solver]
    method = auto                  # auto | newton | damped
    tol = 1e-10
    max_iter = 10000
    damping = 0.5

Exit codes: 0 solved and verified, 1 usage or parse error, 2 certificate,
ordering or strict-assumption failure, 3 non-convergence, 4 solved but
verification failed.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .auxiliary import AuxProblem, CertificationError, aux_f, build_aux_problem, sigma
from .bounds import BoundsPair, check_lower, check_ordering, check_upper
from .grid import Grid, GridError, GridFunction, make_grid, uniform_grid
from .problem import BVProblem, equation_residual
from .solver import (
    AssumptionViolationError,
    RangeViolationError,
    SolveOptions,
    SolveReport,
    brouwer_1d,
    solve,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CERTIFICATE = 2
EXIT_NONCONVERGENCE = 3
EXIT_VERIFICATION = 4


class ProblemFileError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemFile:
    problem: BVProblem
    bounds: BoundsPair | None
    options: SolveOptions
    path: str


def _eval_over_t(source: str, grid: Grid) -> GridFunction:
    e = ex.parse(source, {"t"})
    fn = ex.as_callable(e, ("t",))
    return GridFunction(grid, np.array([fn(float(t)) for t in grid.points]))


def load_problem_file(path: str, option_overrides: dict | None = None) -> ProblemFile:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), delimiters=("=",))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from None
    except configparser.Error as exc:
        raise ProblemFileError(f"malformed problem file: {exc}") from None

    if "grid" not in cp:
        raise ProblemFileError("missing [grid] section")
    gsec = cp["grid"]
    has_points, has_uniform = "points" in gsec, "uniform" in gsec
    if has_points == has_uniform:
        raise ProblemFileError("[grid] needs exactly one of 'points' or 'uniform'")
    try:
        if has_points:
            grid = make_grid([float(tok) for tok in gsec["points"].split()])
        else:
            toks = gsec["uniform"].split()
            if len(toks) != 3:
                raise ProblemFileError("uniform takes three values: a b n")
            grid = uniform_grid(float(toks[0]), float(toks[1]), int(toks[2]))
    except (ValueError, GridError) as exc:
        if isinstance(exc, ProblemFileError):
            raise
        raise ProblemFileError(f"bad grid: {exc}") from None

    if "equation" not in cp or "f" not in cp["equation"]:
        raise ProblemFileError("missing [equation] f")
    try:
        f = ex.parse(cp["equation"]["f"], {"t", "x", "y"})
    except ex.ExprError as exc:
        raise ProblemFileError(f"bad f expression: {exc}") from None

    if "boundary" not in cp:
        raise ProblemFileError("missing [boundary] section")
    bsec = cp["boundary"]
    try:
        if "g_right" in bsec:
            problem = BVProblem(grid=grid, f=f, g_right=float(bsec["g_right"]))
        elif "g" in bsec:
            problem = BVProblem.from_g_expr(grid, f, ex.parse(bsec["g"], {"t"}))
        else:
            raise ProblemFileError("[boundary] needs g_right or g")
    except (ValueError, ex.ExprError) as exc:
        if isinstance(exc, ProblemFileError):
            raise
        raise ProblemFileError(f"bad boundary: {exc}") from None

    bounds = None
    if "bounds" in cp:
        bsec = cp["bounds"]
        if "alpha" not in bsec or "beta" not in bsec:
            raise ProblemFileError("[bounds] needs both alpha and beta")
        try:
            bounds = BoundsPair(
                alpha=_eval_over_t(bsec["alpha"], grid),
                beta=_eval_over_t(bsec["beta"], grid),
            )
        except ex.ExprError as exc:
            raise ProblemFileError(f"bad bounds expression: {exc}") from None

    opts_kw: dict = {}
    if "solver" in cp:
        ssec = cp["solver"]
        if "method" in ssec:
            opts_kw["method"] = ssec["method"].strip()
        if "tol" in ssec:
            opts_kw["tol"] = float(ssec["tol"])
        if "max_iter" in ssec:
            opts_kw["max_iter"] = int(ssec["max_iter"])
        if "damping" in ssec:
            opts_kw["damping"] = float(ssec["damping"])
    opts_kw.update(option_overrides or {})
    try:
        options = SolveOptions(**opts_kw)
    except ValueError as exc:
        raise ProblemFileError(f"bad solver options: {exc}") from None
    return ProblemFile(problem=problem, bounds=bounds, options=options, path=path)


def scan_constant_bounds(problem: BVProblem, lo: float, hi: float,
                         count: int = 50, tol: float = 1e-10):
    """Convenience search for certified constant bounds over a value range.

    Returns (alpha_value, beta_value) or None when no ordered pair of
    constants certifies.
    """
    from .grid import constant_function

    candidates = np.linspace(lo, hi, count)
    alphas = [c for c in candidates if check_lower(problem, constant_function(problem.grid, c), tol).passed]
    betas = [c for c in candidates if check_upper(problem, constant_function(problem.grid, c), tol).passed]
    for a in sorted(alphas):
        for b in sorted(betas, reverse=True):
            if a <= b:
                return float(a), float(b)
    return None


# ---------------------------------------------------------------------------
# Output helpers

def _fmt17(x: float) -> str:
    return format(x, ".17g")


def _write_solution_csv(path: str, pf: ProblemFile, report: SolveReport) -> None:
    grid = pf.problem.grid
    u = report.solution
    try:
        residuals = equation_residual(pf.problem, u)
    except ex.DomainError:
        residuals = [float("nan")] * (grid.n + 1)
    from .grid import delta

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "t", "u", "u_delta", "residual"])
        for i in range(len(grid)):
            row = [str(i), _fmt17(float(grid.points[i])), _fmt17(u(i))]
            row.append(_fmt17(delta(u, i)) if i <= grid.n + 1 else "")
            row.append(_fmt17(residuals[i - 1]) if 1 <= i <= grid.n + 1 else "")
            writer.writerow(row)


def _json_report(pf: ProblemFile, ap: AuxProblem, report: SolveReport,
                 cert: dict, seed: int | None) -> dict:
    a = report.assumptions
    v = report.verification
    return {
        "problem": {
            "file": pf.path,
            "points": [float(t) for t in pf.problem.grid.points],
            "f": ex.to_source(pf.problem.f),
            "g_right": pf.problem.g_right,
        },
        "seed": seed,
        "assumptions": None if a is None else {
            "a1_ok": a.a1_ok,
            "a2_ok": a.a2_ok,
            "a3_ok": a.a3_ok,
            "a3_warning": a.a3_warning,
        },
        "certificates": cert,
        "M": ap.M,
        "r": report.radius,
        "method_used": report.method_used,
        "iterations": report.iterations,
        "fp_residual": report.fp_residual,
        "eq_residual_max": report.eq_residual_max,
        "bound_inclusion": list(report.bound_inclusion),
        "within_ball": report.within_ball,
        "converged": report.converged,
        "verification_ok": None if v is None else v.all_ok,
        "solution": [u for u in map(float, report.solution.values)],
        "trace": None if report.trace is None else list(report.trace),
    }


def _certificate_dict(lower, upper, ordering) -> dict:
    return {
        "lower": {
            "passed": lower.passed,
            "left_defect": lower.left_defect,
            "right_defect": lower.right_defect,
            "interior_defects": list(lower.interior_defects),
        },
        "upper": {
            "passed": upper.passed,
            "left_defect": upper.left_defect,
            "right_defect": upper.right_defect,
            "interior_defects": list(upper.interior_defects),
        },
        "ordering": {
            "passed": ordering.passed,
            "margins": list(ordering.margins),
            "right_margin": ordering.right_margin,
            "ordered_at_right": ordering.ordered_at_right,
        },
    }


# ---------------------------------------------------------------------------
# Commands

def cmd_solve(args) -> int:
    overrides = {}
    if args.tol is not None:
        overrides["tol"] = args.tol
    if args.trace:
        overrides["trace"] = True
    try:
        pf = load_problem_file(args.file, overrides)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if pf.bounds is None:
        print("error: solve requires a [bounds] section", file=sys.stderr)
        return EXIT_USAGE

    tol = pf.options.tol
    lower = check_lower(pf.problem, pf.bounds.alpha, tol)
    upper = check_upper(pf.problem, pf.bounds.beta, tol)
    ordering = check_ordering(pf.bounds, tol)
    cert = _certificate_dict(lower, upper, ordering)
    try:
        ap = build_aux_problem(pf.problem, pf.bounds, tol=tol)
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except ex.DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        report = solve(ap, pf.options, strict_monotonicity=not args.advisory_a2)
    except AssumptionViolationError as exc:
        print(f"assumption check failed: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except ex.DomainError as exc:
        print(f"domain error during solve: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if report.assumptions and report.assumptions.a3_warning:
        print(f"warning: {report.assumptions.a3_warning}", file=sys.stderr)

    if args.out:
        _write_solution_csv(args.out, pf, report)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(_json_report(pf, ap, report, cert, args.seed), fh, indent=2)
            fh.write("\n")

    status = ("converged" if report.converged else "not converged")
    print(f"{status}: method={report.method_used} iterations={report.iterations} "
          f"fp_residual={report.fp_residual:.3e} M={ap.M:.6g} r={report.radius:.6g}")
    if not report.converged:
        return EXIT_NONCONVERGENCE
    assert report.verification is not None
    if not report.verification.all_ok:
        print("verification failed", file=sys.stderr)
        return EXIT_VERIFICATION
    print("verified: boundaries, residual, bound inclusion, ball membership")
    return EXIT_OK


def cmd_check_bounds(args) -> int:
    try:
        pf = load_problem_file(args.file)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if pf.bounds is None:
        print("error: check-bounds requires a [bounds] section", file=sys.stderr)
        return EXIT_USAGE
    tol = args.tol if args.tol is not None else pf.options.tol
    lower = check_lower(pf.problem, pf.bounds.alpha, tol)
    upper = check_upper(pf.problem, pf.bounds.beta, tol)
    ordering = check_ordering(pf.bounds, tol)
    for rep in (lower, upper):
        worst = min(rep.interior_defects) if rep.kind == "lower" else max(rep.interior_defects)
        print(f"{rep.kind}: {'pass' if rep.passed else 'FAIL'} "
              f"left={_fmt17(rep.left_defect)} right={_fmt17(rep.right_defect)} "
              f"worst_interior={_fmt17(worst)}")
    print(f"ordering: {'pass' if ordering.passed else 'FAIL'} "
          f"worst_margin={_fmt17(min(ordering.margins))} "
          f"right_margin={_fmt17(ordering.right_margin)}")
    ok = lower.passed and upper.passed and ordering.passed
    return EXIT_OK if ok else EXIT_CERTIFICATE


def cmd_aux_table(args) -> int:
    try:
        pf = load_problem_file(args.file)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if pf.bounds is None:
        print("error: aux-table requires a [bounds] section", file=sys.stderr)
        return EXIT_USAGE
    grid = pf.problem.grid
    i = args.index
    if not 1 <= i <= grid.n + 1:
        print(f"error: index must lie in 1..{grid.n + 1}", file=sys.stderr)
        return EXIT_USAGE
    # M plays no role in the table; certification is not required to plot.
    ap = AuxProblem(base=pf.problem, bounds=pf.bounds, M=1.0)
    lo, hi = pf.bounds.alpha(i), pf.bounds.beta(i)
    width = max(hi - lo, 1.0)
    x_from = args.x_from if args.x_from is not None else lo - width
    x_to = args.x_to if args.x_to is not None else hi + width
    z = args.z if args.z is not None else 0.5 * (pf.bounds.alpha(i - 1) + pf.bounds.beta(i - 1))
    h = float(grid.steps[i - 1])
    t = float(grid.points[i])
    s = sigma(i, z, pf.bounds)
    fn = pf.problem.f_callable
    writer = csv.writer(sys.stdout)
    writer.writerow(["x", "f", "f_tilde"])
    for k in range(args.steps):
        x = x_from + (x_to - x_from) * k / (args.steps - 1)
        raw = fn(t, x, (x - s) / h)
        writer.writerow([_fmt17(x), _fmt17(raw), _fmt17(aux_f(ap, i, x, z))])
    return EXIT_OK


def cmd_demo_fixed_point(args) -> int:
    try:
        e = ex.parse(args.expr, {"x"})
        x_star = brouwer_1d(e, tol=args.tol)
    except (ex.ExprError, RangeViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"fixed point: {x_star:.12g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltabvp",
        description="Solve and certify discrete second-order BVPs on non-uniform grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="certify bounds, solve, verify")
    p_solve.add_argument("file")
    p_solve.add_argument("--out", help="solution CSV path")
    p_solve.add_argument("--json", help="JSON report path")
    p_solve.add_argument("--tol", type=float, default=None)
    a2 = p_solve.add_mutually_exclusive_group()
    a2.add_argument("--strict-a2", dest="advisory_a2", action="store_false", default=False)
    a2.add_argument("--advisory-a2", dest="advisory_a2", action="store_true")
    p_solve.add_argument("--seed", type=int, default=None,
                         help="recorded in the report; all sampling is deterministic")
    p_solve.add_argument("--trace", action="store_true")
    p_solve.set_defaults(fn=cmd_solve)

    p_check = sub.add_parser("check-bounds", help="run only the certificates")
    p_check.add_argument("file")
    p_check.add_argument("--tol", type=float, default=None)
    p_check.set_defaults(fn=cmd_check_bounds)

    p_table = sub.add_parser("aux-table", help="CSV sweep of f vs the clipped modification")
    p_table.add_argument("file")
    p_table.add_argument("--index", type=int, required=True)
    p_table.add_argument("--x-from", type=float, default=None)
    p_table.add_argument("--x-to", type=float, default=None)
    p_table.add_argument("--steps", type=int, default=101)
    p_table.add_argument("--z", type=float, default=None)
    p_table.set_defaults(fn=cmd_aux_table)

    p_demo = sub.add_parser("demo-fixed-point", help="bisection fixed point on [0, 1]")
    p_demo.add_argument("expr")
    p_demo.add_argument("--tol", type=float, default=1e-10)
    p_demo.set_defaults(fn=cmd_demo_fixed_point)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
