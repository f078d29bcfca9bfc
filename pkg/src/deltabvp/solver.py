"""Fixed-point finders for the solution operator, post-solve verification, and
the one-dimensional bisection demonstration.

The existence theory is non-constructive, so two finders are provided: a
damped (Krasnoselskii-Mann style) relaxation of the operator iteration as the
robust path, and a finite-difference quasi-Newton method exploiting the
tridiagonal structure of the residual system as the fast path.  Non-convergence
is reported, never raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import expr as ex
from .auxiliary import AuxProblem, aux_f, aux_residual
from .grid import GridFunction, delta, delta2, sup_norm
from .operator import apply_T, invariance_radius, pack, unpack
from .problem import AssumptionReport, check_assumptions, equation_residual

_MIN_DAMPING = 1.0 / 64.0
_NEWTON_CAP = 60
_PIVOT_TOL = 1e-13


class SingularJacobianError(RuntimeError):
    """Tridiagonal elimination hit a vanishing pivot and the dense fallback failed."""


class RangeViolationError(ValueError):
    """Sampled function value escapes [0, 1] in the fixed-point demonstration."""


class AssumptionViolationError(ValueError):
    """Strict assumption checking rejected the problem before solving."""

    def __init__(self, report: AssumptionReport):
        witnesses = report.a2_report.violations[:3]
        super().__init__(f"f is not non-increasing in its slope argument; witnesses: {witnesses}")
        self.report = report


@dataclass(frozen=True)
class SolveOptions:
    method: str = "auto"  # auto | newton | damped
    tol: float = 1e-10
    max_iter: int = 10_000
    damping: float = 0.5
    jacobian_step: float = 1e-7
    starts: tuple[str, ...] = ("midpoint", "alpha", "beta")
    trace: bool = False

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")
        if self.method not in ("auto", "newton", "damped"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class VerificationReport:
    """Post-solve checks of a candidate solution against the original problem."""

    left_defect: float
    right_defect: float
    boundary_ok: bool
    aux_residual_max: float
    aux_ok: bool
    inclusion_ok: bool
    inclusion_violations: tuple[tuple[int, float], ...]  # (index, signed overshoot)
    violation_curvature: float | None  # second delta at the worst interior violation
    equation_residual_max: float | None  # vs the original f; None if outside the band
    equation_ok: bool
    ball_norm: float
    radius: float
    within_ball: bool

    @property
    def all_ok(self) -> bool:
        return (self.boundary_ok and self.aux_ok and self.inclusion_ok
                and self.equation_ok and self.within_ball)


@dataclass(frozen=True)
class SolveReport:
    solution: GridFunction
    fp_residual: float
    eq_residual_max: float
    iterations: int
    method_used: str
    start_used: str
    bound_inclusion: tuple[bool, ...]
    worst_violation: float
    within_ball: bool
    radius: float
    converged: bool
    trace: tuple[float, ...] | None = None
    verification: VerificationReport | None = None
    assumptions: AssumptionReport | None = None


# ---------------------------------------------------------------------------
# Starts

def _start_function(ap: AuxProblem, name: str) -> GridFunction:
    if name == "midpoint":
        raw = 0.5 * (ap.bounds.alpha.values + ap.bounds.beta.values)
    elif name == "alpha":
        raw = ap.bounds.alpha.values
    elif name == "beta":
        raw = ap.bounds.beta.values
    else:
        raise ValueError(f"unknown start strategy {name!r}")
    # Project into E so both boundary conditions hold from the first iterate.
    return unpack(ap, np.array(raw[1:-1]))


# ---------------------------------------------------------------------------
# Damped fixed-point iteration

def _damped_from(ap: AuxProblem, start: GridFunction, opts: SolveOptions):
    """Greedy operator iteration with damped relaxation as fallback.

    Each step first tries the undamped candidate Tu; if that does not lower
    the residual, a damped step u + lam*(Tu - u) is taken instead and lam is
    halved on residual increase (floored at 1/64).
    """
    u = start
    Tu = apply_T(ap, u)
    res = sup_norm(Tu - u)
    lam = opts.damping
    best_u, best_res = u, res
    trace = [res]
    iters = 0
    while iters < opts.max_iter and res > opts.tol:
        cand = Tu
        T_cand = apply_T(ap, cand)
        cand_res = sup_norm(T_cand - cand)
        if cand_res < res:
            u, Tu, res = cand, T_cand, cand_res
        else:
            damped = u + lam * (Tu - u)
            T_damped = apply_T(ap, damped)
            damped_res = sup_norm(T_damped - damped)
            if damped_res >= res:
                lam = max(lam / 2.0, _MIN_DAMPING)
            u, Tu, res = damped, T_damped, damped_res
        iters += 1
        trace.append(res)
        if res < best_res:
            best_u, best_res = u, res
    return best_u, best_res, iters, trace


def solve_damped(ap: AuxProblem, opts: SolveOptions = SolveOptions()) -> SolveReport:
    """Damped operator iteration from each configured start; best iterate wins."""
    best = None
    for name in opts.starts:
        u, res, iters, trace = _damped_from(ap, _start_function(ap, name), opts)
        converged = res <= opts.tol
        rec = (not converged, res, name, u, iters, trace)
        if best is None or rec[:2] < best[:2]:
            best = rec
        if converged:
            break
    _, res, name, u, iters, trace = best
    return _finalize(ap, u, res, iters, "damped", name, opts, trace)


# ---------------------------------------------------------------------------
# Quasi-Newton on the residual system

def _residual_system(ap: AuxProblem, v: np.ndarray) -> np.ndarray:
    """Rows: left boundary delta, interior residuals, right boundary value."""
    g = ap.base.grid
    hs = g.steps
    m = len(v)
    F = np.empty(m)
    F[0] = (v[1] - v[0]) / hs[0]
    for i in range(1, g.n + 2):
        d2 = ((v[i + 1] - v[i]) / hs[i] - (v[i] - v[i - 1]) / hs[i - 1]) / hs[i - 1]
        F[i] = d2 + aux_f(ap, i, float(v[i]), float(v[i - 1]))
    F[m - 1] = v[m - 1] - ap.base.g_right
    return F


def _fd_jacobian(ap: AuxProblem, v: np.ndarray, base_step: float):
    """Central-difference tridiagonal Jacobian via 3-coloring (6 system evals)."""
    m = len(v)
    steps = base_step * np.maximum(1.0, np.abs(v))
    sub = np.zeros(m)
    dia = np.zeros(m)
    sup = np.zeros(m)
    for color in range(3):
        idx = np.arange(color, m, 3)
        d = np.zeros(m)
        d[idx] = steps[idx]
        diff = _residual_system(ap, v + d) - _residual_system(ap, v - d)
        for j in idx:
            denom = 2.0 * steps[j]
            if j > 0:
                sup[j - 1] = diff[j - 1] / denom
            dia[j] = diff[j] / denom
            if j < m - 1:
                sub[j + 1] = diff[j + 1] / denom
    return sub, dia, sup


def solve_tridiagonal(sub, dia, sup, rhs) -> np.ndarray:
    """Thomas elimination; raises SingularJacobianError on a tiny pivot."""
    m = len(rhs)
    cp = np.empty(m)
    dp = np.empty(m)
    piv = dia[0]
    if abs(piv) < _PIVOT_TOL:
        raise SingularJacobianError(f"pivot {piv} at row 0")
    cp[0] = sup[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, m):
        piv = dia[i] - sub[i] * cp[i - 1]
        if abs(piv) < _PIVOT_TOL:
            raise SingularJacobianError(f"pivot {piv} at row {i}")
        cp[i] = (sup[i] / piv) if i < m - 1 else 0.0
        dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / piv
    x = np.empty(m)
    x[m - 1] = dp[m - 1]
    for i in range(m - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def _solve_band_system(sub, dia, sup, rhs) -> np.ndarray:
    try:
        return solve_tridiagonal(sub, dia, sup, rhs)
    except SingularJacobianError:
        m = len(rhs)
        J = np.diag(dia)
        J[np.arange(1, m), np.arange(m - 1)] = sub[1:]
        J[np.arange(m - 1), np.arange(1, m)] = sup[:-1]
        try:
            return np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(str(exc)) from None


def solve_newton(ap: AuxProblem, opts: SolveOptions = SolveOptions(),
                 start: str = "midpoint") -> SolveReport:
    """Damped-Newton iteration on the residual system from one start.

    Targets a residual well below the fixed-point tolerance; backtracking line
    search on the sup norm of the system, up to 30 halvings per step.
    """
    v = np.array(_start_function(ap, start).values)
    ftol = min(opts.tol, 1e-12)
    cap = min(opts.max_iter, _NEWTON_CAP)
    F = _residual_system(ap, v)
    nf = float(np.max(np.abs(F)))
    trace = [nf]
    iters = 0
    while iters < cap and nf > ftol:
        sub, dia, sup = _fd_jacobian(ap, v, opts.jacobian_step)
        step = _solve_band_system(sub, dia, sup, -F)
        lam = 1.0
        accepted = False
        for _ in range(30):
            v_try = v + lam * step
            try:
                F_try = _residual_system(ap, v_try)
            except ex.DomainError:
                lam *= 0.5
                continue
            nf_try = float(np.max(np.abs(F_try)))
            if nf_try < nf:
                v, F, nf = v_try, F_try, nf_try
                accepted = True
                break
            lam *= 0.5
        iters += 1
        trace.append(nf)
        if not accepted:
            break
    u = GridFunction(ap.base.grid, v)
    res = sup_norm(apply_T(ap, u) - u)
    return _finalize(ap, u, res, iters, "newton", start, opts, trace)


# ---------------------------------------------------------------------------
# Orchestration and verification

def _finalize(ap: AuxProblem, u: GridFunction, res: float, iters: int,
              method: str, start: str, opts: SolveOptions, trace) -> SolveReport:
    r = invariance_radius(ap)
    incl_tol = 1e-9
    over = np.maximum(ap.bounds.alpha.values - u.values, u.values - ap.bounds.beta.values)
    inclusion = tuple(bool(o <= incl_tol) for o in over)
    try:
        eq_max = max(abs(x) for x in equation_residual(ap.base, u))
    except ex.DomainError:
        eq_max = math.nan
    converged = res <= opts.tol
    return SolveReport(
        solution=u,
        fp_residual=res,
        eq_residual_max=eq_max,
        iterations=iters,
        method_used=method,
        start_used=start,
        bound_inclusion=inclusion,
        worst_violation=float(np.max(over)),
        within_ball=sup_norm(u) <= r,
        radius=r,
        converged=converged,
        trace=tuple(trace) if opts.trace else None,
        verification=verify_solution(ap, u) if converged else None,
    )


def solve(ap: AuxProblem, opts: SolveOptions = SolveOptions(),
          strict_monotonicity: bool = True) -> SolveReport:
    """Quasi-Newton first, damped multistart fallback; embeds verification.

    With ``strict_monotonicity`` the non-increasing-in-y assumption is checked
    against the certified band and a violation aborts the solve.
    """
    assumptions = check_assumptions(ap.base, bounds=ap.bounds)
    if strict_monotonicity and not assumptions.a2_ok:
        raise AssumptionViolationError(assumptions)

    reports: list[SolveReport] = []
    if opts.method in ("auto", "newton"):
        for start in opts.starts:
            try:
                rep = solve_newton(ap, opts, start)
            except SingularJacobianError:
                break
            reports.append(rep)
            if rep.converged:
                break
    if not any(r.converged for r in reports) and opts.method != "newton":
        reports.append(solve_damped(ap, opts))
    if not reports:
        reports.append(solve_damped(ap, opts))
    best = min(reports, key=lambda r: (not r.converged, r.fp_residual))
    return replace(best, assumptions=assumptions)


def verify_solution(ap: AuxProblem, u: GridFunction, tol: float = 1e-9) -> VerificationReport:
    """Five checks: boundaries, auxiliary residual, band inclusion, residual
    against the original f (meaningful only inside the band), ball membership."""
    g = ap.base.grid
    left = abs(delta(u, 0))
    right = abs(u(len(g) - 1) - ap.base.g_right)
    boundary_ok = left <= 1e-12 and right <= 1e-12

    aux_max = max(abs(x) for x in aux_residual(ap, u))
    aux_ok = aux_max <= tol

    over = np.maximum(ap.bounds.alpha.values - u.values, u.values - ap.bounds.beta.values)
    violations = tuple((int(i), float(over[i])) for i in np.nonzero(over > tol)[0])
    inclusion_ok = not violations
    curvature = None
    if violations:
        worst = max(violations, key=lambda iv: iv[1])[0]
        if 1 <= worst <= g.n + 1:
            # The contradiction machinery: at an interior violation maximum the
            # discrete curvature must be non-positive.
            curvature = delta2(u, worst - 1)

    eq_max: float | None = None
    equation_ok = False
    if inclusion_ok:
        try:
            eq_max = max(abs(x) for x in equation_residual(ap.base, u))
            equation_ok = eq_max <= tol
        except ex.DomainError:
            eq_max = math.nan

    r = invariance_radius(ap)
    norm = sup_norm(u)
    return VerificationReport(
        left_defect=left,
        right_defect=right,
        boundary_ok=boundary_ok,
        aux_residual_max=aux_max,
        aux_ok=aux_ok,
        inclusion_ok=inclusion_ok,
        inclusion_violations=violations,
        violation_curvature=curvature,
        equation_residual_max=eq_max,
        equation_ok=equation_ok,
        ball_norm=norm,
        radius=r,
        within_ball=norm <= r,
    )


# ---------------------------------------------------------------------------
# One-dimensional fixed-point demonstration

def brouwer_1d(fn: ex.Expr, tol: float = 1e-10, range_samples: int = 1000) -> float:
    """Bisection fixed point of a continuous self-map of [0, 1].

    The self-map property is checked by sampling; endpoints that are already
    fixed are returned outright.
    """
    f = ex.as_callable(fn, ("x",))
    for k in range(range_samples + 1):
        x = k / range_samples
        y = f(x)
        if not -1e-12 <= y <= 1.0 + 1e-12:
            raise RangeViolationError(f"f({x}) = {y} escapes [0, 1]")
    if f(0.0) == 0.0:
        return 0.0
    if f(1.0) == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0  # f(lo) - lo >= 0 >= f(hi) - hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == mid:
            return mid
        if fm - mid >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
