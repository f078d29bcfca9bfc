"""The boundary value problem, its function spaces, and the constant particular
solution that absorbs the non-homogeneous right boundary value.

The problem is

    u^dd(t_{i-1}) + f(t_i, u(t_i), u^d(t_{i-1})) = 0   for i = 1..n+1
    u^d(t_0) = 0
    u(t_{n+2}) = g_right

where ^d and ^dd denote the first and second delta derivatives.  E is the
affine space of grid functions meeting both boundary conditions; E0 its linear
counterpart with zero right value.  Every u in E splits uniquely as
u = v + w_p with v in E0 and w_p the constant function equal to g_right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from . import expr as ex
from .grid import Grid, GridFunction, constant_function, delta, delta2


class NotInEError(ValueError):
    """Candidate function violates a boundary condition of the space E."""

    def __init__(self, left_defect: float, right_defect: float, tol: float):
        super().__init__(
            f"not in E within tol={tol}: |u^d(t_0)|={left_defect}, "
            f"|u(t_n+2) - g|={right_defect}"
        )
        self.left_defect = left_defect
        self.right_defect = right_defect


@dataclass(frozen=True)
class BVProblem:
    """Grid, nonlinearity f(t, x, y), and right boundary value g(t_{n+2})."""

    grid: Grid
    f: ex.Expr
    g_right: float
    g_expr: ex.Expr | None = None

    def __post_init__(self):
        if not math.isfinite(self.g_right):
            raise ValueError(f"g_right must be finite, got {self.g_right}")
        if self.g_expr is not None:
            at_end = ex.evaluate(self.g_expr, {"t": float(self.grid.points[-1])})
            if at_end != self.g_right:
                raise ValueError(
                    f"g expression evaluates to {at_end} at the right endpoint, "
                    f"but g_right={self.g_right}"
                )

    @classmethod
    def from_g_expr(cls, grid: Grid, f: ex.Expr, g_expr: ex.Expr) -> "BVProblem":
        g_right = ex.evaluate(g_expr, {"t": float(grid.points[-1])})
        return cls(grid=grid, f=f, g_right=g_right, g_expr=g_expr)

    @cached_property
    def f_callable(self):
        """Compiled f(t, x, y); bit-identical to the interpreted evaluator."""
        return ex.as_callable(self.f, ("t", "x", "y"))


@dataclass(frozen=True)
class SpaceMembership:
    in_E: bool
    in_E0: bool
    boundary_defects: tuple[float, float]  # |u^d(t_0)|, |u(t_{n+2}) - target|


def particular_solution(p: BVProblem) -> GridFunction:
    """The constant function w_p = g_right; satisfies both boundary conditions."""
    return constant_function(p.grid, p.g_right)


def membership(p: BVProblem, u: GridFunction, tol: float = 1e-10) -> SpaceMembership:
    left = abs(delta(u, 0))
    right_e = abs(u(len(p.grid) - 1) - p.g_right)
    right_e0 = abs(u(len(p.grid) - 1))
    return SpaceMembership(
        in_E=left <= tol and right_e <= tol,
        in_E0=left <= tol and right_e0 <= tol,
        boundary_defects=(left, right_e),
    )


def decompose(p: BVProblem, u: GridFunction, tol: float = 1e-10):
    """Split u in E as (v, w_p) with v in E0.  Raises NotInEError otherwise."""
    m = membership(p, u, tol)
    if not m.in_E:
        raise NotInEError(*m.boundary_defects, tol)
    w_p = particular_solution(p)
    return u - w_p, w_p


def equation_residual(p: BVProblem, u: GridFunction) -> list[float]:
    """R_i = u^dd(t_{i-1}) + f(t_i, u(t_i), u^d(t_{i-1})) for i = 1..n+1.

    The returned list is offset by one from the paper-style index: entry k
    holds R_{k+1}.  u solves the difference equation iff all entries vanish
    and the boundary conditions hold.
    """
    fn = p.f_callable
    ts = p.grid.points
    return [
        delta2(u, i - 1) + fn(float(ts[i]), u(i), delta(u, i - 1))
        for i in range(1, p.grid.n + 2)
    ]


@dataclass(frozen=True)
class MonotoneSamplingSpec:
    """Sampling density and ranges for the non-increasing-in-y check.

    Ranges left as None are derived from a bounds pair when one is available.
    """

    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    samples: int = 12


@dataclass(frozen=True)
class AssumptionReport:
    a1_ok: bool
    a1_note: str
    a2_ok: bool
    a2_report: ex.MonotoneReport
    a3_ok: bool
    a3_warning: str | None

    @property
    def all_ok(self) -> bool:
        return self.a1_ok and self.a2_ok and self.a3_ok


def _derived_ranges(p: BVProblem, bounds) -> tuple[tuple[float, float], tuple[float, float]]:
    if bounds is None:
        return (-1.0, 1.0), (-1.0, 1.0)
    lo = float(min(bounds.alpha.values.min(), bounds.beta.values.min()))
    hi = float(max(bounds.alpha.values.max(), bounds.beta.values.max()))
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    slope = (hi - lo) / p.grid.h_min
    return (lo, hi), (-slope, slope)


def check_assumptions(
    p: BVProblem,
    sampling: MonotoneSamplingSpec = MonotoneSamplingSpec(),
    bounds=None,
) -> AssumptionReport:
    """Verdicts for the three standing assumptions on f and g.

    Continuity of an expression-defined f on a finite grid is automatic, so
    the first assumption is reported as vacuously satisfied.  Monotonicity in
    the slope argument is sample-based; positivity of the boundary value is a
    warning only, since nothing downstream depends on it.
    """
    x_auto, y_auto = _derived_ranges(p, bounds)
    report = ex.sample_nonincreasing_in_y(
        p.f,
        [float(t) for t in p.grid.points[1 : p.grid.n + 2]],
        sampling.x_range or x_auto,
        sampling.y_range or y_auto,
        sampling.samples,
    )
    a3_ok = p.g_right > 0
    return AssumptionReport(
        a1_ok=True,
        a1_note="expression-defined f on a finite grid is continuous by construction",
        a2_ok=report.passed,
        a2_report=report,
        a3_ok=a3_ok,
        a3_warning=None if a3_ok else f"right boundary value g_right={p.g_right} is not positive",
    )
