"""Lower/upper solution certificates and the ordering check that gates solving.

A lower function alpha satisfies the difference equation and boundary
conditions with relaxed inequalities (>=, >=, <=); an upper function beta the
mirror image.  A certified, ordered pair brackets an actual solution.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grid import GridFunction, delta, delta2
from .problem import BVProblem


class GridMismatchError(ValueError):
    """Paired grid functions live on different grids."""


@dataclass(frozen=True)
class BoundsPair:
    """Ordered candidate lower/upper functions on a shared grid."""

    alpha: GridFunction
    beta: GridFunction

    def __post_init__(self):
        if self.alpha.grid is not self.beta.grid and not (
            len(self.alpha.grid) == len(self.beta.grid)
            and (self.alpha.grid.points == self.beta.grid.points).all()
        ):
            raise GridMismatchError("alpha and beta must share a grid")

    @property
    def ordered_through(self) -> int:
        """Largest k with alpha(t_i) <= beta(t_i) for all i <= k; -1 if none."""
        k = -1
        for a, b in zip(self.alpha.values, self.beta.values):
            if a > b:
                break
            k += 1
        return k


@dataclass(frozen=True)
class CertificateReport:
    """Signed defects of one candidate bound against its defining inequalities.

    interior_defects holds the raw left-hand sides
    dd(t_{i-1}) + f(t_i, ., .) for i = 1..n+1 (entry k is index i = k+1);
    left_defect is the raw delta at t_0; right_defect is the raw boundary
    value minus g_right.  Required directions depend on ``kind``:

        lower:  interior >= -tol,  left >= -tol,  right <= +tol
        upper:  interior <= +tol,  left <= +tol,  right >= -tol
    """

    kind: str  # "lower" | "upper"
    interior_defects: tuple[float, ...]
    left_defect: float
    right_defect: float
    tol: float

    @property
    def passed(self) -> bool:
        if self.kind == "lower":
            return (
                all(d >= -self.tol for d in self.interior_defects)
                and self.left_defect >= -self.tol
                and self.right_defect <= self.tol
            )
        return (
            all(d <= self.tol for d in self.interior_defects)
            and self.left_defect <= self.tol
            and self.right_defect >= -self.tol
        )


def _defects(p: BVProblem, cand: GridFunction) -> tuple[tuple[float, ...], float, float]:
    fn = p.f_callable
    ts = p.grid.points
    interior = tuple(
        delta2(cand, i - 1) + fn(float(ts[i]), cand(i), delta(cand, i - 1))
        for i in range(1, p.grid.n + 2)
    )
    return interior, delta(cand, 0), cand(len(p.grid) - 1) - p.g_right


def check_lower(p: BVProblem, alpha: GridFunction, tol: float = 1e-10) -> CertificateReport:
    """Certificate that alpha is a lower solution, with per-index slack."""
    interior, left, right = _defects(p, alpha)
    return CertificateReport("lower", interior, left, right, tol)


def check_upper(p: BVProblem, beta: GridFunction, tol: float = 1e-10) -> CertificateReport:
    """Certificate that beta is an upper solution, with per-index slack."""
    interior, left, right = _defects(p, beta)
    return CertificateReport("upper", interior, left, right, tol)


@dataclass(frozen=True)
class OrderingReport:
    """alpha <= beta status over the required index range 0..n+1.

    The endpoint t_{n+2} is outside the theorem's hypothesis; its status is
    reported but does not affect ``passed``.
    """

    margins: tuple[float, ...]  # beta - alpha at i = 0..n+1
    right_margin: float  # beta - alpha at i = n+2, informational
    tol: float

    @property
    def passed(self) -> bool:
        return all(m >= -self.tol for m in self.margins)

    @property
    def ordered_at_right(self) -> bool:
        return self.right_margin >= -self.tol


def check_ordering(bp: BoundsPair, tol: float = 1e-10) -> OrderingReport:
    diff = bp.beta.values - bp.alpha.values
    return OrderingReport(
        margins=tuple(float(d) for d in diff[:-1]),
        right_margin=float(diff[-1]),
        tol=tol,
    )
