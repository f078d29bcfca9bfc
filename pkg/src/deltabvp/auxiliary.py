"""Clamped modification of the nonlinearity and the auxiliary problem built on it.

Outside the band [alpha, beta] the modified nonlinearity evaluates f at the
violated bound and adds a saturating push-back fraction of magnitude below 1;
inside the band (with the previous value clamped into its own band) it equals
f exactly, so solutions of the auxiliary problem that stay inside the band
solve the original problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .bounds import BoundsPair, check_lower, check_ordering, check_upper
from .grid import GridFunction, IndexOutOfRangeError, delta2
from .problem import BVProblem


class CertificationError(ValueError):
    """Bounds failed lower/upper certification or ordering."""


def sigma(i: int, z: float, bounds: BoundsPair) -> float:
    """Clamp of the previous-step value z onto [alpha(t_{i-1}), beta(t_{i-1})]."""
    n = bounds.alpha.grid.n
    if not 1 <= i <= n + 1:
        raise IndexOutOfRangeError(f"sigma index {i} outside 1..{n + 1}")
    lo = bounds.alpha(i - 1)
    hi = bounds.beta(i - 1)
    if z > hi:
        return hi
    if z < lo:
        return lo
    return z


@dataclass(frozen=True)
class AuxProblem:
    """Base problem, certified bounds, and the bound M on the modified nonlinearity."""

    base: BVProblem
    bounds: BoundsPair
    M: float

    def __post_init__(self):
        if not (self.M > 0 and math.isfinite(self.M)):
            raise ValueError(f"M must be a positive finite real, got {self.M}")


def aux_f(ap: AuxProblem, i: int, x: float, z: float) -> float:
    """Modified nonlinearity at interior index i with x = u(t_i), z = u(t_{i-1})."""
    p = ap.base
    n = p.grid.n
    if not 1 <= i <= n + 1:
        raise IndexOutOfRangeError(f"aux_f index {i} outside 1..{n + 1}")
    t = float(p.grid.points[i])
    h = float(p.grid.steps[i - 1])
    s = sigma(i, z, ap.bounds)
    lo = ap.bounds.alpha(i)
    hi = ap.bounds.beta(i)
    fn = p.f_callable
    if x > hi:
        return fn(t, hi, (hi - s) / h) - (x - hi) / (x - hi + 1.0)
    if x < lo:
        return fn(t, lo, (lo - s) / h) + (lo - x) / (lo - x + 1.0)
    return fn(t, x, (x - s) / h)


def aux_residual(ap: AuxProblem, u: GridFunction) -> list[float]:
    """dd(t_{i-1}) + modified f, for i = 1..n+1 (entry k is index i = k+1)."""
    return [
        delta2(u, i - 1) + aux_f(ap, i, u(i), u(i - 1))
        for i in range(1, ap.base.grid.n + 2)
    ]


def estimate_M(
    base: BVProblem,
    bounds: BoundsPair,
    margin: float = 0.05,
    lattice: int = 64,
    refine: int = 3,
) -> float:
    """Sampled upper bound on the modified nonlinearity.

    M = (1 + margin) * max |f(t_i, x, (x - s)/h_{i-1})| over the band lattice,
    plus 1 for the push-back fraction, which is strictly below 1 in magnitude.
    ``refine`` extra passes shrink the lattice around the running maximum.
    """
    fn = base.f_callable
    ts = base.grid.points
    hs = base.grid.steps

    def scan(i, x_lo, x_hi, s_lo, s_hi, density):
        t = float(ts[i])
        h = float(hs[i - 1])
        xs = [x_lo + (x_hi - x_lo) * k / (density - 1) for k in range(density)] if x_hi > x_lo else [x_lo]
        ss = [s_lo + (s_hi - s_lo) * k / (density - 1) for k in range(density)] if s_hi > s_lo else [s_lo]
        best, best_pt = 0.0, (xs[0], ss[0])
        for x in xs:
            for s in ss:
                v = abs(fn(t, x, (x - s) / h))
                if v > best:
                    best, best_pt = v, (x, s)
        return best, best_pt

    global_best = 0.0
    best_i, best_pt = 1, None
    for i in range(1, base.grid.n + 2):
        v, pt = scan(i, bounds.alpha(i), bounds.beta(i), bounds.alpha(i - 1), bounds.beta(i - 1), lattice)
        if v >= global_best:
            global_best, best_i, best_pt = v, i, pt
    if best_pt is not None:
        x_lo, x_hi = bounds.alpha(best_i), bounds.beta(best_i)
        s_lo, s_hi = bounds.alpha(best_i - 1), bounds.beta(best_i - 1)
        wx, ws = x_hi - x_lo, s_hi - s_lo
        for _ in range(refine):
            wx /= 4.0
            ws /= 4.0
            x, s = best_pt
            v, pt = scan(
                best_i,
                max(x_lo, x - wx), min(x_hi, x + wx),
                max(s_lo, s - ws), min(s_hi, s + ws),
                lattice,
            )
            if v > global_best:
                global_best, best_pt = v, pt
    return (1.0 + margin) * global_best + 1.0


def make_aux_problem(
    base: BVProblem,
    bounds: BoundsPair,
    margin: float = 0.05,
    lattice: int = 64,
) -> AuxProblem:
    """Construct the auxiliary problem without certifying the bounds.

    The clipped nonlinearity and the operator built on it are well defined for
    any ordered band; use :func:`build_aux_problem` when the existence
    guarantee (and hence certification) matters.
    """
    return AuxProblem(base=base, bounds=bounds, M=estimate_M(base, bounds, margin, lattice))


def build_aux_problem(
    base: BVProblem,
    bounds: BoundsPair,
    tol: float = 1e-10,
    margin: float = 0.05,
    lattice: int = 64,
) -> AuxProblem:
    """Certify the bounds (lower, upper, ordering) and estimate M.

    Raises CertificationError listing every failed certificate.
    """
    lower = check_lower(base, bounds.alpha, tol)
    upper = check_upper(base, bounds.beta, tol)
    ordering = check_ordering(bounds, tol)
    failures = []
    if not lower.passed:
        failures.append(f"lower certificate failed: left={lower.left_defect}, "
                        f"right={lower.right_defect}, worst interior={min(lower.interior_defects)}")
    if not upper.passed:
        failures.append(f"upper certificate failed: left={upper.left_defect}, "
                        f"right={upper.right_defect}, worst interior={max(upper.interior_defects)}")
    if not ordering.passed:
        failures.append(f"ordering failed: worst margin={min(ordering.margins)}")
    if failures:
        raise CertificationError("; ".join(failures))
    M = estimate_M(base, bounds, margin=margin, lattice=lattice)
    return AuxProblem(base=base, bounds=bounds, M=M)


def tighten_M(ap: AuxProblem, observed: float) -> AuxProblem:
    """Raise M to cover an observed |modified f| value; never lowers it."""
    if observed <= ap.M:
        return ap
    return replace(ap, M=observed)
