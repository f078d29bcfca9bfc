"""The explicit solution operator and its diagnostics.

The operator maps any grid function u to

    (Tu)(t_k) = g_right + sum_{j=k}^{n+1} h_j * sum_{i=1}^{j} h_{i-1} * ftilde_i(u)

where ftilde_i(u) is the modified nonlinearity evaluated at (u(t_i), u(t_{i-1})).
Both boundary conditions hold for Tu by construction (the k = n+2 outer sum is
empty, and the inner sum for k = 0 equals the one for k = 1), and fixed points
of T are exactly the solutions of the auxiliary problem.

Summation order is fixed: ascending inner accumulation, then one descending
outer accumulation, so results are bit-reproducible.  Compensated (Kahan)
accumulation kicks in for grids with more than 1000 steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .auxiliary import AuxProblem, aux_f
from .grid import GridFunction, delta, sup_norm

_KAHAN_THRESHOLD = 1000


class _Accumulator:
    """Running sum; compensated when the term count warrants it."""

    def __init__(self, compensated: bool):
        self.total = 0.0
        self.c = 0.0
        self.compensated = compensated

    def add(self, term: float) -> float:
        if self.compensated:
            y = term - self.c
            t = self.total + y
            self.c = (t - self.total) - y
            self.total = t
        else:
            self.total += term
        return self.total


def _inner_sums(ap: AuxProblem, u: GridFunction) -> np.ndarray:
    """S[j] = sum_{i=1}^{j} h_{i-1} * ftilde_i(u) for j = 0..n+1 (S[0] = 0)."""
    n = ap.base.grid.n
    hs = ap.base.grid.steps
    S = np.empty(n + 2)
    S[0] = 0.0
    acc = _Accumulator(compensated=n + 1 > _KAHAN_THRESHOLD)
    for i in range(1, n + 2):
        S[i] = acc.add(float(hs[i - 1]) * aux_f(ap, i, u(i), u(i - 1)))
    return S


def delta_from_f(ap: AuxProblem, u: GridFunction) -> list[float]:
    """Accumulated delta values -S[k] of Tu for k = 1..n+1 (entry j is k = j+1)."""
    return [-s for s in _inner_sums(ap, u)[1:]]


def apply_T(ap: AuxProblem, u: GridFunction) -> GridFunction:
    """One application of the solution operator; O(n) in grid size."""
    n = ap.base.grid.n
    hs = ap.base.grid.steps
    g = ap.base.g_right
    S = _inner_sums(ap, u)
    out = np.empty(n + 3)
    out[n + 2] = g
    acc = _Accumulator(compensated=n + 2 > _KAHAN_THRESHOLD)
    for k in range(n + 1, -1, -1):
        out[k] = g + acc.add(float(hs[k]) * S[k])
    return GridFunction(ap.base.grid, out)


def fixed_point_residual(ap: AuxProblem, u: GridFunction) -> float:
    """sup |Tu - u|; vanishes exactly at solutions of the auxiliary problem."""
    return sup_norm(apply_T(ap, u) - u)


def invariance_radius(ap: AuxProblem) -> float:
    """Ball radius r = g_right + M * (t_{n+2} - t_0)^2 that T maps into itself."""
    return ap.base.g_right + ap.M * ap.base.grid.span ** 2


@dataclass(frozen=True)
class OperatorDiagnostics:
    fp_residual: float
    boundary_defects: tuple[float, float]
    radius: float
    inside_ball: bool


def diagnostics(ap: AuxProblem, u: GridFunction) -> OperatorDiagnostics:
    Tu = apply_T(ap, u)
    r = invariance_radius(ap)
    return OperatorDiagnostics(
        fp_residual=sup_norm(Tu - u),
        boundary_defects=(abs(delta(Tu, 0)), abs(Tu(len(ap.base.grid) - 1) - ap.base.g_right)),
        radius=r,
        inside_ball=sup_norm(u) <= r,
    )


# Free-coordinate layout: a member of E is determined by (u(t_1), ..., u(t_{n+1}))
# together with u(t_0) = u(t_1) and u(t_{n+2}) = g_right.

def pack(u: GridFunction) -> np.ndarray:
    """Free coordinates (u(t_1), ..., u(t_{n+1})) of a grid function."""
    return np.array(u.values[1:-1])


def unpack(ap: AuxProblem, coords: np.ndarray) -> GridFunction:
    """Grid function in E with the given free coordinates."""
    n = ap.base.grid.n
    if len(coords) != n + 1:
        raise ValueError(f"expected {n + 1} free coordinates, got {len(coords)}")
    out = np.empty(n + 3)
    out[1:-1] = coords
    out[0] = coords[0]
    out[-1] = ap.base.g_right
    return GridFunction(ap.base.grid, out)
