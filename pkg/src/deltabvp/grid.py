"""Non-uniform time grids and the discrete delta calculus on them.

A grid is a strictly increasing sequence of n+3 time points t_0 < ... < t_{n+2}
with cached step sizes h_i = t_{i+1} - t_i.  Grid functions assign one real
value per grid point.  Both are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridError(ValueError):
    """Base class for grid construction errors."""


class NonMonotonicError(GridError):
    """Some t_{i+1} <= t_i."""


class TooShortError(GridError):
    """Fewer than 3 grid points."""


class NonFiniteError(GridError):
    """A grid point or grid-function value is NaN or infinite."""


class BadIntervalError(GridError):
    """Interval endpoints with a >= b."""


class IndexOutOfRangeError(IndexError):
    """Delta-derivative index outside its admissible range."""


@dataclass(frozen=True)
class Grid:
    """Strictly increasing time points with cached step sizes.

    ``n`` is the number of interior equations minus one: a grid of n+3
    points carries the difference equation at indices 1..n+1.
    """

    points: np.ndarray
    steps: np.ndarray
    h_min: float
    h_max: float

    @property
    def n(self) -> int:
        return len(self.points) - 3

    @property
    def span(self) -> float:
        """t_{n+2} - t_0."""
        return float(self.points[-1] - self.points[0])

    def __len__(self) -> int:
        return len(self.points)


def make_grid(points) -> Grid:
    """Build a Grid from a strictly increasing point sequence.

    Raises TooShortError, NonFiniteError or NonMonotonicError on bad input.
    """
    pts = np.asarray(points, dtype=float).copy()
    if pts.ndim != 1 or len(pts) < 3:
        raise TooShortError(f"need at least 3 points, got {pts.size}")
    if not np.all(np.isfinite(pts)):
        raise NonFiniteError("grid points must be finite")
    steps = np.diff(pts)
    if not np.all(steps > 0.0):
        bad = int(np.argmin(steps > 0.0))
        raise NonMonotonicError(
            f"points must be strictly increasing; t[{bad + 1}]={pts[bad + 1]} <= t[{bad}]={pts[bad]}"
        )
    pts.setflags(write=False)
    steps.setflags(write=False)
    return Grid(points=pts, steps=steps, h_min=float(steps.min()), h_max=float(steps.max()))


def uniform_grid(a: float, b: float, n: int) -> Grid:
    """Equally spaced grid of n+3 points on [a, b]."""
    if not a < b:
        raise BadIntervalError(f"need a < b, got a={a}, b={b}")
    return make_grid(np.linspace(a, b, n + 3))


@dataclass(frozen=True)
class GridFunction:
    """One real value per grid point."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        if len(vals) != len(self.grid.points):
            raise ValueError(
                f"value count {len(vals)} != point count {len(self.grid.points)}"
            )
        if not np.all(np.isfinite(vals)):
            raise NonFiniteError("grid-function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __call__(self, i: int) -> float:
        return float(self.values[i])

    # Pointwise arithmetic on a shared grid; handy for decompositions and tests.
    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)


def constant_function(grid: Grid, c: float) -> GridFunction:
    return GridFunction(grid, np.full(len(grid), float(c)))


def delta(u: GridFunction, i: int) -> float:
    """Forward difference quotient (u(t_{i+1}) - u(t_i)) / h_i, for i = 0..n+1."""
    if not 0 <= i <= u.grid.n + 1:
        raise IndexOutOfRangeError(f"delta index {i} outside 0..{u.grid.n + 1}")
    return (u.values[i + 1] - u.values[i]) / u.grid.steps[i]


def delta2(u: GridFunction, i: int) -> float:
    """Second difference quotient (delta(u, i+1) - delta(u, i)) / h_i, for i = 0..n."""
    if not 0 <= i <= u.grid.n:
        raise IndexOutOfRangeError(f"delta2 index {i} outside 0..{u.grid.n}")
    return (delta(u, i + 1) - delta(u, i)) / u.grid.steps[i]


def sup_norm(u: GridFunction) -> float:
    """max |u(t)| over all grid points."""
    return float(np.max(np.abs(u.values)))
