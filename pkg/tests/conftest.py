import math

import numpy as np
import pytest

import deltabvp as d
from deltabvp import expr as ex
from deltabvp.auxiliary import make_aux_problem


def parse_f(source):
    return ex.parse(source, {"t", "x", "y"})


def make_instance(points, f_src, g_right, alpha, beta, certified=True, lattice=64):
    """Problem + bounds + aux problem from compact literals.

    alpha/beta may be scalars (constant bounds) or full value arrays.
    """
    grid = d.make_grid(points) if not isinstance(points, d.Grid) else points
    problem = d.BVProblem(grid=grid, f=parse_f(f_src), g_right=float(g_right))
    a = d.constant_function(grid, alpha) if np.isscalar(alpha) else d.GridFunction(grid, alpha)
    b = d.constant_function(grid, beta) if np.isscalar(beta) else d.GridFunction(grid, beta)
    bp = d.BoundsPair(alpha=a, beta=b)
    if certified:
        ap = d.build_aux_problem(problem, bp, lattice=lattice)
    else:
        ap = make_aux_problem(problem, bp, lattice=lattice)
    return problem, bp, ap


@pytest.fixture
def micro_instance():
    """The n = 0 worked instance: f = 2, g = 5 on [0, 1, 2], solution [7, 7, 5]."""
    return make_instance([0.0, 1.0, 2.0], "2", 5.0, 0.0, 10.0, certified=False)


@pytest.fixture
def parabola_instance():
    """f = 1 - x^2 with certified band [0, 1]."""
    return make_instance(list(np.linspace(0.0, 1.0, 8)), "1 - x^2", 1.0, 0.0, 1.0)


def random_grid(rng, n, lo=0.01, hi=1.0):
    """Non-uniform grid with log-uniform steps in [lo, hi]."""
    steps = np.exp(rng.uniform(np.log(lo), np.log(hi), n + 2))
    return d.make_grid(np.concatenate([[0.0], np.cumsum(steps)]))


def random_grid_function(rng, grid, scale=1.0):
    return d.GridFunction(grid, rng.uniform(-scale, scale, len(grid)))


def dense_linear_oracle(grid, a_fn, b_fn, c_fn, g_right):
    """Solve the linear problem with a dense matrix assembled from scratch.

    Rows: (u1 - u0)/h0 = 0; interior curvature + a*u + b*slope + c = 0;
    u at the right end = g_right.  Shares no code with the solver path.
    """
    pts, hs = grid.points, grid.steps
    m = len(pts)
    A = np.zeros((m, m))
    rhs = np.zeros(m)
    A[0, 0], A[0, 1] = -1.0 / hs[0], 1.0 / hs[0]
    for i in range(1, m - 1):
        h_i, h_m = hs[i], hs[i - 1]
        ai, bi, ci = a_fn(pts[i]), b_fn(pts[i]), c_fn(pts[i])
        A[i, i + 1] = 1.0 / (h_i * h_m)
        A[i, i] = -1.0 / (h_i * h_m) - 1.0 / h_m**2 + ai + bi / h_m
        A[i, i - 1] = 1.0 / h_m**2 - bi / h_m
        rhs[i] = -ci
    A[m - 1, m - 1] = 1.0
    rhs[m - 1] = g_right
    return d.GridFunction(grid, np.linalg.solve(A, rhs))


def random_linear_instance(rng, n_max=64):
    """Random linear instance with certified constant bounds and a dense oracle.

    f = a(t)*x + b(t)*y + c(t) with a <= -0.1 and b <= 0, so the band +-40
    certifies (the solution itself stays within roughly +-20) and f is
    non-increasing in the slope argument.
    """
    n = int(rng.integers(0, n_max + 1))
    if rng.random() < 0.5:
        grid = d.uniform_grid(0.0, float(rng.uniform(0.5, 2.0)), n)
    else:
        grid = random_grid(rng, n, lo=0.02, hi=0.25)
    a0 = 0.1 + float(rng.uniform(0.0, 1.0))
    a1, b0, b1 = (float(v) for v in rng.uniform(0.0, 1.0, 3))
    c0, c1 = (float(v) for v in rng.uniform(-1.0, 1.0, 2))
    w, w2, w3 = (float(v) for v in rng.uniform(0.5, 3.0, 3))
    g_right = float(rng.uniform(0.5, 2.0))
    f_src = (
        f"-({a0!r} + {a1!r}*sin({w!r}*t)^2)*x"
        f" - ({b0!r} + {b1!r}*cos({w2!r}*t)^2)*y"
        f" + ({c0!r} + {c1!r}*sin({w3!r}*t))"
    )
    problem, bp, ap = make_instance(grid, f_src, g_right, -40.0, 40.0, lattice=8)
    exact = dense_linear_oracle(
        grid,
        lambda t: -(a0 + a1 * math.sin(w * t) ** 2),
        lambda t: -(b0 + b1 * math.cos(w2 * t) ** 2),
        lambda t: c0 + c1 * math.sin(w3 * t),
        g_right,
    )
    return problem, bp, ap, exact
