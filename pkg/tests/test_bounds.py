import numpy as np
import pytest

import deltabvp as d
from deltabvp.bounds import GridMismatchError

from conftest import parse_f, random_grid, random_grid_function


def problem_on(points, f_src, g_right):
    return d.BVProblem(grid=d.make_grid(points), f=parse_f(f_src), g_right=g_right)


class TestCheckLower:
    def test_zero_under_parabola_forcing(self):
        p = problem_on([0, 0.5, 1.0], "1 - x^2", 1.0)
        rep = d.check_lower(p, d.constant_function(p.grid, 0.0))
        assert rep.passed
        assert rep.interior_defects == (1.0,)
        assert rep.left_defect == 0.0
        assert rep.right_defect == -1.0

    def test_exact_solution_passes_with_zero_defects(self):
        p = problem_on([0, 1, 2], "0", 4.0)
        rep = d.check_lower(p, d.constant_function(p.grid, 4.0))
        assert rep.passed
        assert rep.interior_defects == (0.0,) and rep.left_defect == 0.0 and rep.right_defect == 0.0

    def test_too_large_right_value_fails(self):
        p = problem_on([0, 1, 2], "0", 4.0)
        rep = d.check_lower(p, d.constant_function(p.grid, 5.0))
        assert not rep.passed and rep.right_defect == 1.0


class TestCheckUpper:
    def test_one_at_parabola_root(self):
        p = problem_on([0, 0.5, 1.0], "1 - x^2", 1.0)
        rep = d.check_upper(p, d.constant_function(p.grid, 1.0))
        assert rep.passed
        assert rep.interior_defects == (0.0,) and rep.left_defect == 0.0 and rep.right_defect == 0.0

    def test_exact_solution_passes(self):
        p = problem_on([0, 1, 2], "0", 4.0)
        assert d.check_upper(p, d.constant_function(p.grid, 4.0)).passed

    def test_positive_forcing_breaks_constant_upper(self):
        p = problem_on([0, 1, 2], "1", 4.0)
        rep = d.check_upper(p, d.constant_function(p.grid, 4.0))
        assert not rep.passed and rep.interior_defects == (1.0,)


class TestCheckOrdering:
    def test_ordered_throughout(self):
        g = d.make_grid([0, 1, 2, 3])
        bp = d.BoundsPair(d.constant_function(g, 0.0), d.constant_function(g, 1.0))
        rep = d.check_ordering(bp)
        assert rep.passed and rep.ordered_at_right
        assert bp.ordered_through == len(g) - 1

    def test_equality_allowed(self):
        g = d.make_grid([0, 1, 2])
        a = d.constant_function(g, 0.0)
        rep = d.check_ordering(d.BoundsPair(a, a))
        assert rep.passed

    def test_reversed_fails_at_zero(self):
        g = d.make_grid([0, 1, 2])
        bp = d.BoundsPair(d.constant_function(g, 1.0), d.constant_function(g, 0.0))
        rep = d.check_ordering(bp)
        assert not rep.passed and rep.margins[0] == -1.0
        assert bp.ordered_through == -1

    def test_grid_mismatch(self):
        g1, g2 = d.make_grid([0, 1, 2]), d.make_grid([0, 1, 3])
        with pytest.raises(GridMismatchError):
            d.BoundsPair(d.constant_function(g1, 0.0), d.constant_function(g2, 1.0))


def test_duality_under_reflection():
    # If (alpha, beta) certify for (f, g), then (-beta, -alpha) certify for
    # fhat(t, x, y) = -f(t, -x, -y) with right value -g.
    rng = np.random.default_rng(31)
    cases = [
        ("1 - x^2", 1.0, 0.0, 1.0),
        ("-x", 1.0, 0.0, 1.0),
        ("0", 4.0, 4.0, 4.0),
        ("2 - x - 0.5*y", 2.0, 0.0, 2.0),
    ]
    for f_src, g_right, lo, hi in cases:
        p = problem_on([0, 0.4, 1.0], f_src, g_right)
        alpha = d.constant_function(p.grid, lo)
        beta = d.constant_function(p.grid, hi)
        assert d.check_lower(p, alpha).passed
        assert d.check_upper(p, beta).passed
        # Reflected problem: substitute -x and -y, negate the whole of f.
        fhat = parse_f(f_src.replace("x", "(-x)").replace("y", "(-y)"))
        from deltabvp.expr import Neg
        p_hat = d.BVProblem(grid=p.grid, f=Neg(fhat), g_right=-g_right)
        assert d.check_lower(p_hat, -beta).passed
        assert d.check_upper(p_hat, -alpha).passed


def test_interior_defects_shift_with_constant_forcing_offset():
    rng = np.random.default_rng(32)
    g = random_grid(rng, 4)
    cand = random_grid_function(rng, g)
    c = 0.625
    base = d.BVProblem(grid=g, f=parse_f("1 - x^2"), g_right=1.0)
    shifted = d.BVProblem(grid=g, f=parse_f(f"1 - x^2 + {c}"), g_right=1.0)
    for check in (d.check_lower, d.check_upper):
        r0 = check(base, cand)
        r1 = check(shifted, cand)
        for d0, d1 in zip(r0.interior_defects, r1.interior_defects):
            assert d1 - d0 == pytest.approx(c, abs=1e-12)
        assert r1.left_defect == r0.left_defect
        assert r1.right_defect == r0.right_defect
