import numpy as np
import pytest
from hypothesis import given, strategies as st

import deltabvp as d
from deltabvp.grid import (
    BadIntervalError,
    IndexOutOfRangeError,
    NonFiniteError,
    NonMonotonicError,
    TooShortError,
)

from conftest import random_grid, random_grid_function


class TestMakeGrid:
    def test_nonuniform_steps(self):
        g = d.make_grid([0, 0.25, 0.6, 1.0])
        assert np.allclose(g.steps, [0.25, 0.35, 0.4], rtol=0, atol=0)
        assert g.h_min == 0.25
        assert g.h_max == pytest.approx(0.4)
        assert g.n == 1

    def test_uniform_unit_steps(self):
        g = d.make_grid([0, 1, 2])
        assert list(g.steps) == [1, 1]
        assert g.h_min == g.h_max == 1.0

    def test_rejects_non_monotonic(self):
        with pytest.raises(NonMonotonicError):
            d.make_grid([0, 1, 1])

    def test_rejects_too_short(self):
        with pytest.raises(TooShortError):
            d.make_grid([0, 1])

    def test_rejects_non_finite(self):
        with pytest.raises(NonFiniteError):
            d.make_grid([0, 1, float("nan")])

    def test_steps_match_stored_points_exactly(self):
        g = d.make_grid([0.1, 0.30000001, 0.7, 1.3])
        for i in range(len(g) - 1):
            assert g.steps[i] == g.points[i + 1] - g.points[i]


class TestUniformGrid:
    def test_equal_subdivision(self):
        g = d.uniform_grid(0, 1, 2)
        assert np.allclose(g.points, [0, 0.25, 0.5, 0.75, 1.0])

    def test_smallest_grid(self):
        g = d.uniform_grid(0, 2, 0)
        assert list(g.points) == [0, 1, 2]

    def test_rejects_empty_interval(self):
        with pytest.raises(BadIntervalError):
            d.uniform_grid(1, 1, 5)


class TestDelta:
    def test_hand_value(self):
        g = d.make_grid([0, 0.5, 1.5])
        u = d.GridFunction(g, [1, 2, 4])
        assert d.delta(u, 0) == 2.0
        assert d.delta(u, 1) == 2.0

    def test_constant_is_flat(self):
        g = d.make_grid([0, 0.3, 0.9, 2.0])
        u = d.constant_function(g, 4.2)
        assert all(d.delta(u, i) == 0.0 for i in range(g.n + 2))

    def test_identity_has_unit_slope(self):
        g = d.make_grid([0, 0.3, 0.9, 2.0])
        u = d.GridFunction(g, g.points)
        assert all(d.delta(u, i) == pytest.approx(1.0) for i in range(g.n + 2))

    def test_index_out_of_range(self):
        g = d.make_grid([0, 1, 2])
        u = d.constant_function(g, 0.0)
        with pytest.raises(IndexOutOfRangeError):
            d.delta(u, g.n + 2)
        with pytest.raises(IndexOutOfRangeError):
            d.delta(u, -1)


class TestDelta2:
    def test_square_curvature(self):
        g = d.make_grid([0, 1, 2])
        u = d.GridFunction(g, g.points**2)
        assert d.delta2(u, 0) == 2.0

    def test_affine_vanishes(self):
        g = d.make_grid([0, 0.2, 0.9, 1.5, 3.0])
        u = d.GridFunction(g, 3.5 * g.points - 1.25)
        assert all(abs(d.delta2(u, i)) < 1e-14 for i in range(g.n + 1))

    def test_constant_vanishes(self):
        g = d.make_grid([0, 0.2, 0.9, 1.5])
        u = d.constant_function(g, 7.0)
        assert all(d.delta2(u, i) == 0.0 for i in range(g.n + 1))

    def test_matches_quotient_of_deltas_bitwise(self):
        rng = np.random.default_rng(5)
        g = random_grid(rng, 6)
        u = random_grid_function(rng, g)
        for i in range(g.n + 1):
            assert d.delta2(u, i) == (d.delta(u, i + 1) - d.delta(u, i)) / g.steps[i]


class TestSupNorm:
    def test_max_abs(self):
        g = d.make_grid([0, 1, 2])
        assert d.sup_norm(d.GridFunction(g, [-3, 1, 2])) == 3.0

    def test_zero(self):
        g = d.make_grid([0, 1, 2])
        assert d.sup_norm(d.constant_function(g, 0.0)) == 0.0

    def test_homogeneity(self):
        g = d.make_grid([0, 1, 2])
        u = d.GridFunction(g, [1, -1, 0.5])
        assert d.sup_norm(-2.0 * u) == 2.0 * d.sup_norm(u)


def test_delta_linearity():
    rng = np.random.default_rng(11)
    for _ in range(25):
        g = random_grid(rng, rng.integers(0, 8))
        u = random_grid_function(rng, g)
        w = random_grid_function(rng, g)
        a, b = rng.uniform(-3, 3, 2)
        comb = a * u + b * w
        for i in range(g.n + 2):
            lhs = d.delta(comb, i)
            rhs = a * d.delta(u, i) + b * d.delta(w, i)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_delta_telescoping():
    rng = np.random.default_rng(12)
    for _ in range(25):
        g = random_grid(rng, rng.integers(0, 8))
        u = random_grid_function(rng, g)
        for k in range(1, len(g)):
            total = sum(g.steps[i] * d.delta(u, i) for i in range(k))
            assert total == pytest.approx(u(k) - u(0), rel=1e-12, abs=1e-12)


@given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=12),
       st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=12),
       st.floats(-100, 100))
def test_sup_norm_axioms(vals1, vals2, scalar):
    m = min(len(vals1), len(vals2))
    g = d.make_grid(np.arange(m, dtype=float))
    u = d.GridFunction(g, vals1[:m])
    w = d.GridFunction(g, vals2[:m])
    assert d.sup_norm(u) >= 0.0
    assert (d.sup_norm(u) == 0.0) == all(v == 0.0 for v in u.values)
    assert d.sup_norm(scalar * u) == pytest.approx(abs(scalar) * d.sup_norm(u), rel=1e-12)
    assert d.sup_norm(u + w) <= d.sup_norm(u) + d.sup_norm(w) + 1e-9


def test_discrete_maximum_principle():
    # At an interior argmax the discrete curvature cannot be positive.
    rng = np.random.default_rng(13)
    for _ in range(300):
        g = random_grid(rng, rng.integers(0, 10))
        w = random_grid_function(rng, g)
        top = w.values.max()
        for ell in range(1, g.n + 2):
            if w(ell) == top:
                assert d.delta2(w, ell - 1) <= 1e-12
