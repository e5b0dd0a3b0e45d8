import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stark_embed.errors import ArgumentError, DomainError
from stark_embed.transform import (CONSTANT_LEFT, LINEAR, X_FRAME, XI_FRAME,
                                   GridFunction, PiecewisePotential,
                                   StarkFrame, V_from_q, assemble_Q, log_grid,
                                   q_from_V, read_table, weight_p, write_table,
                                   x_of_xi, xi_of_x)

F1 = StarkFrame(1.0)
C1 = 1.5 ** (2.0 / 3.0)


class TestStarkFrame:
    def test_c_alpha_at_one(self):
        assert F1.c_alpha == pytest.approx(C1, rel=1e-15)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_c_alpha_formula(self, alpha):
        f = StarkFrame(alpha)
        assert f.c_alpha == pytest.approx((1 + alpha / 2) ** (2 / (2 + alpha)),
                                          rel=1e-15)

    @pytest.mark.parametrize("alpha", [0.0, 2.0, -1.0, math.nan])
    def test_rejects_alpha(self, alpha):
        with pytest.raises(ArgumentError):
            StarkFrame(alpha)

    def test_curvature_coefficient(self):
        assert F1.curvature_coefficient == pytest.approx(-5 / 36, rel=1e-14)
        a = 0.5
        want = -(1.25 * a * a - a * (a - 1)) / (2 + a) ** 2
        assert StarkFrame(a).curvature_coefficient == pytest.approx(want)

    def test_thresholds(self):
        assert F1.critical_coupling == pytest.approx(math.pi / 12)
        assert F1.critical_amplitude == pytest.approx(math.pi / 4)
        assert StarkFrame(0.5).critical_amplitude == pytest.approx(1.5 * math.pi / 4)


class TestCoordinates:
    def test_xi_of_x_values(self):
        assert xi_of_x(0.0, F1) == 0.0
        assert xi_of_x(1.0, F1) == pytest.approx(2 / 3, rel=1e-15)
        assert xi_of_x(4.0, F1) == pytest.approx(16 / 3, rel=1e-15)

    def test_x_of_xi_values(self):
        assert x_of_xi(2 / 3, F1) == pytest.approx(1.0, rel=1e-14)
        assert x_of_xi(0.0, StarkFrame(0.5)) == 0.0

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_round_trip(self, alpha):
        f = StarkFrame(alpha)
        x = np.concatenate([[0.5, 1, 10, 100], np.geomspace(1e-3, 1e6, 500)])
        assert np.allclose(x_of_xi(xi_of_x(x, f), f), x, rtol=1e-12, atol=0)

    def test_negative_inputs(self):
        with pytest.raises(DomainError):
            xi_of_x(-1.0, F1)
        with pytest.raises(DomainError):
            x_of_xi(-1.0, F1)
        with pytest.raises(DomainError):
            weight_p(0.0, F1)

    def test_weight(self):
        assert weight_p(1.0, F1) == pytest.approx(1 / C1, rel=1e-15)
        assert weight_p(8.0, F1) == pytest.approx(1 / (4 * C1), rel=1e-14)
        w = weight_p(np.geomspace(1, 1e6, 50), F1)
        assert np.all(np.diff(w) < 0)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_weight_consistency(self, alpha):
        f = StarkFrame(alpha)
        x = np.geomspace(0.01, 1e4, 200)
        assert np.allclose(weight_p(xi_of_x(x, f), f) * x ** alpha, 1.0,
                           rtol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.05, 1.95), st.floats(1e-6, 1e8))
    def test_round_trip_property(self, alpha, x):
        f = StarkFrame(alpha)
        assert x_of_xi(xi_of_x(x, f), f) == pytest.approx(x, rel=1e-12)


class TestGridFunction:
    def test_nodes_exact(self):
        g = log_grid(1, 100, 37)
        v = np.sin(g)
        for interp in (LINEAR, CONSTANT_LEFT):
            fn = GridFunction(g, v, interp)
            assert np.array_equal(fn(g), v)

    def test_constant_left(self):
        fn = GridFunction([0.0, 1.0, 2.0], [5.0, 7.0, 9.0], CONSTANT_LEFT)
        assert fn(0.5) == 5.0 and fn(1.0) == 7.0 and fn(1.999) == 7.0

    def test_outside_raises(self):
        fn = GridFunction([1.0, 2.0], [0.0, 1.0])
        with pytest.raises(DomainError):
            fn(2.5)

    @pytest.mark.parametrize("grid,vals", [([1.0, 1.0], [0, 0]),
                                           ([2.0, 1.0], [0, 0]),
                                           ([1.0, 2.0], [0.0]),
                                           ([], [])])
    def test_invalid(self, grid, vals):
        with pytest.raises(ArgumentError):
            GridFunction(grid, vals)

    def test_save_load(self, tmp_path):
        fn = GridFunction(log_grid(1, 10, 11), np.arange(11.0) / 3,
                          CONSTANT_LEFT, XI_FRAME, 0.5)
        p = fn.save(tmp_path / "f.txt")
        back = GridFunction.load(p)
        assert np.array_equal(back.grid, fn.grid)
        assert np.array_equal(back.values, fn.values)
        assert back.interp == CONSTANT_LEFT and back.alpha == 0.5

    def test_large_tables_are_gzipped_deterministically(self, tmp_path):
        data = np.column_stack([np.arange(300_000.0), np.ones(300_000)])
        p1 = write_table(tmp_path / "a.txt", data, "k=1")
        p2 = write_table(tmp_path / "b.txt", data, "k=1")
        assert p1.suffix == ".gz"
        assert p1.read_bytes() == p2.read_bytes()
        meta, back = read_table(tmp_path / "a.txt")
        assert meta["k"] == "1" and np.array_equal(back, data)

    def test_to_piecewise_matches(self):
        g = log_grid(1, 50, 40)
        fn = GridFunction(g, np.cos(g))
        pw = fn.to_piecewise()
        pts = np.linspace(1, 50, 999)[:-1]  # segments are half-open
        assert np.allclose(pw(pts), fn(pts), atol=1e-13)


class TestDictionary:
    def test_zero(self):
        V = GridFunction(log_grid(1, 1e3, 20), np.zeros(20))
        assert np.all(q_from_V(V, F1).values == 0)
        q = GridFunction(log_grid(1, 1e3, 20), np.zeros(20), frame=X_FRAME)
        assert np.all(V_from_q(q, F1).values == 0)

    def test_inverse_xi(self):
        xi = log_grid(1, 1e4, 200)
        q = q_from_V(GridFunction(xi, 1 / xi), F1)
        assert np.allclose(q.values, 1.5 * q.grid ** -0.5, rtol=1e-13)
        x = log_grid(1, 1e3, 100)
        V = V_from_q(GridFunction(x, 1.5 * x ** -0.5, frame=X_FRAME), F1)
        assert np.allclose(V.values, 1 / V.grid, rtol=1e-13)

    def test_sign_potential_envelope(self):
        d = 0.37
        xi = log_grid(1, 1e5, 301)
        s = np.where(np.arange(301) % 3 == 0, 1.0, -1.0)
        q = q_from_V(GridFunction(xi, -(2 * d / xi) * s), F1)
        assert np.allclose(np.sqrt(q.grid) * np.abs(q.values), 3 * d,
                           rtol=1e-13)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_round_trip(self, alpha, rng):
        f = StarkFrame(alpha)
        x = log_grid(0.1, 1e4, 1000)
        q = GridFunction(x, rng.standard_normal(1000), frame=X_FRAME, alpha=alpha)
        back = q_from_V(V_from_q(q, f), f)
        assert np.allclose(back.values, q.values, rtol=1e-12, atol=0)
        assert np.allclose(back.grid, q.grid, rtol=1e-12)

    def test_envelope_identity(self):
        xi = log_grid(1, 1e4, 50)
        V = GridFunction(xi, np.cos(xi) / xi)
        q = q_from_V(V, F1)
        assert np.allclose(np.sqrt(q.grid) * np.abs(q.values),
                           1.5 * xi * np.abs(V.values), rtol=1e-13)

    def test_wrong_frame(self):
        q = GridFunction([1.0, 2.0], [0.0, 0.0], frame=X_FRAME)
        with pytest.raises(ArgumentError):
            q_from_V(q, F1)


class TestEffectivePotential:
    def test_free_values(self):
        Q = assemble_Q(None, 0.0, F1)
        assert Q(1.0) == pytest.approx(-5 / 36, rel=1e-14)
        assert assemble_Q(None, 1.0, F1)(1.0) == pytest.approx(-5 / 36 - 1 / C1)

    def test_alpha_one_form(self):
        xi = np.geomspace(1, 1e3, 30)
        V = GridFunction(xi, np.sin(xi) / xi)
        E = 0.7
        Q = assemble_Q(V, E, F1)(xi)
        x = C1 * xi ** (2 / 3)
        q = x * V.values
        want = -5 / (36 * xi ** 2) + (q - E) / x
        assert np.allclose(Q, want, rtol=1e-12)

    def test_tends_to_zero_from_below(self):
        Q = assemble_Q(None, 0.0, F1)
        vals = Q(np.geomspace(1, 1e6, 20))
        assert np.all(vals < 0) and np.all(np.diff(vals) > 0)
        assert abs(vals[-1]) < 1e-12

    def test_rejects_x_frame(self):
        q = GridFunction([1.0, 2.0], [0.0, 0.0], frame=X_FRAME)
        with pytest.raises(ArgumentError):
            assemble_Q(q, 0.0, F1)


class TestPiecewisePotential:
    def test_eval_and_zero_outside(self):
        pw = PiecewisePotential([1.0, 2.0, 4.0], [0.0, 1.0], [1.0, 0.0],
                                [0.0, 2.0], [0.0, 0.0])
        assert pw(1.5) == pytest.approx(1.5)
        assert pw(3.0) == pytest.approx(1.0 + 2.0 / 3.0)
        assert pw(5.0) == 0.0 and pw(0.5) == 0.0

    def test_save_load(self, tmp_path):
        pw = PiecewisePotential([1.0, 2.0, 4.0], [0.0, 1.0], [1.0, 0.0],
                                [0.0, 2.0], [0.0, 0.5])
        back = PiecewisePotential.load(pw.save(tmp_path / "p.txt"))
        pts = np.linspace(0.5, 4.5, 77)
        assert np.array_equal(back(pts), pw(pts))
