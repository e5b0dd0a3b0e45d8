import math

import numpy as np
import pytest

from stark_embed import constructor as C
from stark_embed.errors import ArgumentError, InfeasibleScheduleError
from stark_embed.transform import (GridFunction, StarkFrame, V_from_q,
                                   log_grid)

F1 = StarkFrame(1.0)


@pytest.fixture(scope="module")
def piece():
    return C.construct_piece(C.PieceSpec(0.0, (1.0,), 1e3, 1e4, 0.0, 0.0, 1.0))


class TestSingle:
    def test_envelope_is_3d(self, sign_pi6):
        assert sign_pi6.info["envelope_sup"] == pytest.approx(math.pi / 2,
                                                              rel=1e-6)
        assert sign_pi6.info["a"] == pytest.approx(math.pi / 2)

    def test_support_starts_at_one(self, sign_pi6):
        V = sign_pi6.V
        assert V.grid[0] == 1.0
        assert np.all(sign_pi6.potential(np.array([0.2, 0.9, 2e6])) == 0.0)

    def test_segments_match_samples(self, sign_pi6):
        V, pw = sign_pi6.V, sign_pi6.potential
        # samples hold the right value at each node, segments are exact c/xi
        g = V.grid[:-1]
        assert np.allclose(pw(g), V.values[:-1], rtol=1e-14)

    def test_q_round_trip(self, sign_pi6):
        back = V_from_q(sign_pi6.q, F1)
        assert np.allclose(back.values, sign_pi6.V.values, rtol=1e-12, atol=0)

    def test_rejects_short_range(self):
        with pytest.raises(ArgumentError):
            C.construct_single(0.0, 0.5, 0.0, 100.0)


class TestCritical:
    def test_schedule_values(self):
        s = C.CriticalSchedule()
        assert s.breakpoint(1) == pytest.approx(2 ** (4 / math.pi))
        assert s.breakpoint(2) == pytest.approx(2 ** (32 / math.pi))
        assert s.epsilon(3) == pytest.approx(1 / 3)
        assert s.coupling(2) == pytest.approx(math.pi / 12 + 0.5)
        # couplings fall to the critical value
        assert 2 * s.coupling(10 ** 6) == pytest.approx(math.pi / 6, abs=1e-5)

    def test_onset_avoids_sliding(self):
        s = C.CriticalSchedule()
        assert s.onset() >= 4 * s.coupling(1)
        assert 2 * s.coupling(1) / s.onset() <= 0.5

    def test_needs_second_block(self):
        with pytest.raises(ArgumentError):
            C.CriticalSchedule().table(500.0)

    def test_block_envelopes(self):
        out = C.construct_single_critical(0.0, 0.0, 3e4)
        V = out.V
        for b in out.info["blocks"]:
            m = (V.grid >= b["start"]) & (V.grid < b["end"]) & (V.values != 0)
            assert m.sum() > 100
            assert np.allclose(V.grid[m] * np.abs(V.values[m]), 2 * b["d"],
                               rtol=1e-13)
        assert np.all(V.values[V.grid < out.info["blocks"][0]["start"]] == 0)

    def test_schrodinger_exact_coupling(self):
        out = C.construct_schrodinger_critical(math.pi / 2, 0.0, 1e4)
        assert out.info["lambda"] == pytest.approx(1.0)
        x, v = out.V.grid, out.V.values
        for b in out.info["blocks"]:
            m = (x >= b["start"]) & (x < b["end"]) & (v != 0)
            want = (math.pi / 2) * (1 + 4 / (math.pi * b["n"]))
            assert b["coupling"] == pytest.approx(want)
            assert np.allclose(x[m] * np.abs(v[m]), want, rtol=1e-12)

    def test_schrodinger_phase_velocity(self):
        out = C.construct_schrodinger_critical(math.pi / 2, 0.0, 1e4)
        tr = out.trajectory
        x = np.linspace(5e3, 9e3, 400)
        d = tr.dense(x + 1.0)[0] - tr.dense(x)[0]
        assert np.mean(d) == pytest.approx(1.0, abs=1e-3)

    def test_schrodinger_rejects(self):
        with pytest.raises(ArgumentError):
            C.construct_schrodinger_critical(-1.0)
        with pytest.raises(ArgumentError):
            C.construct_schrodinger_critical(1.0, 0.0, 100.0)


class TestPiece:
    def test_target_decays(self, piece):
        t = piece.trajectory
        assert t.logR[-1] - t.logR[0] <= -math.log(10) + 0.5

    def test_avoid_stays_bounded(self, piece):
        t = piece.avoid_trajectories[0]
        assert t.energy == 1.0
        assert np.max(np.abs(t.logR - t.logR[0])) <= 0.5

    def test_envelope(self, piece):
        V = piece.V
        assert np.all(V.grid * np.abs(V.values) <= 4.0)
        assert V.values[0] == 0.0 and V.values[-1] == 0.0
        assert not piece.flagged

    def test_zero_coupling(self):
        r = C.construct_piece(C.PieceSpec(0.0, (1.0,), 1e3, 1e4, 0.0, 0.0, 0.0))
        assert np.all(r.V.values == 0)
        assert abs(r.trajectory.logR[-1]) < 5 / 36 / 1e3

    def test_mollification_shift(self, piece):
        sharp = C.construct_piece(piece.spec, window_frac=1e-9)
        shift = abs(sharp.trajectory.logR[-1] - piece.trajectory.logR[-1])
        assert shift <= 4 * 1.0 * piece.window / 1e3

    @pytest.mark.parametrize("kw", [dict(xi0=10.0, xi1=5.0),
                                    dict(avoid=(0.0,)), dict(M=-1.0),
                                    dict(avoid=(1.0, 1.0))])
    def test_spec_errors(self, kw):
        args = dict(energy=0.0, avoid=(1.0,), xi0=10.0, xi1=100.0, b=0.0,
                    theta0=0.0, M=1.0)
        args.update(kw)
        with pytest.raises(ArgumentError):
            C.PieceSpec(**args)


class TestMollify:
    def setup_method(self):
        g = log_grid(10, 1000, 2001)
        self.V = GridFunction(g, -4.0 * np.sin(g) / g)

    def test_small_window_is_identity(self):
        out = C.mollify_endpoints(self.V, 1e-9)
        assert np.array_equal(out.values[1:-1], self.V.values[1:-1])

    def test_envelope_preserved(self):
        out = C.mollify_endpoints(self.V, 20.0)
        g = self.V.grid
        assert np.all(np.abs(out.values) <= np.abs(self.V.values))
        inner = (g > 30.0) & (g < 980.0)
        assert np.array_equal(out.values[inner], self.V.values[inner])
        assert out.values[0] == 0.0 and out.values[-1] == 0.0

    @pytest.mark.parametrize("w", [0.0, 99.0])
    def test_bad_window(self, w):
        with pytest.raises(ArgumentError):
            C.mollify_endpoints(self.V, w)

    def test_smooth_step(self):
        assert C.smooth_step(-1.0) == 0.0 and C.smooth_step(2.0) == 1.0
        assert C.smooth_step(0.5) == pytest.approx(0.5)


class TestFiniteSchedule:
    def test_n2_values(self):
        s = C.schedule_finite(2, 4)
        eps = 1 / math.sqrt(math.log(2))
        assert s.epsilon == pytest.approx(eps)
        assert s.M == pytest.approx(1 / 6 + math.sqrt(math.log(2)) / 6)
        assert s.envelope_bound == pytest.approx(
            math.exp(2 * math.sqrt(math.log(2))) * 2)
        assert s.envelope_bound == pytest.approx(10.572493, rel=1e-6)
        assert s.T[0] == pytest.approx(2 ** (1 + eps))
        assert s.J[1] == pytest.approx(1 + 2 * s.T[0])

    @pytest.mark.parametrize("N", [2, 3, 5, 17, 1000])
    def test_identity(self, N):
        s = C.schedule_finite(N, 2)
        assert 6 * s.epsilon * s.M == pytest.approx(1 + s.epsilon, rel=1e-14)

    @pytest.mark.parametrize("N", [2, 3, 7])
    def test_limit_ratio(self, N):
        s = C.schedule_finite(N, 14)
        assert s.T[-1] / s.J[-2] == pytest.approx(N ** s.epsilon - 1 / N,
                                                  rel=1e-3)
        assert s.limit_ratio == pytest.approx(N ** s.epsilon - 1 / N + 1)

    def test_errors(self):
        for N in (1, 2.5):
            with pytest.raises(ArgumentError):
                C.schedule_finite(N)
        with pytest.raises(ArgumentError):
            C.schedule_finite(2, 4).plan([0.0], [0.0])


class TestGlue:
    def test_contraction_and_envelope(self, glued_w4):
        s, g = glued_w4
        w0 = g.w0()
        assert w0 is not None
        for b in g.blocks:
            assert b["envelope_ok"]
            if b["w"] >= w0:
                assert max(b["delta"]) <= 0.0
        assert not g.warnings

    def test_realized_range_capped(self, glued):
        assert glued.xi_max == 1e6
        assert glued.blocks[-1]["complete"] is False
        assert glued.realized_blocks == len(glued.blocks) - 1

    def test_shared_grid_and_anchor(self, glued_w4):
        _, g = glued_w4
        t0, t1 = g.trajectories
        assert np.array_equal(t0.xi, t1.xi) and t0.xi[0] == 1.0
        assert np.max(np.abs(np.diff(t0.theta))) < math.pi

    def test_single_energy_plan(self):
        plan = C.ConstructionPlan((0.0,), (0.0,), 1.0, (50.0, 100.0, 300.0))
        g = C.glue(plan)
        for b in g.blocks:
            assert b["k"] == 1
            assert b["envelope_max"] <= 4.0 * (1 + 1e-12)
            want = -math.log(b["ratio"]) + math.log1p(b["slack"])
            assert b["delta"][0] <= want + 1e-12

    def test_plan_errors(self):
        with pytest.raises(ArgumentError):
            C.ConstructionPlan((0.0, 0.0), (0.0, 0.0), 1.0, (10.0,))
        with pytest.raises(ArgumentError):
            C.ConstructionPlan((0.0,), (0.0, 1.0), 1.0, (10.0,))
        with pytest.raises(ArgumentError):
            C.ConstructionPlan((0.0,), (0.0,), 0.0, (10.0,))


class TestInfinitePrefix:
    def test_log_profile_w3(self):
        def h(x):
            return np.log(np.e + np.asarray(x))

        plan = C.schedule_infinite_prefix([0.0, 1.0], h, 3)
        assert plan.block_k == (1, 2, 2)
        g = C.glue(plan)
        ok, worst = C.envelope_within(g.V, h, F1)
        assert ok and worst <= 1.0

    def test_large_constant_is_single(self):
        plan = C.schedule_infinite_prefix([0.0], lambda x: 1e3, 3)
        assert plan.block_k == (1, 1, 1)
        assert max(plan.block_M) == 100.0

    def test_infeasible(self):
        with pytest.raises(InfeasibleScheduleError):
            C.schedule_infinite_prefix([0.0, 1.0], lambda x: 0.5, 3)
