import math

import numpy as np
import pytest
from scipy.special import airy

from stark_embed.errors import ArgumentError
from stark_embed.oracle import (ShootingSolution, boundary_angle,
                                cross_validate, liouville_data,
                                negative_tail_solution, shoot, x_frame_data)
from stark_embed.transform import StarkFrame, xi_of_x

F1 = StarkFrame(1.0)


@pytest.fixture(scope="module")
def airy_sol():
    x = np.linspace(0.0, 110.0, 110_001)
    return shoot(None, 0.0, F1, 0.0, 110.0, 0.0, x_eval=x)


class TestShoot:
    def test_zero_spacing(self, airy_sol):
        u, _ = airy_sol.true_values()
        x = airy_sol.x
        i = np.nonzero(np.sign(u[1:]) != np.sign(u[:-1]))[0]
        # linear interpolation of the zeros
        z = x[i] - u[i] * (x[i + 1] - x[i]) / (u[i + 1] - u[i])
        mid = 0.5 * (z[1:] + z[:-1])
        sel = (mid >= 25) & (mid <= 100)
        assert sel.sum() > 50
        ratio = np.diff(z)[sel] / (math.pi / np.sqrt(mid[sel]))
        assert np.all(np.abs(ratio - 1) <= 0.05)

    def test_matches_airy_functions(self):
        # u'' = -x u with u(0) = 1, u'(0) = 0 is a combination of Ai(-x), Bi(-x)
        x = np.linspace(0.0, 30.0, 301)
        sol = shoot(None, 0.0, F1, 0.0, 30.0, 0.0, x_eval=x)
        ai0, aip0, bi0, bip0 = airy(0.0)
        ai, _, bi, _ = airy(-x)
        det = ai0 * (-bip0) - bi0 * (-aip0)
        c1, c2 = -bip0 / det, aip0 / det
        want = c1 * ai + c2 * bi
        assert np.allclose(sol.true_values()[0], want, atol=1e-8)

    def test_linearity_and_rotation(self):
        x = np.linspace(1.0, 40.0, 200)
        a = shoot(None, 0.5, F1, 1.0, 40.0, 0.3, x_eval=x)
        b = shoot(None, 0.5, F1, 1.0, 40.0, 0.3, x_eval=x,
                  initial=(2 * math.cos(0.3), 2 * math.sin(0.3)))
        c = shoot(None, 0.5, F1, 1.0, 40.0, 0.3 + math.pi, x_eval=x)
        ua, ub, uc = (s.true_values()[0] for s in (a, b, c))
        assert np.allclose(ub, 2 * ua, rtol=1e-9, atol=1e-12)
        assert np.allclose(uc, -ua, rtol=1e-9, atol=1e-12)

    def test_residual(self, airy_sol):
        assert airy_sol.residual() < 1e-3

    def test_save_load(self, tmp_path):
        s = shoot(None, 0.0, F1, 0.0, 10.0, 0.2, x_eval=np.linspace(0, 10, 11))
        back = ShootingSolution.load(s.save(tmp_path / "s.txt"))
        assert np.array_equal(back.u, s.u) and back.theta_bc == 0.2

    def test_errors(self):
        with pytest.raises(ArgumentError):
            shoot(None, 0.0, F1, 5.0, 1.0, 0.0)
        with pytest.raises(ArgumentError):
            shoot(None, 0.0, F1, 1.0, 5.0, 0.0, x_eval=[0.5])


class TestLiouvilleData:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_round_trip(self, alpha):
        f = StarkFrame(alpha)
        x = np.geomspace(0.5, 500, 40)
        u, du = np.cos(x), np.sin(x) - 0.1
        phi, dphi = liouville_data(x, u, du, f)
        x2, u2, du2 = x_frame_data(xi_of_x(x, f), phi, dphi, f)
        assert np.allclose(x2, x) and np.allclose(u2, u) and np.allclose(du2, du)


class TestCrossValidate:
    def test_free_short(self):
        rng = (xi_of_x(1.0, F1), xi_of_x(50.0, F1))
        assert cross_validate(None, 0.0, F1, rng, 0.3) <= 1e-6

    def test_free(self):
        assert cross_validate(None, 0.0, F1, (1.0, 400.0), 0.0) <= 1e-6

    def test_tolerance_convergence(self):
        devs = [cross_validate(None, 1.0, F1, (1.0, 200.0), 0.4,
                               prufer_tol=t, tol=1e-12)
                for t in (1e-7, 1e-9, 1e-11)]
        assert devs[2] < devs[1] < devs[0]
        assert devs[2] < 1e-10

    def test_modified_alpha(self):
        f = StarkFrame(0.5)
        assert cross_validate(None, 1.0, f, (2.0, 300.0), 0.1) <= 1e-6

    def test_details(self):
        dev, det = cross_validate(None, 0.0, F1, (1.0, 50.0), 0.0,
                                  return_details=True)
        assert det["deviation"].max() == dev
        assert det["deviation"][det["norm_index"]] == pytest.approx(0, abs=1e-15)


class TestNegativeTail:
    def test_constant(self):
        M = 1.0
        c = 4 * M * M + 2
        y = negative_tail_solution(lambda x: c, M, -5.0, -30.0)
        assert np.allclose(y.log_slope, math.sqrt(c), rtol=1e-6)
        assert y.values[-1] == 1.0

    def test_linear_potential(self):
        y = negative_tail_solution(abs, 3.0, -40.0, -200.0)
        s = y.log_slope
        assert np.all(s >= 3.0)
        k = np.argmin(np.abs(y.grid + 100.0))
        assert s[k] == pytest.approx(10.0, rel=0.1)
        # slope grows toward -infinity where qtilde grows
        assert np.all(np.diff(s) <= 1e-9)

    def test_matches_airy(self):
        y = negative_tail_solution(abs, 3.0, -40.0, -80.0)
        ai = airy(-y.grid)[0]
        assert np.allclose(y.values, ai / ai[-1], rtol=1e-6)

    def test_errors(self):
        with pytest.raises(ArgumentError):
            negative_tail_solution(abs, 3.0, 5.0)
        with pytest.raises(ArgumentError):
            negative_tail_solution(abs, 3.0, -40.0, -10.0)


@pytest.mark.parametrize("E", [0.0, 1.0, -2.0])
def test_boundary_angle_airy(E):
    # decaying solution on x < 0 is Ai(-x - E)
    ai, aip, _, _ = airy(-E)
    want = math.atan2(-aip, ai) % math.pi
    assert boundary_angle(E, F1) == pytest.approx(want, abs=1e-9)
