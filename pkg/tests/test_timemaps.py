import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _oracles import mp_phi, mp_time_partial, rk_time_to_u
from mnlab import timemaps as tm
from mnlab.errors import DomainError
from mnlab.quadrature import beta_integral

# time from u = 1 back to the turning point (3, 0) at lam=-1, p=3 (RK event oracle)
PARTIAL_RK = 0.49811700226670397
# time from the v-axis to (1, 1) on the unstable manifold at lam=-1, p=3 (RK event oracle)
FROM_AXIS_RK = 1.1935004713185313
# phi(20, 0.7) at lam=6, p=3 (mpmath, original variable)
PHI_20_07 = 0.5367350719006379


class TestSpecialPoints:
    @pytest.mark.parametrize("lam,p,ref", [(-2, 3, 2.0), (-1, 3, math.sqrt(2.0))])
    def test_homoclinic(self, lam, p, ref):
        assert tm.homoclinic_crossing(lam, p) == pytest.approx(ref, rel=1e-15)

    @given(st.floats(1.1, 8.0))
    def test_homoclinic_unit(self, p):
        assert tm.homoclinic_crossing(-2.0 / (p + 1.0), p) == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("lam,p,ref", [(-1, 3, 1.0), (-4, 3, 2.0), (-1, 2, 1.0)])
    def test_equilibrium(self, lam, p, ref):
        assert tm.equilibrium(lam, p) == pytest.approx(ref, rel=1e-15)

    @given(st.floats(-50, -0.01), st.floats(1.1, 8.0))
    def test_order(self, lam, p):
        assert tm.equilibrium(lam, p) < tm.homoclinic_crossing(lam, p)

    def test_domain(self):
        for f in (tm.homoclinic_crossing, tm.equilibrium):
            with pytest.raises(DomainError):
                f(0.0, 3)


class TestTimeNFull:
    def test_scaling_lam0(self):
        r = tm.time_N_full(0, 3, 4.0) / tm.time_N_full(0, 3, 1.0)
        assert r == pytest.approx(0.25, rel=1e-12)
        ref = mp_time_partial(0, 3, 4.0) / mp_time_partial(0, 3, 1.0)
        assert r == pytest.approx(ref, rel=1e-12)

    def test_small_amplitude_limit(self):
        assert abs(tm.time_N_full(1, 3, 1e-8) - math.pi / 2) < 1e-4

    def test_homoclinic_divergence(self):
        assert tm.time_N_full(-1, 3, math.sqrt(2.0) * (1 + 1e-9)) > 10.0

    def test_against_mpmath(self):
        for lam, p, u0 in [(-1, 3, 2.0), (2, 3, 1.5), (-5, 2.5, 6.0), (0, 5, 0.7)]:
            assert tm.time_N_full(lam, p, u0) == pytest.approx(mp_time_partial(lam, p, u0), rel=1e-11)

    def test_domain(self):
        with pytest.raises(DomainError):
            tm.time_N_full(-1, 3, 1.0)
        with pytest.raises(DomainError):
            tm.time_N_full(1, 3, 0.0)

    @given(st.floats(-20, 9.8).filter(lambda l: l == 0 or abs(l) > 1e-6), st.floats(1.2, 6),
           st.floats(1.001, 50), st.floats(1.01, 3))
    def test_decreasing(self, lam, p, mult, step):
        base = tm.homoclinic_crossing(lam, p) if lam < 0 else 0.05
        u0 = base * mult
        assert tm.time_N_full(lam, p, u0 * step) < tm.time_N_full(lam, p, u0)


class TestTimeNPartial:
    def test_zero_lower_limit(self):
        assert tm.time_N_partial(-1, 3, 3.0, 0.0) == tm.time_N_full(-1, 3, 3.0)

    def test_vanishing_interval(self):
        assert tm.time_N_partial(-1, 3, 3.0, 3.0 * (1 - 1e-12)) < 1e-5

    def test_rk_oracle(self):
        assert tm.time_N_partial(-1, 3, 3.0, 1.0) == pytest.approx(PARTIAL_RK, abs=1e-8)

    def test_rk_oracle_live(self):
        assert rk_time_to_u(3.0, 0.0, 1.0, -1, 3, direction=-1.0) == pytest.approx(PARTIAL_RK, abs=1e-11)

    def test_domain(self):
        with pytest.raises(DomainError):
            tm.time_N_partial(-1, 3, 3.0, 3.0)


class TestFromAxis:
    def test_decreasing(self):
        assert tm.time_N_from_axis(-1, 3, 1.0) > tm.time_N_from_axis(-1, 3, 2.0)

    def test_rk_oracle(self):
        assert tm.time_N_from_axis(-1, 3, 1.0) == pytest.approx(FROM_AXIS_RK, abs=1e-8)

    def test_rk_oracle_live(self):
        # orbit through (1, 1) has energy 1/4 and crosses the v-axis at sqrt(1/2)
        assert rk_time_to_u(0.0, math.sqrt(0.5), 1.0, -1, 3) == pytest.approx(FROM_AXIS_RK, abs=1e-11)

    def test_large(self):
        assert tm.time_N_from_axis(-1, 3, 1e4) < 0.05

    def test_domain(self):
        with pytest.raises(DomainError):
            tm.time_N_from_axis(1.0, 3, 1.0)


class TestUnstableToAxis:
    def test_decomposition_example(self):
        u_om, t2 = tm.time_N_unstable_to_axis(-1, 3, 2.0)
        assert tm.time_N_full(-1, 3, 2.0) == pytest.approx(tm.time_N_from_axis(-1, 3, u_om) + t2,
                                                           abs=1e-9)

    @given(st.floats(-20, -0.1), st.floats(1.5, 5), st.floats(1.01, 10))
    def test_decomposition_grid(self, lam, p, mult):
        u_plus = tm.homoclinic_crossing(lam, p) * mult
        u_om, t2 = tm.time_N_unstable_to_axis(lam, p, u_plus)
        lhs = tm.time_N_full(lam, p, u_plus)
        assert lhs == pytest.approx(tm.time_N_from_axis(lam, p, u_om) + t2, abs=1e-9 * max(1, lhs))

    def test_ratio_increasing(self):
        r = [tm.unstable_crossing(-1, 3, u) / u for u in (2.0, 3.0, 5.0)]
        assert r[0] < r[1] < r[2] < 1.0

    def test_ratio_vanishes_at_homoclinic(self):
        uh = math.sqrt(2.0)
        r = [tm.unstable_crossing(-1, 3, uh * (1 + e)) / (uh * (1 + e)) for e in (1e-2, 1e-6, 1e-12)]
        assert r[0] > r[1] > r[2] and r[2] < 2e-3

    def test_on_manifold(self):
        lam, p, u_plus = -1.0, 3.0, 2.5
        u_om = tm.unstable_crossing(lam, p, u_plus)
        e_turn = lam * u_plus ** 2 / 2 + u_plus ** 4 / 4
        v = math.sqrt(-lam) * u_om
        assert 0.5 * v * v + lam * u_om ** 2 / 2 + u_om ** 4 / 4 == pytest.approx(e_turn, rel=1e-13)


class TestLinearTimes:
    def test_hyperbolic_examples(self):
        assert tm.time_L_hyperbolic(-1, 1.0, math.cosh(1.0)) == pytest.approx(1.0, abs=1e-14)
        assert tm.time_L_hyperbolic(-4, 1.0, math.cosh(2.0)) == pytest.approx(1.0, abs=1e-14)
        assert tm.time_L_hyperbolic(-1, 1.0, 1.0 + 1e-14) < 1e-6
        with pytest.raises(DomainError):
            tm.time_L_hyperbolic(-1, 2.0, 1.0)

    @given(st.floats(-30, -0.01), st.floats(0.01, 10), st.floats(1.0001, 20))
    def test_hyperbolic_duality(self, lam, u_plus, ratio):
        a = tm.time_L_hyperbolic(lam, u_plus, u_plus * ratio)
        b = tm.time_L_hyperbolic_quadrature(lam, u_plus, u_plus * ratio)
        assert abs(a - b) < 1e-10

    def test_to_axis_examples(self):
        assert tm.time_L_to_axis(-1, 0.0, -1.0) == 0.0
        assert tm.time_L_to_axis(-1, math.sinh(1.0), -1.0) == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(DomainError):
            tm.time_L_to_axis(-1, 1.0, 1.0)

    def test_to_axis_flow_oracle(self):
        # exact hyperbolic flow from (0, -1) backwards reaches u = 2 at time asinh(2)
        t = tm.time_L_to_axis(-1, 2.0, -1.0)
        u = -math.sinh(-t)  # u(s) = v_minus sinh(s) for lam = -1
        assert u == pytest.approx(2.0, abs=1e-10)
        assert t == pytest.approx(math.asinh(2.0), abs=1e-10)

    @given(st.floats(-30, -0.01), st.floats(0.0, 10), st.floats(-10, -0.01))
    def test_to_axis_duality(self, lam, u_r, v):
        assert abs(tm.time_L_to_axis(lam, u_r, v) - tm.time_L_to_axis_quadrature(lam, u_r, v)) < 1e-10

    def test_ratio(self):
        assert tm.time_L_ratio(-1, math.cosh(0.7)) == pytest.approx(0.7, abs=1e-14)


class TestConeAndGate:
    def test_cone_decreasing(self):
        m = [tm.cone_slope(-1, h) for h in (0.2, 0.5, 0.8)]
        assert m[0] > m[1] > m[2]

    def test_cone_h1(self):
        assert tm.cone_slope(-1, 1.0) == pytest.approx(1.0 / math.tanh(1.0), abs=1e-12)
        assert tm.cone_slope(-1, 1.0) == pytest.approx(1.3130, abs=5e-5)

    def test_cone_small_h(self):
        assert tm.cone_slope(-1, 0.05) > 10.0

    @given(st.floats(-30, -0.01), st.floats(0.01, 1.0))
    def test_cone_coth(self, lam, h):
        k = math.sqrt(-lam)
        assert tm.cone_slope(lam, h) == pytest.approx(k / math.tanh(k * h), rel=1e-12)

    def test_gate_roundtrip(self):
        C = tm.linear_gate_ratio(-1, 0.6)
        assert C > 1.0
        assert tm.time_L_hyperbolic(-1, 1.0, C) == pytest.approx(0.3, abs=1e-10)

    def test_gate_small_h(self):
        c = [tm.linear_gate_ratio(-1, h) for h in (1e-2, 1e-4, 1e-6)]
        assert c[0] > c[1] > c[2] > 1.0 and c[2] - 1.0 < 1e-11

    def test_gate_cosh(self):
        assert tm.linear_gate_ratio(-4, 1.0) == pytest.approx(math.cosh(1.0), rel=1e-14)

    @given(st.floats(-30, -0.01), st.floats(0.01, 0.99))
    def test_gate_roundtrip_property(self, lam, h):
        C = tm.linear_gate_ratio(lam, h)
        assert tm.time_L_hyperbolic(lam, 1.0, C) == pytest.approx(h / 2, abs=1e-10)

    def test_domain(self):
        for f in (tm.cone_slope, tm.linear_gate_ratio):
            with pytest.raises(DomainError):
                f(1.0, 0.5)
            with pytest.raises(DomainError):
                f(-1.0, 0.0)


class TestPhi:
    def test_small_R(self):
        assert abs(tm.phi(1e-10, 0.3, 1, 3) - (math.pi - 0.6)) < 1e-4

    @pytest.mark.parametrize("R", [1e-6, 1.0, 300.0, 1e6])
    def test_zero_at_right_angle(self, R):
        assert tm.phi(R, math.pi / 2, 6, 3) == 0.0

    def test_mpmath_oracle(self):
        assert tm.phi(20, 0.7, 6, 3) == pytest.approx(PHI_20_07, rel=1e-12)
        for R, th in [(300, 0.0), (300, 0.05), (4, 1.2)]:
            assert tm.phi(R, th, 6, 3) == pytest.approx(mp_phi(R, th, 6, 3), rel=1e-11)

    def test_rescaling(self):
        for R, th in [(20, 0.7), (300, 0.1), (4, 1.3)]:
            lhs = tm.phi(R, th, 6, 3)
            assert lhs == pytest.approx(2 * math.sqrt(6) * tm.scaled_time(6, R, th, 3), abs=1e-12)

    @given(st.floats(1e-3, 1e5), st.floats(0.0, 1.5), st.floats(2.5, 9.8), st.floats(1.2, 5))
    def test_bound(self, R, th, lam, p):
        assert tm.phi(R, th, lam, p) < math.pi - 2 * th

    @given(st.floats(1e-2, 1e4), st.floats(1.01, 4), st.floats(0.0, 1.5))
    def test_decreasing_in_R(self, R, k, th):
        assert tm.phi(R * k, th, 6, 3) < tm.phi(R, th, 6, 3)

    def test_domain(self):
        for args in [(0.0, 0.3, 6, 3), (1.0, -0.1, 6, 3), (1.0, 0.3, -1, 3), (1.0, 0.3, 6, 1)]:
            with pytest.raises(DomainError):
                tm.phi(*args)


class TestPhiDerivative:
    @pytest.mark.parametrize("R", [1e-3, 20.0, 300.0])
    def test_right_angle(self, R):
        assert tm.phi_dtheta(R, math.pi / 2, 6, 3) == -2.0

    def test_finite_difference(self):
        d = 1e-5
        fd = (tm.phi(20, 0.7 + d, 6, 3) - tm.phi(20, 0.7 - d, 6, 3)) / (2 * d)
        assert tm.phi_dtheta(20, 0.7, 6, 3) == pytest.approx(fd, rel=1e-5)

    def test_increasing_middle(self):
        for th in np.linspace(0.3, 1.2, 19):
            assert tm.phi_dtheta(300, float(th), 6, 3) > 0.0

    def test_refuses_small_theta(self):
        with pytest.raises(DomainError):
            tm.phi_dtheta(300, 0.0, 6, 3)
        with pytest.raises(DomainError):
            tm.phi_dtheta(300, 5e-7, 6, 3)

    def test_near_right_angle_limit(self):
        th = math.pi / 2 - 1e-6
        assert tm.phi_dtheta(300, th, 6, 3) == pytest.approx(-2.0, abs=1e-4)


class TestAsymptotic:
    def test_relative_error(self):
        a, b = tm.phi(1e6, 0.5, 6, 3), tm.phi_asymptotic(1e6, 0.5, 6, 3)
        assert abs(a - b) / a < 0.01

    def test_power_law(self):
        for f in (tm.phi_asymptotic, tm.phi_dtheta_asymptotic):
            assert f(4 * 37.0, 0.4, 6, 3) / f(37.0, 0.4, 6, 3) == pytest.approx(0.25, rel=1e-14)

    @given(st.floats(1e-3, 1.57))
    def test_derivative_positive(self, th):
        assert tm.phi_dtheta_asymptotic(100.0, th, 6, 3) > 0.0

    def test_derivative_matches_fd(self):
        d = 1e-6
        fd = (tm.phi_asymptotic(50, 0.6 + d, 6, 3) - tm.phi_asymptotic(50, 0.6 - d, 6, 3)) / (2 * d)
        assert tm.phi_dtheta_asymptotic(50, 0.6, 6, 3) == pytest.approx(fd, rel=1e-7)

    def test_uses_beta_constant(self):
        val = tm.phi_asymptotic(1.0, 0.0, 6, 3)
        assert val == pytest.approx(math.sqrt(2 * 6 * 4) * beta_integral(3), rel=1e-15)

    def test_curves(self):
        pts = tm.phi_curve(300, [0.1, 0.2], 6, 3)
        assert [p.theta for p in pts] == [0.1, 0.2]
        tms = tm.time_map_curve(1.0, 3, [0.5, 1.0])
        assert tms[0].time > tms[1].time > 0
