import numpy as np
import pytest

from xcposc.errors import ImproperFunction, InvalidParameter
from xcposc.netfun import (
    DcMotorPlant,
    RcController,
    RlcController,
    make_dc_motor,
    make_loop,
    make_rc,
    make_rlc,
    passivity_check,
)
from xcposc.poly import Polynomial, RationalFunction, find_roots

from conftest import NOMINAL_MOTOR, poly_from_roots


class TestConstructors:
    def test_rlc_design1_coefficients(self):
        f = make_rlc(100.0, 1.0, 1.0)
        assert f.numerator.coeffs == (0.0, 100.0)
        assert f.denominator.coeffs == (100.0, 1.0, 100.0)

    def test_rlc_zero_set_is_origin(self):
        zeros = make_rlc(47.0, 2.2, 0.3).zeros()
        assert zeros.roots == (0j,)

    def test_rlc_design2_poles(self):
        got = sorted(make_rlc(100.0, 1.0, 5.0).poles().roots, key=lambda z: z.imag)
        expected = sorted(
            Polynomial([100.0, 1.0, 500.0]).roots().roots, key=lambda z: z.imag
        )
        assert got == pytest.approx(expected)

    def test_rlc_rejects_nonpositive(self):
        with pytest.raises(InvalidParameter):
            make_rlc(0.0, 1.0, 1.0)
        with pytest.raises(InvalidParameter):
            RlcController(R=100.0, L=-1.0, C=1.0)

    def test_rc_pole_location(self):
        pole = make_rc(1.5, 0.1).poles().roots[0]
        assert pole == pytest.approx(-1.0 / 0.15)

    def test_rc_dc_gain_is_R(self):
        assert make_rc(3.7, 0.25)(0.0).real == pytest.approx(3.7)

    def test_rc_pole_in_design_band(self):
        assert 4.17 <= 1.0 / (1.5 * 0.1) <= 8.0

    def test_motor_pole_zero(self):
        P = make_dc_motor(NOMINAL_MOTOR)
        assert P.zeros().roots[0] == pytest.approx(-10.0, abs=0.01)
        poles = sorted(r.real for r in P.poles().roots)
        assert poles == pytest.approx([-9.83, -4.17], abs=0.01)

    def test_motor_dc_value(self):
        assert make_dc_motor(NOMINAL_MOTOR)(0.0).real == pytest.approx(0.2 / 0.41)

    def test_motor_decoupled_limit(self):
        # vanishing torque constant decouples electrical and mechanical poles
        weak = DcMotorPlant(L_m=0.5, R_m=2.0, J_m=0.02, b_m=0.2, k_m=1e-8)
        poles = sorted(r.real for r in make_dc_motor(weak).poles().roots)
        assert poles == pytest.approx([-10.0, -4.0], abs=1e-4)

    def test_motor_rejects_nonpositive(self):
        with pytest.raises(InvalidParameter):
            DcMotorPlant(L_m=0.5, R_m=2.0, J_m=0.0, b_m=0.2, k_m=0.1)


class TestLoopFunction:
    def test_design1_degrees(self, plant, rlc_designs):
        loop = make_loop(rlc_designs[0].transfer_function(), plant)
        assert loop.G.denominator.degree == 4
        assert loop.G.numerator.degree == 3  # strictly proper

    def test_rc_dc_gain(self, loop_rc):
        assert loop_rc.G(0.0).real == pytest.approx(0.61, abs=0.01)

    def test_rlc_loop_has_zero_at_origin(self, loop_design1):
        assert 0j in loop_design1.G.zeros().roots

    def test_inverse_agreement_on_grid(self, loop_design1):
        omega = np.logspace(-2, 3, 200)
        s = 1j * omega
        lhs = loop_design1.G.denominator(s) / loop_design1.G.numerator(s)
        rhs = loop_design1.G_inverse.eval_on(s)
        rel = np.abs(lhs - rhs) / np.abs(rhs)
        assert np.max(rel) <= 1e-8

    def test_zeros_of_G_are_controller_zeros_and_plant_poles(self, plant):
        rng = np.random.default_rng(31)
        for _ in range(10):
            ctrl = make_rlc(
                rng.uniform(10, 300), rng.uniform(0.2, 6), rng.uniform(0.2, 6)
            )
            loop = make_loop(ctrl, plant)
            expected = sorted(
                list(ctrl.zeros().all_roots()) + list(plant.poles().all_roots()),
                key=lambda z: (z.real, z.imag),
            )
            got = sorted(loop.G.zeros().all_roots(), key=lambda z: (z.real, z.imag))
            assert len(got) == len(expected)
            for a, b in zip(got, expected):
                assert abs(a - b) < 1e-6

    def test_dc_gain_nonnegative_for_passive_networks(self, plant):
        rng = np.random.default_rng(32)
        for _ in range(10):
            if rng.random() < 0.5:
                ctrl = make_rc(rng.uniform(0.5, 10), rng.uniform(0.01, 1))
            else:
                ctrl = make_rlc(rng.uniform(10, 300), rng.uniform(0.2, 6), rng.uniform(0.2, 6))
            loop = make_loop(ctrl, plant)
            assert loop.G(0.0).real >= 0.0

    def test_rlc_loop_dc_gain_zero(self, loop_design1):
        assert loop_design1.G(0.0).real == pytest.approx(0.0, abs=1e-15)


class TestPassivity:
    def test_motor_positive_real(self, plant):
        verdict = passivity_check(plant)
        assert verdict.is_stable
        assert verdict.is_positive_real
        assert verdict.min_real_part_on_axis >= 0.0

    def test_first_order_lag(self):
        verdict = passivity_check(RationalFunction([1.0], [1.0, 1.0]))
        assert verdict.is_positive_real
        assert verdict.min_real_part_on_axis == pytest.approx(0.0, abs=1e-6)

    def test_unstable_pole_fails(self):
        verdict = passivity_check(RationalFunction([1.0], [-1.0, 1.0]))
        assert not verdict.is_stable
        assert not verdict.is_positive_real

    def test_improper_rejected(self):
        with pytest.raises(ImproperFunction):
            passivity_check(RationalFunction([1.0, 2.0, 1.0], [1.0, 1.0]))

    def test_negative_real_part_detected(self):
        # all-pass-like function dips negative on the axis
        f = RationalFunction([1.0, -1.0], [1.0, 1.0])
        verdict = passivity_check(f)
        assert verdict.is_stable
        assert not verdict.is_positive_real
