import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gefdesign import (
    FilterConstants,
    eval_gef,
    eval_sharp,
    eval_v,
    eval_zero_variant,
    group_delay_cycles,
    level_db,
    normalized_to_peak,
    peak_beta,
    phase_rad,
    sharpness_check,
    wavenumber,
)
from gefdesign.core import DB_PER_LOG
from gefdesign.errors import NonPositiveConstant, ZeroOrderTooLarge

LN10 = math.log(10.0)

positive_constants = st.builds(
    FilterConstants,
    a_p=st.floats(0.01, 0.5),
    b_p=st.floats(0.3, 3.0),
    b_u=st.floats(0.6, 20.0),
)


class TestFilterConstants:
    def test_valid_integer_exponent(self):
        theta = FilterConstants(0.05, 1.0, 6.0)
        assert theta.is_integer_exponent
        assert theta.pole == complex(-0.05, 1.0)

    def test_case2_constants(self):
        theta = FilterConstants(0.1, 1.0, 7.0)
        assert theta.is_integer_exponent
        assert theta.gain == 1.0

    def test_non_integer_flag(self):
        assert not FilterConstants(0.05, 1.0, 5.5).is_integer_exponent
        assert FilterConstants(0.05, 1.0, 6.0 + 1e-13).is_integer_exponent

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(a_p=-0.05, b_p=1.0, b_u=6.0),
            dict(a_p=0.05, b_p=0.0, b_u=6.0),
            dict(a_p=0.05, b_p=1.0, b_u=-1.0),
            dict(a_p=0.05, b_p=1.0, b_u=6.0, gain=0.0),
            dict(a_p=float("nan"), b_p=1.0, b_u=6.0),
        ],
    )
    def test_rejects_non_positive(self, kwargs):
        with pytest.raises(NonPositiveConstant):
            FilterConstants(**kwargs)

    def test_dict_round_trip(self, theta_sharp6):
        assert FilterConstants.from_dict(theta_sharp6.as_dict()) == theta_sharp6


class TestEvalGef:
    def test_dc_value_pole_at_minus_one_plus_i(self):
        # ((0 - p)(0 - conj p)) = a^2 + b^2 = 2 at (1, 1, 1)
        assert eval_gef(FilterConstants(1.0, 1.0, 1.0), 0.0) == pytest.approx(
            0.5 + 0.0j, abs=1e-14
        )

    def test_peak_magnitude_matches_closed_level(self, theta_sharp6):
        # |P(1)| from the dB closed form: 119.98 dB
        assert 20.0 * np.log10(abs(eval_gef(theta_sharp6, 1.0))) == pytest.approx(
            119.98, abs=5e-3
        )

    def test_high_frequency_rolloff_order(self, theta_sharp6):
        # |P| ~ beta**(-2 b_u): -40 * b_u dB per decade
        drop = level_db(theta_sharp6, 1e4) - level_db(theta_sharp6, 1e3)
        assert drop == pytest.approx(-40.0 * 6.0, abs=0.05)

    def test_gain_scales_linearly(self, theta_sharp6):
        scaled = theta_sharp6.with_gain(2.5)
        assert eval_gef(scaled, 1.3) == pytest.approx(2.5 * eval_gef(theta_sharp6, 1.3))

    def test_array_evaluation_matches_scalar(self, theta_sharp6):
        betas = np.array([0.2, 0.9, 1.0, 1.7])
        values = eval_gef(theta_sharp6, betas)
        assert values.shape == betas.shape
        for beta, value in zip(betas, values):
            assert value == eval_gef(theta_sharp6, float(beta))

    def test_non_integer_exponent_continuous_in_beta(self):
        # no principal-branch jumps: the sampled phase never steps by ~2 pi
        theta = FilterConstants(0.05, 1.0, 5.5)
        betas = np.linspace(0.0, 6.0, 20001)
        phases = np.angle(eval_gef(theta, betas))
        unwrapped = np.unwrap(phases)
        assert unwrapped[0] == pytest.approx(0.0, abs=1e-12)
        assert np.all(np.diff(unwrapped) < 1e-3)
        # and the analytic continuous phase agrees with the unwrapped samples
        assert np.allclose(unwrapped, phase_rad(theta, betas), atol=1e-9)


class TestEvalSharp:
    def test_magnitude_symmetric_about_peak(self, theta_sharp6):
        delta = 0.02
        hi = abs(eval_sharp(theta_sharp6, 1.0 + delta))
        lo = abs(eval_sharp(theta_sharp6, 1.0 - delta))
        assert abs(hi - lo) <= 1e-12 * hi

    def test_peak_value_is_inverse_power_of_ap(self, theta_sharp6):
        assert abs(eval_sharp(theta_sharp6, 1.0)) == pytest.approx(
            0.05**-6, rel=1e-12
        )
        assert abs(eval_sharp(theta_sharp6, 1.0)) == pytest.approx(6.4e7, rel=1e-9)

    def test_direct_modulus_arithmetic(self):
        # |s - p|^2 = 0.2^2 + 0.2^2 = 0.08 at beta = 1.2 -> |P_sharp| = 12.5
        theta = FilterConstants(0.2, 1.0, 2.0)
        assert abs(eval_sharp(theta, 1.2)) == pytest.approx(1.0 / 0.08, rel=1e-12)


class TestEvalV:
    def test_definitional_product(self, theta_sharp6):
        beta = 1.0
        expected = eval_gef(theta_sharp6, beta) * complex(0.05, 1.0)
        assert eval_v(theta_sharp6, beta) == pytest.approx(expected, rel=1e-12)

    def test_peak_location_near_b_p(self, theta_sharp6):
        betas = np.linspace(0.8, 1.2, 40001)
        mags = np.abs(np.asarray(eval_v(theta_sharp6, betas)))
        beta_star = betas[int(np.argmax(mags))]
        assert abs(beta_star - 1.0) < 0.5 * theta_sharp6.a_p

    def test_real_at_dc(self, theta_wide7):
        value = eval_v(theta_wide7, 0.0)
        assert value.imag == pytest.approx(0.0, abs=1e-15)


class TestZeroVariant:
    def test_order_zero_equals_base_filter(self, theta_sharp6):
        for beta in (0.1, 0.9, 1.0, 2.4):
            assert eval_zero_variant(theta_sharp6, 0, beta) == pytest.approx(
                eval_gef(theta_sharp6, beta), rel=1e-12
            )

    def test_zero_at_origin(self, theta_sharp6):
        assert eval_zero_variant(theta_sharp6, 1, 0.0) == 0.0

    def test_order_must_stay_below_exponent(self, theta_sharp6):
        with pytest.raises(ZeroOrderTooLarge):
            eval_zero_variant(theta_sharp6, 7, 1.0)
        with pytest.raises(ZeroOrderTooLarge):
            eval_zero_variant(theta_sharp6, 6, 1.0)

    def test_order_must_be_non_negative_integer(self, theta_sharp6):
        with pytest.raises(ValueError):
            eval_zero_variant(theta_sharp6, -1, 1.0)


class TestWavenumber:
    def test_value_at_peak(self, theta_sharp6):
        expected = 6.0 * (1.0 / 0.05 + 1.0 / (0.05 + 2.0j))
        assert wavenumber(theta_sharp6, 1.0) == pytest.approx(expected, rel=1e-12)

    def test_real_part_at_peak_formula(self):
        for a_p, b_u in ((0.05, 6.0), (0.1, 7.0), (0.02, 3.0)):
            theta = FilterConstants(a_p, 1.0, b_u)
            expected = b_u / a_p * (1.0 + a_p**2 / (a_p**2 + 4.0))
            assert wavenumber(theta, 1.0).real == pytest.approx(expected, rel=1e-12)

    def test_one_sided_form_is_real_at_peak(self, theta_sharp6):
        # dropping the conjugate term leaves b_u/(i b_p - p) = b_u / a_p, purely real
        one_sided = theta_sharp6.b_u / (1j * theta_sharp6.b_p - theta_sharp6.pole)
        assert one_sided.imag == 0.0

    @settings(max_examples=200, deadline=None)
    @given(theta=positive_constants, beta=st.floats(0.0, 10.0))
    def test_partial_fraction_identity(self, theta, beta):
        s = 1j * beta
        single_term = (
            2.0 * theta.b_u * (s + theta.a_p)
            / ((s - theta.pole) * (s - theta.pole_conjugate))
        )
        assert wavenumber(theta, beta) == pytest.approx(single_term, rel=1e-12)


class TestLevelAndPhase:
    def test_level_at_peak_closed_form(self, theta_sharp6):
        expected = -(20.0 / LN10) * 3.0 * (math.log(0.0025) + math.log(4.0025))
        assert level_db(theta_sharp6, 1.0) == pytest.approx(expected, rel=1e-12)
        assert level_db(theta_sharp6, 1.0) == pytest.approx(119.98, abs=5e-3)

    def test_level_dc_matches_eval(self):
        theta = FilterConstants(1.0, 1.0, 1.0)
        assert level_db(theta, 0.0) == pytest.approx(20.0 * math.log10(0.5), rel=1e-12)

    def test_level_matches_linear_magnitude_on_grid(self, theta_sharp6):
        betas = np.linspace(0.01, 4.0, 1000)
        direct = 20.0 * np.log10(np.abs(np.asarray(eval_gef(theta_sharp6, betas))))
        assert np.max(np.abs(level_db(theta_sharp6, betas) - direct)) < 1e-9

    def test_gain_term(self, theta_sharp6):
        loud = theta_sharp6.with_gain(10.0)
        assert level_db(loud, 1.3) - level_db(theta_sharp6, 1.3) == pytest.approx(20.0)

    def test_phase_zero_at_dc(self, theta_sharp6):
        assert phase_rad(theta_sharp6, 0.0) == pytest.approx(0.0, abs=1e-14)

    def test_phase_at_peak(self, theta_sharp6):
        assert phase_rad(theta_sharp6, 1.0) == pytest.approx(-6.0 * math.atan(40.0), rel=1e-12)
        assert phase_rad(theta_sharp6, 1.0) == pytest.approx(-9.2748, abs=5e-5)

    @pytest.mark.parametrize("a_p,b_p,b_u", [(0.05, 1.0, 6.0), (0.1, 1.0, 7.0), (0.2, 0.5, 3.5)])
    def test_asymptotic_phase_accumulation(self, a_p, b_p, b_u):
        theta = FilterConstants(a_p, b_p, b_u)
        beta_max = 1e4
        bound = 2.0 * b_u * (a_p + b_p) / beta_max
        assert abs(phase_rad(theta, beta_max) + b_u * math.pi) < bound

    @settings(max_examples=100, deadline=None)
    @given(theta=positive_constants, beta=st.floats(0.0, 8.0))
    def test_conjugate_symmetry(self, theta, beta):
        # evaluation extended to signed beta: P(-beta) = conj(P(beta))
        plus = eval_gef(theta, beta)
        minus = eval_gef(theta, -beta)
        assert minus == pytest.approx(np.conj(plus), rel=1e-12, abs=1e-300)

    def test_derivative_identities(self, theta_sharp6):
        # d(level)/d(beta) = (20/ln10) Im k ; d(phase)/d(beta) = -Re k
        for beta in (0.3, 0.85, 1.15, 1.25, 1.4, 3.0):
            h = 1e-6 * max(1.0, beta)
            d_level = (level_db(theta_sharp6, beta + h) - level_db(theta_sharp6, beta - h)) / (2 * h)
            d_phase = (phase_rad(theta_sharp6, beta + h) - phase_rad(theta_sharp6, beta - h)) / (2 * h)
            k = wavenumber(theta_sharp6, beta)
            assert d_level == pytest.approx(DB_PER_LOG * k.imag, rel=1e-5)
            assert d_phase == pytest.approx(-k.real, rel=1e-5)


class TestGroupDelay:
    def test_value_at_peak(self, theta_sharp6):
        expected = (6.0 * (1.0 / 0.05 + 1.0 / (0.05 + 2.0j))).real / (2.0 * math.pi)
        assert group_delay_cycles(theta_sharp6, 1.0) == pytest.approx(expected, rel=1e-12)
        assert group_delay_cycles(theta_sharp6, 1.0) == pytest.approx(19.11, abs=5e-3)

    def test_case2_value_at_peak(self, theta_wide7):
        expected = 7.0 / (2.0 * math.pi * 0.1) * (1.0 + 0.01 / 4.01)
        assert group_delay_cycles(theta_wide7, 1.0) == pytest.approx(expected, rel=1e-12)
        assert group_delay_cycles(theta_wide7, 1.0) == pytest.approx(11.17, abs=5e-3)

    def test_matches_phase_slope(self, theta_sharp6):
        h = 1e-6
        for beta in (0.6, 1.0, 1.9):
            slope = (phase_rad(theta_sharp6, beta + h) - phase_rad(theta_sharp6, beta - h)) / (2 * h)
            assert group_delay_cycles(theta_sharp6, beta) == pytest.approx(
                -slope / (2.0 * math.pi), rel=1e-6
            )


class TestSharpness:
    def test_reference_case_is_sharp(self, theta_sharp6):
        report = sharpness_check(theta_sharp6)
        assert report.satisfied
        assert report.alpha_at_peak == pytest.approx(0.025)

    def test_wide_filter_fails(self):
        assert not sharpness_check(FilterConstants(0.3, 1.0, 2.0)).satisfied

    def test_threshold_is_exclusive(self):
        assert sharpness_check(FilterConstants(0.19, 1.0, 4.0)).satisfied
        assert not sharpness_check(FilterConstants(0.2, 1.0, 4.0)).satisfied

    def test_threshold_scales_with_b_p(self):
        assert sharpness_check(FilterConstants(0.3, 2.0, 4.0)).satisfied


class TestSharpValidityTrend:
    def test_deviation_shrinks_with_ap_over_passband(self):
        # deviation between full and one-sided levels (offset removed at the
        # peak), measured over the filter's own 30 dB passband window
        def deviation(a_p, b_u=6.0):
            theta = FilterConstants(a_p, 1.0, b_u)
            half = a_p * math.sqrt(10.0 ** (30.0 / (10.0 * b_u)) - 1.0)
            betas = np.linspace(max(1e-6, 1.0 - half), 1.0 + half, 4001)
            sharp_level = 20.0 * np.log10(np.abs(np.asarray(eval_sharp(theta, betas))))
            diff = level_db(theta, betas) - sharp_level
            ref = level_db(theta, 1.0) - 20.0 * math.log10(abs(eval_sharp(theta, 1.0)))
            return float(np.max(np.abs(diff - ref)))

        d020, d010, d005 = deviation(0.2), deviation(0.1), deviation(0.05)
        assert d020 > d010 > d005


class TestPeakHelpers:
    def test_peak_beta_shift_scale(self, theta_sharp6):
        beta_star = peak_beta(theta_sharp6)
        assert beta_star == pytest.approx(1.0 - 0.05**2 / 2.0, abs=2e-6)
        # it is a true maximum of the level
        assert level_db(theta_sharp6, beta_star) > level_db(theta_sharp6, beta_star + 1e-4)
        assert level_db(theta_sharp6, beta_star) > level_db(theta_sharp6, beta_star - 1e-4)

    def test_normalized_to_peak(self, theta_sharp6):
        unit = normalized_to_peak(theta_sharp6)
        assert abs(eval_gef(unit, peak_beta(unit))) == pytest.approx(1.0, rel=1e-12)
