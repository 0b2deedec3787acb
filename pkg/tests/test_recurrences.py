"""Moment recurrences: tables, shift identities, closed forms, weighted sums."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from poisson_moments import (DiscreteFunction, GrowthBoundError,
                             PrecisionSpec, abs_central_moment,
                             abs_moment_3_closed, abs_moment_5_closed,
                             b_expectation, cdf, central_moment_shifted,
                             central_moment_table, mean_deviation, sign,
                             signed_moment_shifted, signed_moment_table)

from helpers import brute_expectation, grid_centers, rel_err

EXT = PrecisionSpec.extended(256)

TWO_OVER_E = 0.7357588823428846

# Center that annihilates the third central moment at m = 2 (real root of
# x^3 + 6x + 2 shifted by the mean); drives the condition estimate to ~1e15.
CANCEL_CENTER = 2.3274800020733264


class TestCentralTable:
    @pytest.mark.parametrize("m,a", [(1.0, 0.0), (2.0, 2.0), (0.7, -1.3), (50.0, 51.0)])
    def test_base_entries(self, m, a):
        t = central_moment_table(m, a, 1)
        assert t.values[0] == 1.0
        assert t.values[1] == m - a

    def test_fourth_moment_at_mean(self):
        # 3 m^2 + m at m = 2
        assert central_moment_table(2.0, 2.0, 4).values[4] == 14.0

    def test_raw_moments(self):
        # about 0 these are the raw moments: E X = m, E X^2 = m + m^2
        t = central_moment_table(3.0, 0.0, 2)
        assert t.values[1] == 3.0
        assert t.values[2] == pytest.approx(12.0, rel=1e-15)

    def test_rejects_negative_order(self):
        with pytest.raises(ValueError):
            central_moment_table(1.0, 0.0, -1)

    def test_matches_brute_force(self):
        t = central_moment_table(2.0, 0.5, 8, EXT)
        want = brute_expectation(2.0, lambda j: (mp.mpf(j) - mp.mpf(0.5)) ** 8)
        assert rel_err(t.values[8], want) < 1e-40

    def test_condition_tracked(self):
        t = central_moment_table(2.0, 0.5, 8)
        assert len(t.condition) == 9
        assert all(c >= 1.0 for c in t.condition)


class TestCancellationPolicy:
    def test_flag_and_upgrade(self):
        t = central_moment_table(2.0, CANCEL_CENTER, 3)
        assert t.flagged
        assert t.condition_at(3) > 1e6
        assert t.upgraded
        # upgraded values must still be accurate against brute force
        want = brute_expectation(
            2.0, lambda j: (mp.mpf(j) - mp.mpf(CANCEL_CENTER)) ** 3)
        assert rel_err(t.values[3], want) < 1e-12

    def test_extended_build_never_upgrades(self):
        t = central_moment_table(2.0, CANCEL_CENTER, 3, EXT)
        assert not t.upgraded

    def test_benign_table_not_flagged(self):
        t = central_moment_table(2.0, 2.0, 10)
        assert not t.flagged and not t.upgraded


class TestCentralShifted:
    def test_first_order(self):
        assert central_moment_shifted(2.0, 0.7, 1) == pytest.approx(1.3, rel=1e-15)

    def test_second_raw_moment(self):
        # m + m^2 at m = 3
        assert central_moment_shifted(3.0, 0.0, 2) == pytest.approx(12.0, rel=1e-15)

    def test_rejects_order_zero(self):
        with pytest.raises(ValueError):
            central_moment_shifted(1.0, 0.0, 0)

    @pytest.mark.parametrize("m", [0.5, 2.0, 7.3])
    def test_agrees_with_table(self, m):
        for a in (0.0, m, 1.7):
            t = central_moment_table(m, a, 8)
            for r in range(1, 9):
                v = central_moment_shifted(m, a, r)
                assert abs(v - t.values[r]) <= 1e-12 * (abs(t.values[r]) + 1)


class TestSignedTable:
    def test_base_entry(self):
        t = signed_moment_table(1.0, 0.0, 0.0, 0)
        assert t.values[0] == pytest.approx(1 - 2 * math.exp(-1), rel=1e-15)

    def test_negative_threshold_degenerates_to_central(self):
        s = signed_moment_table(2.0, 0.7, -1.0, 6)
        c = central_moment_table(2.0, 0.7, 6)
        assert s.values == c.values
        assert s.kind == "signed" and s.b == -1.0

    def test_crow_value_appears(self):
        t = signed_moment_table(1.0, 1.0, 1.0, 1)
        assert t.values[1] == pytest.approx(TWO_OVER_E, rel=1e-14)

    @pytest.mark.parametrize("m,b", [(1.0, 0.0), (2.0, 1.5), (50.0, 51.0)])
    def test_base_entry_is_one_minus_twice_cdf(self, m, b):
        t = signed_moment_table(m, 0.7, b, 0)
        assert t.values[0] == 1.0 - 2.0 * cdf(b, m)

    def test_mass_at_integer_threshold_counts_negative(self):
        # sign(0) = -1 puts the lattice point at b on the negative side
        m, a, b = 1.5, 0.3, 2.0
        t = signed_moment_table(m, a, b, 0)
        direct = brute_expectation(m, lambda j: mp.mpf(sign(j - b)))
        assert rel_err(t.values[0], direct) < 1e-15

    def test_matches_brute_force(self):
        m, a, b = 2.0, 0.5, 1.0
        t = signed_moment_table(m, a, b, 4, EXT)
        want = brute_expectation(
            m, lambda j: (mp.mpf(j) - mp.mpf(a)) ** 4 * sign(j - b))
        assert rel_err(t.values[4], want) < 1e-40


class TestSignedShifted:
    def test_agrees_with_table(self):
        want = signed_moment_table(1.0, 0.0, 0.5, 1).values[1]
        got = signed_moment_shifted(1.0, 0.0, 0.5, 1)
        assert got == pytest.approx(want, rel=1e-13, abs=1e-13)

    def test_third_moment_about_mean(self):
        got = signed_moment_shifted(2.0, 2.0, 2.0, 3)
        want = abs_moment_3_closed(2.0)
        assert got == pytest.approx(want, rel=1e-13)

    def test_first_order_against_cdf(self):
        m, b = 2.0, 1.5
        got = signed_moment_shifted(m, 0.0, b, 1)
        assert got == pytest.approx(m * (1 - 2 * cdf(b - 1, m)), rel=1e-14)

    def test_rejects_negative_threshold(self):
        with pytest.raises(ValueError):
            signed_moment_shifted(1.0, 0.0, -0.5, 2)

    def test_rejects_order_zero(self):
        with pytest.raises(ValueError):
            signed_moment_shifted(1.0, 0.0, 0.5, 0)


class TestAbsCentralMoment:
    def test_order_zero(self):
        assert abs_central_moment(3.0, 1.2, 0) == 1.0

    def test_variance_at_mean(self):
        assert abs_central_moment(4.0, 4.0, 2) == pytest.approx(4.0, rel=1e-14)

    def test_mean_deviation_value(self):
        assert abs_central_moment(1.0, 1.0, 1) == pytest.approx(TWO_OVER_E, rel=1e-14)

    def test_negative_center_odd_order(self):
        # |X - a| = X - a on the whole support when a < 0
        got = abs_central_moment(2.0, -1.5, 3)
        want = central_moment_table(2.0, -1.5, 3).values[3]
        assert got == want

    def test_nonnegative(self):
        assert abs_central_moment(0.1, 0.1, 1) >= 0.0

    @settings(max_examples=50, deadline=None)
    @given(
        m=st.floats(0.1, 30),
        a=st.floats(-2, 32),
        b=st.floats(-2, 32),
        r=st.integers(0, 8),
    )
    def test_signed_dominated_by_absolute(self, m, a, b, r):
        signed = signed_moment_table(m, a, b, r).values[r]
        absolute = abs_central_moment(m, a, r)
        assert abs(signed) <= absolute + 1e-9 * (absolute + 1)

    @pytest.mark.parametrize("m", [0.1, 0.5, 1.0, 2.7, 5.0, 10.0, 30.0])
    def test_second_moment_equals_mean(self, m):
        assert abs_central_moment(m, m, 2) == pytest.approx(m, rel=1e-13)


class TestClosedForms:
    def test_mean_deviation_m1(self):
        assert mean_deviation(1.0) == pytest.approx(TWO_OVER_E, rel=1e-15)

    def test_mean_deviation_half(self):
        assert mean_deviation(0.5) == pytest.approx(0.6065306597126334, rel=1e-15)

    def test_abs3_m1(self):
        assert abs_moment_3_closed(1.0) == pytest.approx(1.7357588823428847, rel=1e-15)

    @pytest.mark.parametrize("m", [0.1, 0.5, 1.0, 2.7, 5.0, 10.0, 30.0])
    def test_closed_forms_match_recurrence(self, m):
        for closed, r in ((mean_deviation, 1), (abs_moment_3_closed, 3),
                          (abs_moment_5_closed, 5)):
            want = abs_central_moment(m, m, r)
            assert abs(closed(m) - want) <= 1e-12 * (abs(want) + 1)


def _const_one():
    return DiscreteFunction(lambda j: 1.0, degree=0, coeff=1.0)


def _sign_at(b):
    return DiscreteFunction(lambda j: float(sign(j - b)), degree=0, coeff=1.0)


class TestBExpectation:
    def test_mean_via_identity_weight(self):
        f = DiscreteFunction(lambda j: float(j), degree=1, coeff=1.0)
        assert b_expectation(2.0, 0.0, 0, f) == pytest.approx(2.0, rel=1e-11)

    @pytest.mark.parametrize("m,a", [(0.5, 0.0), (5.0, 5.0), (2.0, 0.7)])
    def test_constant_reduces_to_central(self, m, a):
        table = central_moment_table(m, a, 5, EXT)
        for r in range(6):
            got = b_expectation(m, a, r, _const_one(), EXT)
            assert rel_err(got, table.values[r]) < 1e-20

    @pytest.mark.parametrize("b", [0.0, 1.5])
    def test_sign_reduces_to_signed(self, b):
        m, a = 2.0, 0.7
        table = signed_moment_table(m, a, b, 5, EXT)
        for r in range(6):
            got = b_expectation(m, a, r, _sign_at(b), EXT)
            assert rel_err(got, table.values[r]) < 1e-20

    def test_general_weight_matches_brute_force(self):
        fn = lambda j: 1.0 / (1.0 + j)  # double-valued, as a caller would pass
        f = DiscreteFunction(fn, degree=0, coeff=1.0)
        got = b_expectation(3.0, 1.5, 4, f, EXT)
        want = brute_expectation(
            3.0, lambda j: (mp.mpf(j) - mp.mpf(1.5)) ** 4 * mp.mpf(fn(j)))
        assert rel_err(got, want) < 1e-25

    def test_finite_support_weight(self):
        f = DiscreteFunction(lambda j: 1.0 if j <= 3 else 0.0, support_end=3)
        got = b_expectation(2.0, 1.0, 2, f, EXT)
        want = brute_expectation(
            2.0, lambda j: (mp.mpf(j) - 1) ** 2 if j <= 3 else mp.mpf(0))
        assert rel_err(got, want) < 1e-30

    def test_rejects_undeclared_function(self):
        with pytest.raises(ValueError):
            b_expectation(1.0, 0.0, 2, lambda j: 1.0)

    def test_growth_violation_aborts(self):
        f = DiscreteFunction(lambda j: float(j ** 3), degree=1, coeff=1.0)
        with pytest.raises(GrowthBoundError):
            b_expectation(5.0, 0.0, 2, f)

    def test_zero_power_zero_base_convention(self):
        # r = 0 must behave as the plain expectation even with a on the lattice
        f = _const_one()
        got = b_expectation(2.0, 1.0, 0, f, EXT)
        assert rel_err(got, 1.0) < 1e-30


class TestGridAgreement:
    """Table vs shift identity on the standard centers, native precision."""

    @pytest.mark.parametrize("m", [0.1, 2.0, 10.0])
    def test_central(self, m):
        for a in grid_centers(m):
            t = central_moment_table(m, a, 6)
            for r in range(1, 7):
                v = central_moment_shifted(m, a, r)
                assert abs(v - t.values[r]) <= 1e-12 * (abs(t.values[r]) + 1)

    @pytest.mark.parametrize("m", [0.1, 2.0, 10.0])
    def test_signed(self, m):
        for a in grid_centers(m):
            for b in (a, 0.0, m / 2):
                t = signed_moment_table(m, a, b, 6)
                for r in range(1, 7):
                    v = signed_moment_shifted(m, a, b, r)
                    assert abs(v - t.values[r]) <= 1e-12 * (abs(t.values[r]) + 1)
