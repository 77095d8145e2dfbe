from __future__ import annotations

from fractions import Fraction

import pytest
import sympy as sp

from logchiral.chow import product_of_lines
from logchiral.errors import DenominatorNotClearing, InputError
from logchiral.genus import (
    KClass,
    PairData,
    anticanonical_check,
    check_ellipticity,
    chi_y,
    chi_y_direct,
    elliptic_genus,
    euler_characteristic_open,
    euler_sequence_class,
    euler_spec,
    log_cotangent_class,
    p1_pair,
    toric_projective_pair,
)
from logchiral.qseries import Laurent, TruncatedSeries, g_series
from oracles import chi_y_projective_oracle, g_oracle, power_oracle, series_to_dict


def p1xp1_toric() -> PairData:
    R = product_of_lines(("a", "b"))
    a, b = R.gen("a"), R.gen("b")
    return PairData(2, R, [-2 * a, -2 * b], [-a, -a, -b, -b], name="P1xP1-toric")


def laurent_of(expr) -> Laurent:
    poly = sp.Poly(sp.expand(expr * sp.Symbol("y") ** 5), sp.Symbol("y"))
    return Laurent({e[0] - 5: Fraction(int(c.p), int(c.q)) for e, c in poly.terms()})


class TestToricGenus:
    def test_p1(self):
        assert elliptic_genus(toric_projective_pair(1), 10) == g_series(10)

    def test_p2_against_sympy(self):
        s = elliptic_genus(toric_projective_pair(2), 8)
        assert series_to_dict(s) == power_oracle(g_oracle(8), 2, 8)

    def test_p3(self):
        g = g_series(5)
        assert elliptic_genus(toric_projective_pair(3), 5) == g * g * g

    def test_p1xp1_is_multiplicative(self):
        g = g_series(6)
        assert elliptic_genus(p1xp1_toric(), 6) == g * g

    def test_log_class_is_trivial_for_toric(self):
        k = log_cotangent_class(toric_projective_pair(2))
        assert k.rank == 2
        euler = euler_sequence_class(2)
        assert elliptic_genus(toric_projective_pair(2), 4) == elliptic_genus(
            toric_projective_pair(2), 4, log_class=euler
        )


class TestChiY:
    @pytest.mark.parametrize("points", [0, 1, 2, 3, 4])
    def test_p1_with_points(self, points):
        expected = laurent_of(chi_y_projective_oracle(1, points))
        assert chi_y(p1_pair(points)) == expected

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_toric(self, d):
        assert chi_y(toric_projective_pair(d)) == laurent_of(chi_y_projective_oracle(d))

    def test_direct_route_matches(self):
        for p in (toric_projective_pair(2), p1_pair(0), p1xp1_toric()):
            assert chi_y_direct(p) == elliptic_genus(p, 0).coeffs[0]

    def test_worked_values(self):
        assert chi_y(toric_projective_pair(1)) == Laurent({0: 1, 1: -1})
        assert chi_y(toric_projective_pair(2)) == Laurent({0: 1, 1: -2, 2: 1})
        assert chi_y(p1_pair(0)) == Laurent({0: 1, 1: 1})


class TestEulerSpecialization:
    @pytest.mark.parametrize("points", [0, 1, 2, 3])
    def test_p1_minus_points(self, points):
        assert euler_characteristic_open(p1_pair(points)) == 2 - points
        assert euler_spec(p1_pair(points), 4).coeffs[0] == 2 - points

    def test_toric_vanishes(self):
        assert euler_spec(toric_projective_pair(1), 10).coeffs[0] == 0
        assert euler_spec(toric_projective_pair(2), 10).coeffs[0] == 0


class TestEllipticity:
    def test_toric_pass(self):
        for d in (1, 2):
            rep = check_ellipticity(elliptic_genus(toric_projective_pair(d), 10), d)
            assert rep.passed
            assert rep.factor_exponent == d
            assert rep.verified_order >= 3

    def test_empty_divisor_fails(self):
        rep = check_ellipticity(elliptic_genus(p1_pair(0), 10), 1)
        assert not rep.passed
        assert rep.first_discrepancy is not None
        m, p, lhs, rhs = rep.first_discrepancy
        assert (m, p) == (0, -1)
        assert lhs != rhs
        assert "FAIL" in rep.render()

    def test_render_block(self):
        rep = check_ellipticity(g_series(10), 1)
        lines = rep.render().splitlines()
        assert lines[0] == "ellipticity: PASS"
        assert lines[1] == "d: 1"
        assert lines[2].startswith("verified_order: ")

    def test_too_short_series_reports_failure(self):
        rep = check_ellipticity(TruncatedSeries([Laurent({0: 1}), Laurent({-5: 1})], 1), 1)
        assert not rep.passed
        assert rep.verified_order == -1

    def test_order_zero_is_not_certifiable(self):
        # the q^0 term of an elliptic series shows no negative y-power yet
        rep = check_ellipticity(elliptic_genus(toric_projective_pair(2), 0), 2)
        assert not rep.passed
        assert rep.verified_order == -1
        assert rep.first_discrepancy is None

    def test_anticanonical(self):
        assert anticanonical_check(toric_projective_pair(1))
        assert anticanonical_check(toric_projective_pair(2))
        assert not anticanonical_check(p1_pair(0))
        assert anticanonical_check(p1xp1_toric())


class TestFailures:
    def test_denominator_not_clearing(self):
        p = toric_projective_pair(2)
        h = p.ring.gen("h")
        with pytest.raises(DenominatorNotClearing):
            elliptic_genus(p, 1, log_class=KClass((), (h,), 0))

    def test_wrong_root_count(self):
        R = product_of_lines(("a", "b"))
        with pytest.raises(InputError):
            PairData(2, R, [R.gen("a")], [])

    def test_class_with_constant_term(self):
        R = product_of_lines(("a", "b"))
        with pytest.raises(InputError):
            PairData(2, R, [R.one(), R.gen("b")], [])
