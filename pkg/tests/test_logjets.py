from __future__ import annotations

from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from logchiral._poly import Poly
from logchiral.errors import InputError, JetTruncation, NotDivisorial, NotTangent
from logchiral.logjets import (
    ChartData,
    DiffPoly,
    LogArc,
    NoLift,
    assvar_presentation,
    check_compatibility,
    classical_comparison,
    identity_chart_extension,
    ideal_stability_check,
    jet_algebra,
    lift_arc,
    log_jet_algebra,
    open_chart_isomorphism,
    rewrite_step,
    universal_extension,
)

ALGEBRAS = [(1, 1, 3), (2, 1, 3), (2, 2, 2), (3, 1, 2), (2, 0, 3)]


def G(i, k=0):
    return DiffPoly.sym(("g", i, k))


def ELL(i, k=0):
    return DiffPoly.sym(("l", i, k))


@st.composite
def raw_polys(draw, d, r, K, max_order=None):
    """Polynomials in all jet symbols, including the non-normal gamma_i^(k), i <= r."""
    top = K if max_order is None else max_order
    syms = [("g", i, k) for i in range(1, d + 1) for k in range(top + 1)]
    syms += [("l", i, k) for i in range(1, r + 1) for k in range(top + 1)]
    out = DiffPoly()
    for _ in range(draw(st.integers(1, 3))):
        mono = DiffPoly.const(draw(st.integers(-3, 3).filter(bool)))
        for s in draw(st.lists(st.sampled_from(syms), max_size=3)):
            mono = mono * DiffPoly.sym(s)
        out = out + mono
    return out


def sympy_bell(k: int):
    """D^k gamma / gamma for gamma = exp(integral of ell), by sympy."""
    t = sp.symbols("t")
    ell = sp.Function("l")(t)
    g = sp.exp(sp.Integral(ell, t))
    expr = sp.expand(sp.simplify(sp.diff(g, t, k) / g))
    subs = {sp.Derivative(ell, (t, j)): sp.Symbol(f"l{j}") for j in range(k, 0, -1)}
    expr = expr.subs(subs).subs(ell, sp.Symbol("l0"))
    return sp.Poly(expr, *[sp.Symbol(f"l{j}") for j in range(k)]) if k else sp.Poly(1, sp.Symbol("l0"))


def bell_as_sympy(p: DiffPoly, k: int):
    gens = [sp.Symbol(f"l{j}") for j in range(max(k, 1))]
    terms = {}
    for m, c in p.terms.items():
        e = [0] * len(gens)
        for (_, _, order), x in m:
            e[order] = x
        terms[tuple(e)] = sp.Rational(c.numerator, c.denominator)
    return sp.Poly.from_dict(terms, *gens)


class TestPresentation:
    def test_log_derivative(self):
        A = log_jet_algebra(2, 1, 3)
        assert A.derivative(G(1)) == G(1) * ELL(1)
        assert A.derivative(G(2)) == G(2, 1)
        assert A.derivative(G(1), 2) == G(1) * ELL(1) ** 2 + G(1) * ELL(1, 1)

    def test_plain_jets(self):
        A = jet_algebra(1, 3)
        assert A.derivative(G(1)) == G(1, 1)
        assert A.mode(G(1) ** 2, 1) == 2 * G(1) * G(1, 1)
        assert A.mode(G(1) ** 2, 2) == G(1, 1) ** 2 + G(1) * G(1, 2)

    def test_no_log_symbols_is_plain(self):
        assert log_jet_algebra(2, 0, 3).render() == jet_algebra(2, 3).render()

    @pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
    def test_bell_against_sympy(self, k):
        A = log_jet_algebra(1, 1, 4)
        assert bell_as_sympy(A.bell(1, k), k) == sympy_bell(k)

    def test_normal_form_eliminates(self):
        A = log_jet_algebra(1, 1, 3)
        assert A.normal_form(G(1, 1)) == G(1) * ELL(1)
        assert A.is_normal(A.normal_form(G(1, 3) * G(1, 2)))

    def test_truncation(self):
        A = log_jet_algebra(1, 1, 2)
        with pytest.raises(JetTruncation):
            A.derivative(ELL(1, 2))
        with pytest.raises(JetTruncation):
            A.normal_form(ELL(1, 3))
        table = dict(A.derivation_table())
        assert table[("l", 1, 2)] is None

    def test_bad_symbols(self):
        A = log_jet_algebra(2, 1, 2)
        with pytest.raises(InputError):
            A.normal_form(ELL(2))
        with pytest.raises(InputError):
            A.normal_form(DiffPoly.sym(("g", 1, 0), -1))
        with pytest.raises(InputError):
            log_jet_algebra(1, 2, 2)

    def test_weights(self):
        A = log_jet_algebra(1, 1, 2)
        assert A.weight(("g", 1, 0)) == 0
        assert A.weight(("l", 1, 0)) == 1
        assert A.weight(("l", 1, 2)) == 3

    def test_render(self):
        text = log_jet_algebra(1, 1, 2).render().splitlines()
        assert text[0] == "log jet algebra d=1 r=1 K=2"
        assert text[1] == "generators: gamma1 ell1 D(ell1) D^2(ell1)"
        assert "  D^2(gamma1) = gamma1 ell1^2 + gamma1 D(ell1)" in text
        assert text[-1] == "  D D^2(ell1) = truncated"


@pytest.mark.parametrize("d,r,K", ALGEBRAS)
class TestDerivation:
    @settings(max_examples=40)
    @given(data=st.data())
    def test_leibniz(self, d, r, K, data):
        A = log_jet_algebra(d, r, K)
        p = data.draw(raw_polys(d, r, K, K - 1))
        q = data.draw(raw_polys(d, r, K, K - 1))
        assert A.derivative(p * q) == A.derivative(p) * A.normal_form(q) + A.normal_form(p) * A.derivative(q)

    @settings(max_examples=40)
    @given(data=st.data())
    def test_confluence(self, d, r, K, data):
        A = log_jet_algebra(d, r, K)
        p = data.draw(raw_polys(d, r, K))
        cur = p
        for _ in range(200):
            nxt = rewrite_step(A, cur, data.draw(st.integers(0, 50)))
            if nxt is None:
                break
            cur = nxt
        assert rewrite_step(A, cur) is None
        assert cur == A.normal_form(p)

    @settings(max_examples=20)
    @given(data=st.data())
    def test_derivative_commutes_with_normal_form(self, d, r, K, data):
        A = log_jet_algebra(d, r, K)
        p = data.draw(raw_polys(d, r, K, K - 2))
        assert A.derivative(A.derivative(p)) == A.derivative(p, 2)


class TestIdeals:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_all_log_algebras_are_stable(self, d):
        for r in range(1, d + 1):
            for K in range(0, 5):
                assert ideal_stability_check(log_jet_algebra(d, r, K))

    def test_plain_jets_are_not(self):
        A = jet_algebra(1, 3)
        assert not ideal_stability_check(A, [G(1)])

    def test_normal_crossing_product(self):
        A = log_jet_algebra(2, 2, 3)
        assert ideal_stability_check(A, [G(1) * G(2)])
        assert A.derivative(G(1) * G(2)) == G(1) * G(2) * (ELL(1) + ELL(2))

    def test_non_monomial_generator_rejected(self):
        with pytest.raises(InputError):
            ideal_stability_check(log_jet_algebra(1, 1, 2), [G(1) + 1])


class TestAssociatedVariety:
    def test_normal_bundle_chart(self):
        P = assvar_presentation(log_jet_algebra(2, 1, 4))
        assert P.render() == "<gamma1, gamma2, ell1 | gamma1*ell1>\nweights: gamma1:0 gamma2:0 ell1:1\n"

    def test_smooth_chart(self):
        P = assvar_presentation(jet_algebra(3, 2))
        assert P.render().splitlines()[0] == "<gamma1, gamma2, gamma3 | >"

    def test_two_components(self):
        P = assvar_presentation(log_jet_algebra(2, 2, 2))
        assert [r.render() for r in P.relations] == ["gamma1 ell1", "gamma2 ell2"]

    def test_truncation_zero(self):
        P = assvar_presentation(log_jet_algebra(1, 1, 0))
        assert P.render().splitlines()[0] == "<gamma1, ell1 | gamma1*ell1>"


class TestArcs:
    def test_unit_arc(self):
        arc = lift_arc([[1, 1]], log_jet_algebra(1, 1, 4))
        assert isinstance(arc, LogArc)
        assert arc.unique
        assert arc.psi[0] == [1, -1, 1, -1, 1]
        assert arc.check()

    def test_arc_through_divisor_point(self):
        result = lift_arc([[0, 1]], log_jet_algebra(1, 1, 4))
        assert isinstance(result, NoLift)
        assert not result
        assert result.index == 1

    def test_arc_inside_divisor(self):
        arc = lift_arc([[0]], log_jet_algebra(1, 1, 4))
        assert arc.free_parameters == 5
        assert arc.psi == [None]
        assert arc.check([3, 1, 4, 1, 5])

    def test_depth_one_in_rank_two(self):
        arc = lift_arc([[2, 0, 1], [0, 1]], log_jet_algebra(2, 1, 3))
        assert arc.unique and arc.check()
        arc = lift_arc([[0], [5, 7]], log_jet_algebra(2, 1, 3))
        assert arc.free_parameters == 4

    def test_depth_two_records_all_free_directions(self):
        arc = lift_arc([[0], [0]], log_jet_algebra(2, 2, 3))
        assert arc.free_parameters == 8

    @settings(max_examples=50)
    @given(st.lists(st.fractions(-3, 3, max_denominator=3), min_size=1, max_size=5), st.integers(1, 5))
    def test_trichotomy(self, coeffs, K):
        A = log_jet_algebra(1, 1, K)
        result = lift_arc([coeffs], A)
        f = [Fraction(c) for c in coeffs[: K + 1]]
        if f[0]:
            assert result.unique and result.check()
        elif any(f):
            assert isinstance(result, NoLift)
        else:
            assert result.free_parameters == K + 1

    def test_wrong_arity(self):
        with pytest.raises(InputError):
            lift_arc([[1], [1]], log_jet_algebra(1, 1, 2))


def one_variable_chart(divisor, derivation):
    return ChartData(["u"], divisor, [derivation])


class TestUniversalExtension:
    def test_chart_missing_divisor(self):
        A = log_jet_algebra(1, 1, 4)
        Y = one_variable_chart((), Poly.const(1, 1))
        ext = universal_extension(Y, [Poly(1, {(0,): 1, (1,): 1})], A)
        assert ext.unique
        assert ext.image(("l", 1, 0)) == Poly(1, {(k,): (-1) ** k for k in range(5)})
        assert ext.images[("l", 1, 0)][1] == 4
        assert ext.image(("l", 1, 1)) == Poly(1, {(0,): -1, (1,): 2, (2,): -3, (3,): 4})
        assert check_compatibility(ext, A)

    def test_tangent_chart(self):
        A = log_jet_algebra(1, 1, 4)
        Y = one_variable_chart((0,), Poly.var(1, 0))
        ext = universal_extension(Y, [Poly.var(1, 0)], A)
        assert ext.unique
        assert ext.image(("l", 1, 0)) == Poly.const(1, 1)
        assert ext.image(("l", 1, 1)).is_zero()
        assert check_compatibility(ext, A)

    def test_higher_multiplicity(self):
        A = log_jet_algebra(1, 1, 3)
        Y = one_variable_chart((0,), Poly.var(1, 0))
        ext = universal_extension(Y, [Poly.var(1, 0, 3)], A)
        assert ext.image(("l", 1, 0)) == Poly.const(1, 3)

    @pytest.mark.parametrize("d,r,K", [(1, 1, 2), (2, 1, 2), (2, 2, 1)])
    def test_identity(self, d, r, K):
        ext, is_identity = identity_chart_extension(log_jet_algebra(d, r, K))
        assert is_identity and ext.unique

    def test_not_tangent(self):
        Y = one_variable_chart((0,), Poly.const(1, 1))
        with pytest.raises(NotTangent):
            universal_extension(Y, [Poly.var(1, 0)], log_jet_algebra(1, 1, 2))

    def test_not_divisorial(self):
        A = log_jet_algebra(1, 1, 2)
        Y = ChartData(["u", "v"], (0,), [Poly.var(2, 0), Poly.const(2, 1)])
        with pytest.raises(NotDivisorial):
            universal_extension(Y, [Poly.var(2, 1)], A)
        with pytest.raises(NotDivisorial):
            universal_extension(Y, [Poly(2, {(1, 0): 1, (0, 1): 1})], A)
        with pytest.raises(NotDivisorial):
            universal_extension(Y, [Poly(2)], A)

    def test_render(self):
        Y = one_variable_chart((0,), Poly.var(1, 0))
        text = universal_extension(Y, [Poly.var(1, 0)], log_jet_algebra(1, 1, 1)).render()
        assert text == "gamma1 -> u\nell1 -> 1\nD(ell1) -> 0\nunique: yes\n"


class TestOpenChart:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_isomorphism(self, d):
        for r in range(1, d + 1):
            for K in range(1, 4):
                assert open_chart_isomorphism(log_jet_algebra(d, r, K))


class TestClassicalComparison:
    @pytest.mark.parametrize("d,r", [(1, 0), (1, 1), (2, 1), (2, 2)])
    def test_all_grades_match(self, d, r):
        grades = classical_comparison(d, r)
        assert grades
        assert all(g.matches for g in grades)

    def test_grade_counts(self):
        by_grade = {g.grade: g for g in classical_comparison(1, 1)}
        # weight 1, one fermion, charge 0: d(ell) and dlog(gamma) ell on the jet side
        g = by_grade[(1, 1, (0,))]
        assert g.jet_dimension == g.vertex_rank == 2
