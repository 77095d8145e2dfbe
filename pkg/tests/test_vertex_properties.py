from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from logchiral.vertex import nop, nth_product
from logchiral.vertex.states import BETA, B, key_fermion, key_weight
from oracles import from_vstate
from vertex_checks import commutator_defect, leibniz_defect, quasi_associativity_defect, skew_defect
from vertex_strategies import monomial_states, states

ranks = st.sampled_from([(1, 0), (1, 1), (2, 0), (2, 1)])
many = settings(max_examples=200)


@st.composite
def pair(draw, k=2, max_weight=3):
    d, r = draw(ranks)
    return [draw(states(d, r, max_weight)) for _ in range(k)]


def _nonzero(*xs):
    return all(not x.is_zero() for x in xs)


def _quantum_degree(key) -> int:
    """Number of beta and b factors, the quantities that contractions consume."""
    _, evens, odds = key
    n = sum(m for s, m in evens if s[0] == BETA)
    return n + sum(1 for s in odds if s[0] == B)


class TestAxioms:
    @many
    @given(pair(), st.integers(-2, 3))
    def test_skew_symmetry(self, ab, n):
        a, b = ab
        if _nonzero(a, b):
            assert skew_defect(a, b, n).is_zero()

    @many
    @given(pair(3, max_weight=2), st.integers(0, 2), st.integers(-1, 2))
    def test_commutator_formula(self, abc, m, n):
        a, b, c = abc
        if _nonzero(a, b, c):
            assert commutator_defect(a, b, c, m, n).is_zero()

    @many
    @given(pair(3, max_weight=2))
    def test_quasi_associativity(self, abc):
        a, b, c = abc
        if _nonzero(a, b, c):
            assert quasi_associativity_defect(a, b, c).is_zero()

    @many
    @given(pair(), st.integers(-2, 3))
    def test_translation_is_a_derivation(self, ab, n):
        a, b = ab
        if _nonzero(a, b):
            assert leibniz_defect(a, b, n).is_zero()

    @many
    @given(st.data(), st.integers(-2, 3))
    def test_bigrading(self, data, n):
        d, r = data.draw(ranks)
        a = data.draw(monomial_states(d, r))
        b = data.draw(monomial_states(d, r))
        if not _nonzero(a, b):
            return
        (ka,), (kb,) = a.terms, b.terms
        out = nth_product(a, b, n)
        for k in out.terms:
            assert key_weight(k) == key_weight(ka) + key_weight(kb) - n - 1
            assert key_fermion(k) == key_fermion(ka) + key_fermion(kb)


class TestClassicalLimit:
    @many
    @given(pair())
    def test_against_independent_evaluator(self, ab):
        a, b = ab
        got = from_vstate(nop(a, b, classical=True))
        assert got == from_vstate(a) * from_vstate(b)

    @many
    @given(pair(3, max_weight=2))
    def test_nested_products(self, abc):
        a, b, c = abc
        got = from_vstate(nop(a, b, c, classical=True))
        assert got == from_vstate(a) * from_vstate(b) * from_vstate(c)

    @many
    @given(pair(1))
    def test_derivative(self, s):
        (a,) = s
        assert from_vstate(a.derivative()) == from_vstate(a).derivative()

    @many
    @given(pair())
    def test_corrections_lower_quantum_degree(self, ab):
        a, b = ab
        if not _nonzero(a, b):
            return
        top = max((_quantum_degree(k) for k in nop(a, b, classical=True).terms), default=None)
        diff = nop(a, b) - nop(a, b, classical=True)
        qa = max(_quantum_degree(k) for k in a.terms)
        qb = max(_quantum_degree(k) for k in b.terms)
        for k in diff.terms:
            assert _quantum_degree(k) < qa + qb
        if top is not None:
            assert top <= qa + qb

    @many
    @given(pair())
    def test_positive_products_vanish_classically(self, ab):
        a, b = ab
        for n in range(3):
            assert nth_product(a, b, n, classical=True).is_zero()
