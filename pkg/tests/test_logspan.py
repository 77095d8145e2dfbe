from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logchiral.vertex import log_generators, nop, nth_product
from logchiral.vertex.expr import parse_state
from logchiral.vertex.logspan import Verdict, components, is_logarithmic


def S(text, d=1, r=1):
    return parse_state(text, d, r)


class TestVerdicts:
    @pytest.mark.parametrize("text", [
        "c", "D(gamma)", "nop(gamma, D(beta))", "nop(pow(gamma, 2), beta)", "nop(c, b)",
        "nop(D(c), pow(gamma, -1))", "nop(gamma, beta) + 3*nop(gamma, b)",
    ])
    def test_logarithmic(self, text):
        assert is_logarithmic(S(text)) is Verdict.TRUE

    @pytest.mark.parametrize("text", [
        "beta", "b", "D(beta)", "pow(gamma, -1)", "nop(D(gamma), pow(gamma, -2))", "nop(gamma, beta) + beta",
    ])
    def test_not_logarithmic(self, text):
        assert is_logarithmic(S(text)) is Verdict.FALSE

    def test_zero(self):
        assert is_logarithmic(S("0")) is Verdict.TRUE

    def test_rank_two(self):
        assert is_logarithmic(S("nop(gamma1, beta1) + beta2", 2, 1)) is Verdict.TRUE
        assert is_logarithmic(S("beta1", 2, 1)) is Verdict.FALSE
        assert is_logarithmic(S("nop(c1, pow(gamma1, -1), c2, pow(gamma2, -1))", 2, 2)) is Verdict.TRUE

    def test_small_cap_is_inconclusive(self):
        assert is_logarithmic(S("c"), max_factors=1) is Verdict.INCONCLUSIVE
        assert not is_logarithmic(S("c"), max_factors=1)

    def test_unlocalized_view(self):
        assert is_logarithmic(parse_state("beta"), r=0) is Verdict.TRUE

    def test_components(self):
        parts = components(S("nop(gamma, beta) + beta + c"))
        assert len(parts) == 3
        assert sum(parts.values(), S("0")) == S("nop(gamma, beta) + beta + c")


@st.composite
def log_words(draw, d=1, r=1):
    """Random products and derivatives of logarithmic generators."""
    gens = log_generators(d, r)
    out = draw(st.sampled_from(gens)).derivative(draw(st.integers(0, 1)))
    for _ in range(draw(st.integers(0, 1))):
        other = draw(st.sampled_from(gens)).derivative(draw(st.integers(0, 1)))
        n = draw(st.integers(-1, 1))
        out = nth_product(other, out, n) if draw(st.booleans()) else nth_product(out, other, n)
    return out * draw(st.integers(1, 3))


class TestClosure:
    @settings(max_examples=60)
    @given(log_words())
    def test_words_are_logarithmic(self, s):
        assert is_logarithmic(s) is Verdict.TRUE

    @settings(max_examples=30)
    @given(log_words(2, 1))
    def test_words_rank_two(self, s):
        assert is_logarithmic(s) is not Verdict.FALSE

    @settings(max_examples=40)
    @given(log_words(), st.integers(1, 3))
    def test_adding_a_pole_breaks_membership(self, s, k):
        bad = nop(S(f"pow(gamma, {-k})"), S("D(beta)"))
        assert is_logarithmic(s + bad) is Verdict.FALSE
