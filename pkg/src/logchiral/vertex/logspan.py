"""Membership in the logarithmic subalgebra by exact linear algebra.

The subalgebra is graded by conformal weight, fermion number and the
per-index gamma-charge (gamma, d^k gamma, c count +1; beta, b count -1).
A homogeneous piece is spanned by right-nested normally ordered products of
derivatives of generators with matching grades; the generating set is
enlarged by the non-negative products of pairs of generators so that ordered
products suffice. Membership is then decided in that finite span.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .._linalg import SparseEchelon
from .engine import log_generators, max_pole, nop, nth_product
from .states import VState, key_charge, key_fermion, key_weight


class Verdict(str, Enum):
    TRUE = "true"
    FALSE = "false"
    INCONCLUSIVE = "inconclusive"

    def __bool__(self):
        return self is Verdict.TRUE


@dataclass
class _Gen:
    state: VState
    weight: int
    fermion: int
    charge: tuple
    label: str


def _grade(s: VState):
    (k,) = {(key_weight(k), key_fermion(k), key_charge(k)) for k in s.terms}
    return k


@lru_cache(maxsize=None)
def _generators(d: int, r: int, max_weight: int, closure: bool) -> tuple:
    base = log_generators(d, r)
    pool = list(base)
    if closure:
        for a in base:
            for b in base:
                for n in range(max_pole(a, b)):
                    v = nth_product(a, b, n)
                    if not v.is_zero():
                        pool.append(v)
    vac = ((0,) * d, (), ())
    out = []
    seen = SparseEchelon()
    for g in pool:
        for k in range(max_weight + 1):
            s = g.derivative(k) if k else g
            if s.is_zero():
                break
            w, f, ch = _grade(s)
            if w > max_weight:
                break
            # scalars (multiples of vac) add nothing to the span of products
            if set(s.terms) == {vac}:
                break
            vec = {(w, f, ch, key): c for key, c in s.terms.items()}
            if seen.add(vec):
                out.append(_Gen(s, w, f, ch, f"D^{k}"))
    return tuple(out)


def _rate(gens, values) -> float:
    """Largest amount a grade can drop per unit of weight, over all generators."""
    rate = 0.0
    for g, v in zip(gens, values):
        drop = max([0] + [-x for x in v])
        if drop and g.weight == 0:
            return float("inf")
        if drop:
            rate = max(rate, drop / g.weight)
    return rate


def _span_for(d: int, r: int, grade: tuple, max_factors: int, closure: bool):
    w, f, ch = grade
    gens = _generators(d, r, w, closure)
    ch_rate = _rate(gens, [g.charge for g in gens])
    f_rate = _rate(gens, [(g.fermion,) for g in gens])
    # odd generators whose normally ordered square vanishes never repeat
    no_repeat = [
        g.fermion % 2 == 1 and nop(g.state, g.state).is_zero() for g in gens
    ]
    echelon = SparseEchelon()
    truncated = False
    zero_ch = (0,) * d

    def feasible(rem_w, f_acc, ch_acc):
        if f_acc - f > f_rate * rem_w:
            return False
        return all(a - t <= ch_rate * rem_w for a, t in zip(ch_acc, ch))

    def rec(start, remaining_w, f_acc, ch_acc, chosen):
        nonlocal truncated
        if remaining_w == 0 and f_acc == f and ch_acc == ch and chosen:
            prod = nop(*[gens[i].state for i in chosen])
            if not prod.is_zero():
                echelon.add(prod.terms)
        for i in range(start, len(gens)):
            g = gens[i]
            if g.weight > remaining_w:
                continue
            if chosen and chosen[-1] == i and no_repeat[i]:
                continue
            rem = remaining_w - g.weight
            f_new = f_acc + g.fermion
            ch_new = tuple(a + b for a, b in zip(ch_acc, g.charge))
            if not feasible(rem, f_new, ch_new):
                continue
            if len(chosen) >= max_factors:
                truncated = True
                return
            rec(i, rem, f_new, ch_new, chosen + [i])

    rec(0, w, 0, zero_ch, [])
    if w == 0 and f == 0 and ch == zero_ch:
        echelon.add(VState.vacuum(d, r).terms)
    return echelon, truncated


def components(s: VState) -> dict:
    """Split a state into its (weight, fermion, charge)-homogeneous pieces."""
    out: dict = {}
    for k, c in s.terms.items():
        g = (key_weight(k), key_fermion(k), key_charge(k))
        out.setdefault(g, {})[k] = c
    return {g: VState(s.d, s.r, t) for g, t in out.items()}


def is_logarithmic(
    s: VState, r: int | None = None, max_factors: int | None = None, closure: bool = True
) -> Verdict:
    """Decide whether s lies in the logarithmic subalgebra along gamma^1..gamma^r = 0."""
    if r is None:
        r = s.r
    if s.r != r:
        s = s.localize(r)
    if s.is_zero():
        return Verdict.TRUE
    verdict = Verdict.TRUE
    for grade, comp in components(s).items():
        w, f, ch = grade
        cap = max_factors if max_factors is not None else 3 * w + abs(f) + sum(map(abs, ch)) + 2 * s.d + 2
        echelon, truncated = _span_for(s.d, r, grade, cap, closure)
        if echelon.contains(comp.terms):
            continue
        support = echelon.support()
        if any(k not in support for k in comp.terms) and not truncated:
            return Verdict.FALSE
        verdict = Verdict.INCONCLUSIVE
    return verdict
