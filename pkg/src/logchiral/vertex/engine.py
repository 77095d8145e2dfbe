"""n-th products and lambda-brackets of free-field states by Wick contraction.

For creation monomials A and B the OPE is a sum over contraction patterns:
each pattern pairs factors of A (at z) with factors of B (at w), contributes a
scalar times (z - w)^(-P), and leaves the normally ordered remainder
:A_rest(z) B_rest(w):. Taylor expanding A_rest about w gives

    A_(n) B = sum over patterns of coeff / k! * (d^k A_rest) * B_rest,   k = P - n - 1 >= 0,

valid for every integer n. Undifferentiated gamma^m acts as a pool: each
contraction against it multiplies by the current exponent and lowers it by one.

Base contractions (the lambda^0 coefficients):
    [beta_i lambda gamma^j] = delta_ij,  [gamma^i lambda beta_j] = -delta_ij,
    [b_i lambda c^j] = [c^j lambda b_i] = delta_ij.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

from .states import (
    BETA,
    GAMMA,
    B,
    C,
    VState,
    canonicalize,
    derivative_power,
    is_odd,
    product_keys,
)

_BASE = {(BETA, GAMMA): 1, (GAMMA, BETA): -1, (B, C): 1, (C, B): 1}


def base_contraction(kind_a: int, kind_b: int) -> int:
    return _BASE.get((kind_a, kind_b), 0)


def _individuals(key) -> list:
    """Expanded factor list: evens (repeated by count) then odds, as symbols."""
    _, evens, odds = key
    out = []
    for s, n in evens:
        out.extend([s] * n)
    out.extend(odds)
    return out


def _rest_key(key, used: set, pool_use: list):
    gexp, evens, odds = key
    g = [m - u for m, u in zip(gexp, pool_use)]
    remaining = [s for pos, s in enumerate(_individuals(key)) if pos not in used]
    ev = [s for s in remaining if not is_odd(s[0])]
    od = [s for s in remaining if is_odd(s[0])]
    res = canonicalize(g, ev, od)
    # removing factors keeps the odd order sorted, so the sign is +1
    assert res is not None and res[1] == 1
    return res[0]


def _parity_sign(perm: list) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=200000)
def contraction_patterns(ka, kb, classical: bool = False) -> tuple:
    """All Wick patterns for A(z)B(w): tuple of (coeff, P, A_rest, B_rest)."""
    if classical:
        return ((Fraction(1), 0, ka, kb),)
    a_ind = _individuals(ka)
    b_ind = _individuals(kb)
    ga, gb = ka[0], kb[0]
    d = len(ga)
    n_a_odd = sum(1 for s in a_ind if is_odd(s[0]))
    a_odd_pos = {}
    cnt = 0
    for pos, s in enumerate(a_ind):
        if is_odd(s[0]):
            a_odd_pos[pos] = cnt
            cnt += 1
    b_odd_pos = {}
    cnt = 0
    for pos, s in enumerate(b_ind):
        if is_odd(s[0]):
            b_odd_pos[pos] = n_a_odd + cnt
            cnt += 1
    n_odd = n_a_odd + cnt
    results: dict = {}

    def finish(used_a, used_b, pairs, coef, P, b_pool):
        # a-side pools absorb unused beta-type factors of B
        a_pool_cands = [
            pos for pos, s in enumerate(b_ind)
            if pos not in used_b and s[0] == BETA and ga[s[1] - 1] != 0
        ]

        def rec_pool(i, used_b2, coef2, P2, a_pool):
            if i == len(a_pool_cands):
                emit(used_a, used_b2, pairs, coef2, P2, a_pool, b_pool)
                return
            rec_pool(i + 1, used_b2, coef2, P2, a_pool)
            pos = a_pool_cands[i]
            s = b_ind[pos]
            idx = s[1] - 1
            m = ga[idx] - a_pool[idx]
            if m == 0:
                return
            val = base_contraction(GAMMA, BETA) * factorial(s[2]) * m
            ap = list(a_pool)
            ap[idx] += 1
            rec_pool(i + 1, used_b2 | {pos}, coef2 * val, P2 + s[2] + 1, ap)

        rec_pool(0, used_b, coef, P, [0] * d)

    def emit(used_a, used_b, pairs, coef, P, a_pool, b_pool):
        odd_pairs = [(a_odd_pos[i], b_odd_pos[j]) for i, j in pairs if i in a_odd_pos]
        sign = 1
        if odd_pairs:
            contracted = set()
            perm = []
            for x, y in odd_pairs:
                perm.extend([x, y])
                contracted.update((x, y))
            perm.extend(p for p in range(n_odd) if p not in contracted)
            sign = _parity_sign(perm)
        a_rest = _rest_key(ka, used_a, a_pool)
        b_rest = _rest_key(kb, used_b, b_pool)
        key = (P, a_rest, b_rest)
        results[key] = results.get(key, 0) + sign * coef

    def rec(i, used_a, used_b, pairs, coef, P, b_pool):
        if i == len(a_ind):
            finish(used_a, used_b, pairs, coef, P, b_pool)
            return
        rec(i + 1, used_a, used_b, pairs, coef, P, b_pool)
        s = a_ind[i]
        for j, t in enumerate(b_ind):
            if j in used_b or t[1] != s[1]:
                continue
            base = base_contraction(s[0], t[0])
            if not base:
                continue
            val = base * (-1) ** s[2] * factorial(s[2] + t[2])
            rec(i + 1, used_a | {i}, used_b | {j}, pairs + ((i, j),), coef * val,
                P + s[2] + t[2] + 1, b_pool)
        if s[0] == BETA:
            idx = s[1] - 1
            m = gb[idx] - b_pool[idx]
            if m != 0:
                val = base_contraction(BETA, GAMMA) * (-1) ** s[2] * factorial(s[2]) * m
                bp = list(b_pool)
                bp[idx] += 1
                rec(i + 1, used_a | {i}, used_b, pairs, coef * val, P + s[2] + 1, bp)

    rec(0, frozenset(), frozenset(), (), 1, 0, [0] * d)
    return tuple(
        (Fraction(c), P, ar, br) for (P, ar, br), c in sorted(results.items()) if c
    )


@lru_cache(maxsize=200000)
def _nth_keys(ka, kb, n: int, classical: bool) -> tuple:
    out: dict = {}
    for coef, P, ar, br in contraction_patterns(ka, kb, classical):
        k = P - n - 1
        if k < 0:
            continue
        scale = coef / factorial(k)
        for dk, dc in derivative_power(ar, k):
            res = product_keys(dk, br)
            if res is None:
                continue
            key, s = res
            out[key] = out.get(key, 0) + s * scale * dc
    return tuple((k, c) for k, c in out.items() if c)


def nth_product(a: VState, b: VState, n: int, classical: bool = False) -> VState:
    """a_(n) b. With ``classical=True`` all contractions are dropped."""
    a._check(b)
    out: dict = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            for k, c in _nth_keys(ka, kb, n, classical):
                out[k] = out.get(k, 0) + ca * cb * c
    return VState(a.d, a.r, out)


def nop(*states: VState, classical: bool = False) -> VState:
    """Right-nested normally ordered product a(b(c ...))."""
    if not states:
        raise ValueError("nop needs at least one state")
    out = states[-1]
    for s in reversed(states[:-1]):
        out = nth_product(s, out, -1, classical)
    return out


def max_pole(a: VState, b: VState) -> int:
    best = 0
    for ka in a.terms:
        for kb in b.terms:
            for _, P, _, _ in contraction_patterns(ka, kb):
                best = max(best, P)
    return best


class LambdaPolynomial(dict):
    """{n: a_(n) b} for n >= 0; the bracket is sum lambda^n / n! * a_(n) b."""

    def coefficient(self, n: int):
        return self.get(n)

    def render(self) -> str:
        if not self:
            return "0"
        parts = []
        for n in sorted(self):
            head = "" if n == 0 else ("lambda " if n == 1 else f"lambda^{n}/{factorial(n)} ")
            parts.append(f"{head}({self[n].render()})")
        return " + ".join(parts)


def lambda_bracket(a: VState, b: VState) -> LambdaPolynomial:
    a._check(b)
    out = LambdaPolynomial()
    for n in range(max_pole(a, b)):
        v = nth_product(a, b, n)
        if not v.is_zero():
            out[n] = v
    return out


def clear_caches() -> None:
    contraction_patterns.cache_clear()
    _nth_keys.cache_clear()


# ---------------------------------------------------------------------------
# named states


def gamma(d: int, r: int, i: int, order: int = 0) -> VState:
    return VState.symbol(d, r, GAMMA, i, order)


def beta(d: int, r: int, i: int, order: int = 0) -> VState:
    return VState.symbol(d, r, BETA, i, order)


def c(d: int, r: int, i: int, order: int = 0) -> VState:
    return VState.symbol(d, r, C, i, order)


def b(d: int, r: int, i: int, order: int = 0) -> VState:
    return VState.symbol(d, r, B, i, order)


def topological_generators(d: int, r: int = 0) -> dict:
    """L = dgamma^i beta_i + dc^i b_i, J = c^i b_i, Q = beta_i c^i, G = dgamma^i b_i."""
    if d < 1:
        raise ValueError("rank must be at least 1")
    z = VState(d, r)
    L = J = Q = G = z
    for i in range(1, d + 1):
        L = L + nop(gamma(d, r, i, 1), beta(d, r, i)) + nop(c(d, r, i, 1), b(d, r, i))
        J = J + nop(c(d, r, i), b(d, r, i))
        Q = Q + nop(beta(d, r, i), c(d, r, i))
        G = G + nop(gamma(d, r, i, 1), b(d, r, i))
    return {"L": L, "J": J, "Q": Q, "G": G}


def log_generators(d: int, r: int) -> list:
    """Generators of the logarithmic subalgebra along gamma^1 ... gamma^r = 0."""
    if not 0 <= r <= d:
        raise ValueError("need 0 <= r <= d")
    out = []
    for i in range(1, d + 1):
        g, bt, cc, bb = gamma(d, r, i), beta(d, r, i), c(d, r, i), b(d, r, i)
        if i > r:
            out.extend([g, bt, cc, bb])
        else:
            ginv = VState.gamma_power(d, r, i, -1)
            out.extend([
                g,
                nop(gamma(d, r, i, 1), ginv),
                nop(g, bt),
                nop(cc, ginv),
                nop(g, bb),
            ])
    return out


def log_generator_names(d: int, r: int) -> list[str]:
    names = []
    for i in range(1, d + 1):
        if i > r:
            names.extend([f"gamma{i}", f"beta{i}", f"c{i}", f"b{i}"])
        else:
            names.extend([
                f"gamma{i}", f"D(gamma{i})/gamma{i}", f"gamma{i} beta{i}",
                f"c{i}/gamma{i}", f"gamma{i} b{i}",
            ])
    return names


def log_volume_element(d: int, r: int) -> VState:
    """(c^1/gamma^1) ... (c^r/gamma^r) c^(r+1) ... c^d."""
    parts = []
    for i in range(1, d + 1):
        if i <= r:
            parts.append(nop(c(d, r, i), VState.gamma_power(d, r, i, -1)))
        else:
            parts.append(c(d, r, i))
    return nop(*parts)
