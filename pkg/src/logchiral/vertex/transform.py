"""Divisor-preserving formal coordinate changes acting on localized states.

New coordinates gamma~^i = g^i(gamma) with inverse gamma = f(gamma~) act by
substitution on gamma, as one-forms on c, as vector fields on b, and on beta by

    beta~_i = beta_j M^j_i + sigma * d_m(M^k_i) c^m b_k,    M = (Df)(g(gamma)),

the second term being the fermionic correction. A creation monomial is the
right-nested normally ordered product of its single symbols, each of which
acts by multiplication, so a transformed monomial is the nested product of
transformed symbols.

Truncation is tracked through the total gamma-charge. Every transformed symbol
differs from the symbol by terms of non-negative excess charge, and all series
are exact up to excess ``degree_cap``; a transformed monomial is therefore
exact on total charge at most (its charge + degree_cap) and is cut there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .._poly import Poly
from ..errors import DegreeCapExceeded, InputError
from .engine import nop
from .states import BETA, GAMMA, B, C, VState, is_odd, key_charge

# Sign of the fermionic correction in beta~. With -1 the transformed Q differs
# from Q by a non-derivative, so Q_(0) would not be invariant (see tests).
FERMIONIC_SIGN = 1


@dataclass
class CoordinateTransform:
    g: list  # d Polys in gamma
    divisor_rank: int
    degree_cap: int
    f: list = field(default_factory=list)  # inverse series, to degree_cap + 1

    @property
    def d(self) -> int:
        return len(self.g)


def _check_divisor(g: Sequence[Poly], r: int) -> None:
    d = len(g)
    for i in range(r):
        for e in g[i].terms:
            if e[i] < 1:
                raise InputError(f"g^{i + 1} is not divisible by gamma{i + 1}")
        unit = _divide_var(g[i], i)
        if unit.constant() == 0:
            raise InputError(f"g^{i + 1} / gamma{i + 1} is not a unit")
    for p in g:
        if p.constant() != 0:
            raise InputError("coordinate changes must fix the origin")
    lin = [[g[i].terms.get(tuple(1 if k == j else 0 for k in range(d)), Fraction(0))
            for j in range(d)] for i in range(d)]
    from .._linalg import matrix_rank

    if matrix_rank(lin) != d:
        raise InputError("linear part of the coordinate change is singular")


def _divide_var(p: Poly, i: int) -> Poly:
    out = {}
    for e, c in p.terms.items():
        ne = list(e)
        ne[i] -= 1
        out[tuple(ne)] = c
    return Poly(p.nvars, out)


def _inverse_series(g: Sequence[Poly], degree: int) -> list:
    """f with f(g(x)) = x modulo degree + 1, by fixed-point iteration on the linear part."""
    d = len(g)
    lin = [[g[i].terms.get(tuple(1 if k == j else 0 for k in range(d)), Fraction(0))
            for j in range(d)] for i in range(d)]
    from .._linalg import solve

    # inverse of the linear part, column by column
    inv = []
    for j in range(d):
        col = solve(lin, [1 if i == j else 0 for i in range(d)])
        inv.append(col)
    A_inv = [[inv[j][i] for j in range(d)] for i in range(d)]
    y = [Poly.var(d, i) for i in range(d)]
    lin_inv = [sum((y[j] * A_inv[i][j] for j in range(d)), Poly(d)) for i in range(d)]
    nonlin = [g[i] - sum((Poly.var(d, j) * lin[i][j] for j in range(d)), Poly(d)) for i in range(d)]
    f = list(lin_inv)
    for _ in range(degree + 1):
        # g(f) = y  <=>  A f = y - N(f)  <=>  f = A^-1 (y - N(f))
        nf = [p.compose(f, degree) for p in nonlin]
        rhs = [y[i] - nf[i] for i in range(d)]
        f = [
            sum((rhs[j] * A_inv[i][j] for j in range(d)), Poly(d)).truncate(degree)
            for i in range(d)
        ]
    for i in range(d):
        if g[i].compose(f, degree) != y[i]:
            raise DegreeCapExceeded("inverse series did not converge at the working degree")
    return f


def make_transform(g: Sequence[Poly], divisor_rank: int, degree_cap: int) -> CoordinateTransform:
    if degree_cap < 1:
        raise DegreeCapExceeded("degree_cap must be at least 1")
    g = list(g)
    _check_divisor(g, divisor_rank)
    f = _inverse_series(g, degree_cap + 1)
    return CoordinateTransform(g, divisor_rank, degree_cap, f)


def one_variable(coeffs: Sequence, degree_cap: int, divisor: bool = True) -> CoordinateTransform:
    """d = 1 transform g(gamma) = sum_k coeffs[k] gamma^(k+1)."""
    g = Poly(1, {(k + 1,): c for k, c in enumerate(coeffs)})
    return make_transform([g], 1 if divisor else 0, degree_cap)


def identity_transform(d: int, r: int, degree_cap: int = 4) -> CoordinateTransform:
    return make_transform([Poly.var(d, i) for i in range(d)], r, degree_cap)


# ---------------------------------------------------------------------------


class _Images:
    """Transformed single symbols for one (transform, d, r), cached."""

    def __init__(self, t: CoordinateTransform, r: int):
        self.t = t
        self.d = t.d
        self.r = r
        cap = t.degree_cap
        d = self.d
        # M^j_i(gamma) = (d f^j / d gamma~^i)(g(gamma)), exact to degree cap
        self.M = [
            [t.f[j].partial(i).compose(t.g, cap) for i in range(d)] for j in range(d)
        ]
        self._sym: dict = {}

    def poly_state(self, p: Poly) -> VState:
        terms = {}
        for e, c in p.terms.items():
            terms[(tuple(e), (), ())] = c
        return VState(self.d, self.r, terms)

    def gamma_pool(self, gexp: tuple) -> VState:
        """prod_i g^i(gamma)^(m_i), exact to excess charge cap."""
        t, d, cap = self.t, self.d, self.t.degree_cap
        base_deg = sum(gexp)
        out = Poly.const(d, 1)
        for i, m in enumerate(gexp):
            if m == 0:
                continue
            if m > 0:
                factor = t.g[i].power(m, m + cap)
                out = out.mul(factor)
            else:
                if i >= self.r:
                    raise InputError(f"gamma{i + 1} is not inverted")
                unit = _divide_var(t.g[i], i)
                inv = unit.inverse_unit(cap)
                pw = inv.power(-m, cap)
                out = out.mul(pw)
                out = out.mul(Poly.var(d, i, m))
        return self.poly_state(out.truncate(base_deg + cap))

    def symbol(self, sym) -> VState:
        if sym in self._sym:
            return self._sym[sym]
        kind, idx, order = sym
        if order > 0:
            val = self.symbol((kind, idx, 0)).derivative(order)
        else:
            val = self._base(kind, idx - 1)
        self._sym[sym] = val
        return val

    def _base(self, kind: int, i: int) -> VState:
        t, d, r = self.t, self.d, self.r
        if kind == GAMMA:
            return self.poly_state(t.g[i])
        if kind == C:
            out = VState(d, r)
            for m in range(d):
                out = out + nop(self.poly_state(t.g[i].partial(m)), VState.symbol(d, r, C, m + 1))
            return out
        if kind == B:
            out = VState(d, r)
            for j in range(d):
                out = out + nop(self.poly_state(self.M[j][i]), VState.symbol(d, r, B, j + 1))
            return out
        # beta~_i = beta_j M^j_i + sigma d_m(M^k_i) c^m b_k, written as normally
        # ordered products with beta and the fermions to the left of functions of gamma
        out = VState(d, r)
        for j in range(d):
            out = out + nop(VState.symbol(d, r, BETA, j + 1), self.poly_state(self.M[j][i]))
        for m in range(d):
            for k in range(d):
                coef = self.M[k][i].partial(m)
                if coef.is_zero():
                    continue
                out = out + FERMIONIC_SIGN * nop(
                    VState.symbol(d, r, C, m + 1),
                    VState.symbol(d, r, B, k + 1),
                    self.poly_state(coef),
                )
        return out


_IMAGE_CACHE: dict = {}


def _images(t: CoordinateTransform, r: int) -> _Images:
    key = (id(t), r)
    hit = _IMAGE_CACHE.get(key)
    if hit is None or hit.t is not t:
        hit = _Images(t, r)
        _IMAGE_CACHE[key] = hit
    return hit


_CHARGE = {GAMMA: 1, C: 1, BETA: -1, B: -1}


def _cut(s: VState, max_charge: int) -> VState:
    return VState(s.d, s.r, {k: c for k, c in s.terms.items() if sum(key_charge(k)) <= max_charge})


def transform_monomial(t: CoordinateTransform, key, r: int) -> tuple[VState, int]:
    """Image of one creation monomial and the largest total charge it is exact on."""
    im = _images(t, r)
    gexp, evens, odds = key
    limit = sum(key_charge(key)) + t.degree_cap
    result = im.gamma_pool(gexp)
    symbols = []
    for s, n in evens:
        symbols.extend([s] * n)
    symbols.extend(odds)
    # factors still to be multiplied in can lower the charge (beta and b carry -1),
    # so each partial product is cut at the limit less their total charge
    pending = sum(_CHARGE[s[0]] for s in symbols)
    result = _cut(result, limit - pending)
    for s in reversed(symbols):
        pending -= _CHARGE[s[0]]
        result = _cut(nop(im.symbol(s), result), limit - pending)
    return result, limit


def transform_with_range(
    t: CoordinateTransform, s: VState, degree_cap: int | None = None
) -> tuple[VState, int]:
    """(image of s, largest total charge on which the image is exact)."""
    if t.d != s.d:
        raise InputError("transform and state have different ranks")
    if degree_cap is not None and degree_cap > t.degree_cap:
        raise DegreeCapExceeded(
            f"transform was built to degree {t.degree_cap}, {degree_cap} requested"
        )
    if s.is_zero():
        return s, 10**9
    out = VState(s.d, s.r)
    limit = None
    for key, c in s.terms.items():
        img, lim = transform_monomial(t, key, s.r)
        out = out + img * c
        limit = lim if limit is None else min(limit, lim)
    return _cut(out, limit), limit


def coordinate_transform(t: CoordinateTransform, s: VState, degree_cap: int | None = None) -> VState:
    """The transformed state, cut to its certified charge range."""
    return transform_with_range(t, s, degree_cap)[0]


def agree_up_to(a: VState, b: VState, max_charge: int) -> bool:
    return _cut(a - b, max_charge).is_zero()
