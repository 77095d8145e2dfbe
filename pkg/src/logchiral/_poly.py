"""Sparse multivariate Laurent polynomials over Q, truncated by total degree."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence


class Poly:
    """Immutable dict {exponent tuple: Fraction}; exponents may be negative."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping | None = None):
        self.nvars = nvars
        self.terms = {tuple(e): Fraction(c) for e, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int, power: int = 1) -> "Poly":
        e = [0] * nvars
        e[i] = power
        return cls(nvars, {tuple(e): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def degree_range(self) -> tuple[int, int] | None:
        if not self.terms:
            return None
        degs = [sum(e) for e in self.terms]
        return min(degs), max(degs)

    def truncate(self, max_degree: int) -> "Poly":
        return Poly(self.nvars, {e: c for e, c in self.terms.items() if sum(e) <= max_degree})

    def constant(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.nvars, other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return Poly(self.nvars, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def mul(self, other: "Poly", max_degree: int | None = None) -> "Poly":
        t: dict = {}
        for e1, c1 in self.terms.items():
            s1 = sum(e1)
            for e2, c2 in other.terms.items():
                if max_degree is not None and s1 + sum(e2) > max_degree:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return Poly(self.nvars, t)

    def __mul__(self, other):
        if isinstance(other, Poly):
            return self.mul(other)
        return Poly(self.nvars, {e: c * other for e, c in self.terms.items()})

    __rmul__ = __mul__

    def power(self, n: int, max_degree: int) -> "Poly":
        """Non-negative power, truncated."""
        out = Poly.const(self.nvars, 1)
        for _ in range(n):
            out = out.mul(self, max_degree)
        return out

    def inverse_unit(self, max_degree: int) -> "Poly":
        """Inverse of a series with invertible constant term, to the given degree."""
        a0 = self.constant()
        if a0 == 0:
            raise ZeroDivisionError("constant term is zero")
        nil = (self - a0) * (1 / a0)
        out = Poly.const(self.nvars, 1)
        power = Poly.const(self.nvars, 1)
        for _ in range(max_degree):
            power = power.mul(-nil, max_degree)
            if power.is_zero():
                break
            out = out + power
        return out * (1 / a0)

    def partial(self, i: int) -> "Poly":
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                t[tuple(ne)] = c * e[i]
        return Poly(self.nvars, t)

    def compose(self, subs: Sequence["Poly"], max_degree: int) -> "Poly":
        """Substitute polynomial series for the variables (non-negative exponents only)."""
        out = Poly(subs[0].nvars if subs else self.nvars)
        cache: dict = {}
        for e, c in self.terms.items():
            if any(x < 0 for x in e):
                raise ValueError("compose needs non-negative exponents")
            term = Poly.const(out.nvars, c)
            for i, x in enumerate(e):
                if x:
                    key = (i, x)
                    if key not in cache:
                        cache[key] = subs[i].power(x, max_degree)
                    term = term.mul(cache[key], max_degree)
            out = out + term
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.nvars, other)
        return self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        parts = [f"{c}*{e}" for e, c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))]
        return "Poly(" + " + ".join(parts) + ")"
