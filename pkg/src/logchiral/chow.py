"""Truncated graded-commutative cohomology rings with an integration functional.

A :class:`RingSpec` fixes named even-degree generators, monomial rewrite rules
and the integrals of top-degree monomials. :class:`RingElement` values are
stored in normal form. Their coefficients may be Fractions or any exact
scalar ring (Laurent polynomials or rational functions in y), which is how
the genus pipeline realizes its tensor-product coefficient rings.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import factorial
from typing import Iterable, Mapping, Sequence

from .errors import InputError, NonNilpotentInput, NonTerminatingRules, NonUnitConstantTerm

Monomial = tuple  # exponent vector aligned with RingSpec.names

_SCALARS = (int, Fraction)


def _is_zero(c) -> bool:
    if isinstance(c, _SCALARS):
        return c == 0
    return c.is_zero()


def _inv(c):
    if isinstance(c, _SCALARS):
        if c == 0:
            raise NonUnitConstantTerm("0 is not invertible")
        return 1 / Fraction(c)
    if not c.is_unit():
        raise NonUnitConstantTerm(f"{c!r} is not a unit")
    return c.inverse()


class RingSpec:
    """Presentation of a truncated cohomology ring of a d-dimensional space.

    ``generators`` maps names to degrees (half the cohomological degree).
    ``rules`` maps monomials to linear combinations of monomials; monomials
    are given as ``{name: exponent}`` dicts or strings like ``"a*b^2"``.
    ``integration`` gives the value of each top-degree normal-form monomial.
    """

    def __init__(
        self,
        dimension: int,
        generators: Mapping[str, int],
        rules: Sequence[tuple] = (),
        integration: Mapping = None,
        name: str = "",
    ):
        if dimension < 1:
            raise InputError("dimension must be at least 1")
        if not generators:
            raise InputError("a ring needs at least one generator")
        self.dimension = dimension
        self.name = name
        self.names = tuple(sorted(generators))
        self.degrees = tuple(int(generators[n]) for n in self.names)
        if any(g < 1 for g in self.degrees):
            raise InputError("generator degrees must be positive")
        self._index = {n: i for i, n in enumerate(self.names)}
        self.rules: list[tuple[Monomial, dict]] = []
        for lhs, rhs in rules:
            lm = self.monomial(lhs)
            rterms = self._linear(rhs)
            for m in rterms:
                if self.degree(m) != self.degree(lm):
                    raise InputError(f"rule for {self.render_monomial(lm)} is not homogeneous")
            self.rules.append((lm, rterms))
        self._nf_cache: dict[Monomial, dict] = {}
        self._in_progress: set = set()
        # normal-form every monomial up to the top degree once, so cycles surface now
        self.basis = [m for m in self._all_monomials() if self._nf(m) == {m: Fraction(1)}]
        self.top_basis = [m for m in self.basis if self.degree(m) == dimension]
        self.integration: dict[Monomial, Fraction] = {}
        for key, val in (integration or {}).items():
            m = self.monomial(key)
            if self.degree(m) != dimension:
                raise InputError(f"integral given for non-top monomial {self.render_monomial(m)}")
            if m not in self.top_basis:
                raise InputError(f"integral given for reducible monomial {self.render_monomial(m)}")
            self.integration[m] = Fraction(val)
        missing = [m for m in self.top_basis if m not in self.integration]
        if missing:
            raise InputError(
                "integration table misses " + ", ".join(self.render_monomial(m) for m in missing)
            )

    # -- monomials ----------------------------------------------------------
    def monomial(self, spec) -> Monomial:
        if isinstance(spec, tuple) and len(spec) == len(self.names) and all(
            isinstance(e, int) for e in spec
        ):
            return spec
        if isinstance(spec, str):
            spec = _parse_monomial(spec)
        exps = [0] * len(self.names)
        for n, e in spec.items():
            if n not in self._index:
                raise InputError(f"unknown generator {n!r}")
            if e < 0:
                raise InputError("negative exponents are not allowed in the ring")
            exps[self._index[n]] += int(e)
        return tuple(exps)

    def _linear(self, spec) -> dict:
        if isinstance(spec, (int, Fraction)):
            if spec != 0:
                raise InputError("a rule's right side must be 0 or a combination of monomials")
            return {}
        if isinstance(spec, str):
            items = _parse_linear(spec)
        elif isinstance(spec, Mapping):
            items = spec.items()
        else:
            items = spec
        out: dict = {}
        for mono, c in items:
            m = self.monomial(mono)
            out[m] = out.get(m, 0) + Fraction(c)
        return {m: c for m, c in out.items() if c}

    def degree(self, m: Monomial) -> int:
        return sum(e * g for e, g in zip(m, self.degrees))

    def order_key(self, m: Monomial):
        """Degree-lexicographic key on generator names (larger = later)."""
        return (self.degree(m), m)

    def render_monomial(self, m: Monomial) -> str:
        parts = []
        for n, e in zip(self.names, m):
            if e == 1:
                parts.append(n)
            elif e > 1:
                parts.append(f"{n}^{e}")
        return "*".join(parts) or "1"

    def _all_monomials(self):
        out = []

        def rec(i, prefix, deg):
            if i == len(self.names):
                out.append(tuple(prefix))
                return
            e = 0
            while deg + e * self.degrees[i] <= self.dimension:
                rec(i + 1, prefix + [e], deg + e * self.degrees[i])
                e += 1

        rec(0, [], 0)
        return sorted(out, key=self.order_key)

    # -- normal form --------------------------------------------------------
    def _nf(self, m: Monomial) -> dict:
        if self.degree(m) > self.dimension:
            return {}
        hit = self._nf_cache.get(m)
        if hit is not None:
            return hit
        if m in self._in_progress:
            raise NonTerminatingRules(
                f"rewriting {self.render_monomial(m)} returns to itself"
            )
        self._in_progress.add(m)
        try:
            result = None
            for lhs, rhs in self.rules:
                if all(a >= b for a, b in zip(m, lhs)):
                    quot = tuple(a - b for a, b in zip(m, lhs))
                    acc: dict = {}
                    for rm, rc in rhs.items():
                        prod = tuple(a + b for a, b in zip(rm, quot))
                        for nm, nc in self._nf(prod).items():
                            acc[nm] = acc.get(nm, 0) + rc * nc
                    result = {k: v for k, v in acc.items() if v}
                    break
            if result is None:
                result = {m: Fraction(1)}
        finally:
            self._in_progress.discard(m)
        self._nf_cache[m] = result
        return result

    def normal_form(self, raw) -> "RingElement":
        """Normal form of ``{monomial: coeff}`` data, a string like ``"2*a - b^2"``,
        a RingElement or a scalar."""
        if isinstance(raw, RingElement):
            items = raw.terms.items()
        elif isinstance(raw, str):
            try:
                parsed = _parse_linear(raw)
            except (ValueError, IndexError, ZeroDivisionError):
                raise InputError(f"cannot parse {raw!r} as a ring element") from None
            items = ((self.monomial(k), v) for k, v in parsed)
        elif isinstance(raw, Mapping):
            items = ((self.monomial(k), v) for k, v in raw.items())
        else:
            return self.scalar(raw)
        out: dict = {}
        for m, c in items:
            for nm, nc in self._nf(m).items():
                t = c * nc
                out[nm] = out[nm] + t if nm in out else t
        return RingElement(self, out)

    # -- constructors -------------------------------------------------------
    @property
    def zero_monomial(self) -> Monomial:
        return (0,) * len(self.names)

    def scalar(self, c) -> "RingElement":
        return RingElement(self, {self.zero_monomial: c})

    def one(self) -> "RingElement":
        return self.scalar(Fraction(1))

    def zero(self) -> "RingElement":
        return RingElement(self, {})

    def gen(self, name: str) -> "RingElement":
        return self.normal_form({self.monomial({name: 1}): Fraction(1)})

    def __repr__(self):
        return f"RingSpec(d={self.dimension}, generators={dict(zip(self.names, self.degrees))})"


def _parse_monomial(text: str) -> dict:
    text = text.strip()
    out: dict = {}
    if text in ("", "1"):
        return out
    for factor in text.replace(" ", "").split("*"):
        if "^" in factor:
            n, e = factor.split("^")
            out[n] = out.get(n, 0) + int(e)
        else:
            out[factor] = out.get(factor, 0) + 1
    return out


def _parse_linear(text: str) -> list[tuple[dict, Fraction]]:
    """Parse ``"2*a*b - b^2 + 1/2*a^2"`` into (monomial, coefficient) pairs."""
    text = text.replace(" ", "")
    if text in ("", "0"):
        return []
    terms, sign, buf = [], 1, ""
    for ch in text + "+":
        if ch in "+-" and buf:
            terms.append((sign, buf))
            buf = ""
            sign = 1 if ch == "+" else -1
        elif ch in "+-":
            sign *= 1 if ch == "+" else -1
        else:
            buf += ch
    out = []
    for sgn, body in terms:
        factors = body.split("*")
        coeff = Fraction(sgn)
        mono = []
        for f in factors:
            if f[0].isdigit():
                coeff *= Fraction(f)
            else:
                mono.append(f)
        out.append((_parse_monomial("*".join(mono)), coeff))
    return out


class RingElement:
    """Normal-form element; immutable by convention."""

    __slots__ = ("spec", "terms")

    def __init__(self, spec: RingSpec, terms: Mapping):
        self.spec = spec
        self.terms = {m: c for m, c in terms.items() if not _is_zero(c)}

    # -- structure ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self):
        return self.terms.get(self.spec.zero_monomial, Fraction(0))

    def component(self, degree: int) -> "RingElement":
        return RingElement(
            self.spec, {m: c for m, c in self.terms.items() if self.spec.degree(m) == degree}
        )

    def nilpotent_part(self) -> "RingElement":
        z = self.spec.zero_monomial
        return RingElement(self.spec, {m: c for m, c in self.terms.items() if m != z})

    def map_coeffs(self, fn) -> "RingElement":
        return RingElement(self.spec, {m: fn(c) for m, c in self.terms.items()})

    # -- arithmetic ---------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, RingElement):
            if other.spec is not self.spec:
                raise ValueError("elements of different rings")
            return other
        return self.spec.scalar(other)

    def __add__(self, other):
        other = self._lift(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t[m] + c if m in t else c
        return RingElement(self.spec, t)

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.spec, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, RingElement):
            if isinstance(other, _SCALARS) and other == 0:
                return self.spec.zero()
            return RingElement(self.spec, {m: c * other for m, c in self.terms.items()})
        other = self._lift(other)
        spec = self.spec
        d = spec.dimension
        acc: dict = {}
        for m1, c1 in self.terms.items():
            d1 = spec.degree(m1)
            for m2, c2 in other.terms.items():
                if d1 + spec.degree(m2) > d:
                    continue
                m = tuple(a + b for a, b in zip(m1, m2))
                c = c1 * c2
                for nm, nc in spec._nf(m).items():
                    t = c * nc if nc != 1 else c
                    acc[nm] = acc[nm] + t if nm in acc else t
        return RingElement(spec, acc)

    def __rmul__(self, other):
        if isinstance(other, _SCALARS) and other == 0:
            return self.spec.zero()
        return RingElement(self.spec, {m: other * c for m, c in self.terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.spec.one()
        for _ in range(n):
            out = out * self
        return out

    def is_unit(self) -> bool:
        c = self.constant_term()
        if isinstance(c, _SCALARS):
            return c != 0
        return c.is_unit()

    def inverse(self) -> "RingElement":
        """(a0 + n)^-1 = a0^-1 * sum_k (-n/a0)^k; the sum stops at the top degree."""
        a0 = self.constant_term()
        inv0 = _inv(a0)
        n = self.nilpotent_part() * inv0
        out = self.spec.one()
        power = self.spec.one()
        for _ in range(self.spec.dimension):
            power = power * (-n)
            if power.is_zero():
                break
            out = out + power
        return out * inv0

    def __truediv__(self, other):
        if isinstance(other, RingElement):
            return self * other.inverse()
        return self * _inv(other)

    def __eq__(self, other):
        if isinstance(other, RingElement):
            if other.spec is not self.spec:
                return False
            return self.terms == other.terms
        if isinstance(other, _SCALARS) or hasattr(other, "is_zero"):
            return self == self.spec.scalar(other)
        return NotImplemented

    __hash__ = None

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=self.spec.order_key):
            c = self.terms[m]
            mono = self.spec.render_monomial(m)
            if isinstance(c, _SCALARS):
                c = Fraction(c)
                cs = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
                if mono == "1":
                    parts.append(cs)
                elif c in (1, -1):
                    parts.append(("" if c == 1 else "-") + mono)
                else:
                    parts.append(f"{cs}*{mono}")
            else:
                parts.append(f"({c})" if mono == "1" else f"({c})*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"RingElement({self.render()})"


# ---------------------------------------------------------------------------
# characteristic classes


def _require_nilpotent(e: RingElement) -> None:
    if not _is_zero(e.constant_term()):
        raise NonNilpotentInput(f"{e.render()} has a nonzero degree-0 part")


def exp_class(e: RingElement) -> RingElement:
    """sum_{k<=d} e^k / k! for nilpotent e."""
    _require_nilpotent(e)
    out = e.spec.one()
    power = e.spec.one()
    for k in range(1, e.spec.dimension + 1):
        power = power * e
        if power.is_zero():
            break
        out = out + power * Fraction(1, factorial(k))
    return out


def todd_coefficients(n: int) -> list[Fraction]:
    """Taylor coefficients of x / (1 - e^-x) through x^n.

    Computed by inverting (1 - e^-x)/x = sum_k (-1)^k x^k / (k+1)!.
    """
    f = [Fraction((-1) ** k, factorial(k + 1)) for k in range(n + 1)]
    g = [Fraction(1)]
    for m in range(1, n + 1):
        g.append(-sum(f[i] * g[m - i] for i in range(1, m + 1)))
    return g


def todd_from_roots(roots: Iterable[RingElement], spec: RingSpec | None = None) -> RingElement:
    """Product of x/(1 - e^-x) over the given tangent Chern roots."""
    roots = list(roots)
    if not roots:
        if spec is None:
            raise ValueError("an empty root list needs the ring spec")
        return spec.one()
    spec = roots[0].spec
    coeffs = todd_coefficients(spec.dimension)
    factors = []
    for x in roots:
        _require_nilpotent(x)
        out = spec.one()
        power = spec.one()
        for k in range(1, spec.dimension + 1):
            power = power * x
            if power.is_zero():
                break
            out = out + power * coeffs[k]
        factors.append(out)
    return reduce(lambda a, b: a * b, factors)


def integrate(e: RingElement, spec: RingSpec | None = None):
    """Apply the integration functional to the top-degree component."""
    spec = spec or e.spec
    total = Fraction(0)
    for m, c in e.terms.items():
        v = spec.integration.get(m)
        if v is not None and v != 0:
            total = c * v + total
    return total


# ---------------------------------------------------------------------------
# stock rings


def projective_space(d: int, name: str = "h") -> RingSpec:
    """H*(P^d) = Q[h]/(h^(d+1)) with integral h^d = 1."""
    return RingSpec(d, {name: 1}, integration={f"{name}^{d}" if d > 1 else name: 1}, name=f"P{d}")


def product_of_lines(names: Sequence[str] = ("a", "b")) -> RingSpec:
    """H*((P^1)^n) with generators squaring to zero and integral of the product = 1."""
    d = len(names)
    rules = [(f"{n}^2", 0) for n in names]
    return RingSpec(d, {n: 1 for n in names}, rules, {"*".join(names): 1}, name="P1^" + str(d))
