"""Exact truncated q-series with coefficients in Q[y, 1/y] or Q(y).

Every value is immutable; all arithmetic is exact over :class:`fractions.Fraction`.
A :class:`TruncatedSeries` is known modulo ``q**(order + 1)`` and combines with
other series at the smaller of the two orders.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import EmptyVerifiableRange, InputError, NegativeQPower, NonUnitConstantTerm

_SCALARS = (int, Fraction)


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def format_rational(c: Fraction) -> str:
    c = _frac(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------------------
# dense univariate helpers (ascending coefficient lists over Q)


def _strip(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _pdivmod(a: list, b: list) -> tuple[list, list]:
    a = list(a)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    db = len(b) - 1
    lead = b[-1]
    if len(a) <= db:
        return [], _strip(a)
    quot = [Fraction(0)] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        coef = a[i]
        if coef == 0:
            continue
        coef = coef / lead
        quot[i - db] = coef
        for j in range(db + 1):
            a[i - db + j] -= coef * b[j]
    return _strip(quot), _strip(a[:db])


def _pgcd(a: list, b: list) -> list:
    a, b = _strip(list(a)), _strip(list(b))
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    if not a:
        return []
    lead = a[-1]
    return [c / lead for c in a]


# ---------------------------------------------------------------------------


class Laurent:
    """Laurent polynomial in y with rational coefficients; zeros are never stored."""

    __slots__ = ("_t", "_h")

    def __init__(self, terms=None):
        if terms is None:
            terms = {}
        elif isinstance(terms, _SCALARS):
            terms = {0: terms}
        self._t = {int(k): _frac(v) for k, v in terms.items() if v != 0}
        self._h = None

    @classmethod
    def _wrap(cls, t: dict) -> "Laurent":
        obj = cls.__new__(cls)
        obj._t = t
        obj._h = None
        return obj

    @classmethod
    def monomial(cls, coeff, exp: int) -> "Laurent":
        return cls({exp: coeff})

    @classmethod
    def y(cls, exp: int = 1) -> "Laurent":
        return cls({exp: 1})

    @property
    def terms(self) -> dict:
        return dict(self._t)

    def items(self):
        return sorted(self._t.items())

    def coefficient(self, exp: int) -> Fraction:
        return self._t.get(exp, Fraction(0))

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    @property
    def window(self) -> tuple[int, int] | None:
        if not self._t:
            return None
        return min(self._t), max(self._t)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, _SCALARS):
            other = Laurent(other)
        if not isinstance(other, Laurent):
            return NotImplemented
        t = dict(self._t)
        for k, v in other._t.items():
            s = t.get(k, 0) + v
            if s:
                t[k] = s
            else:
                t.pop(k, None)
        return Laurent._wrap(t)

    __radd__ = __add__

    def __neg__(self):
        return Laurent._wrap({k: -v for k, v in self._t.items()})

    def __sub__(self, other):
        if isinstance(other, _SCALARS):
            other = Laurent(other)
        if not isinstance(other, Laurent):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        if isinstance(other, _SCALARS):
            return Laurent(other) - self
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, _SCALARS):
            if other == 0:
                return Laurent._wrap({})
            other = _frac(other)
            return Laurent._wrap({k: v * other for k, v in self._t.items()})
        if not isinstance(other, Laurent):
            return NotImplemented
        t: dict = {}
        for k1, v1 in self._t.items():
            for k2, v2 in other._t.items():
                k = k1 + k2
                t[k] = t.get(k, 0) + v1 * v2
        return Laurent._wrap({k: v for k, v in t.items() if v})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = Laurent(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, _SCALARS):
            return self * (1 / _frac(other))
        if isinstance(other, Laurent):
            if other.is_unit():
                return self * other.inverse()
            return RationalFunction(self, other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _SCALARS):
            return Laurent(other) / self
        return NotImplemented

    def is_unit(self) -> bool:
        return len(self._t) == 1

    def inverse(self) -> "Laurent":
        if not self.is_unit():
            raise NonUnitConstantTerm(f"{self} is not a unit in Q[y, 1/y]")
        (k, v), = self._t.items()
        return Laurent._wrap({-k: 1 / v})

    def shift(self, k: int) -> "Laurent":
        return Laurent._wrap({e + k: v for e, v in self._t.items()})

    def evaluate(self, value) -> Fraction:
        value = _frac(value)
        return sum((c * value**e for e, c in self._t.items()), Fraction(0))

    def __eq__(self, other):
        if isinstance(other, _SCALARS):
            other = Laurent(other)
        if isinstance(other, RationalFunction):
            return other == self
        if not isinstance(other, Laurent):
            return NotImplemented
        return self._t == other._t

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self._t.items()))
        return self._h

    # -- polynomial view ----------------------------------------------------
    def _as_poly(self) -> tuple[int, list]:
        """(lowest exponent, dense coefficient list starting there)."""
        lo, hi = self.window
        return lo, [self._t.get(lo + i, Fraction(0)) for i in range(hi - lo + 1)]

    @classmethod
    def _from_poly(cls, lo: int, coeffs: Sequence) -> "Laurent":
        return cls({lo + i: c for i, c in enumerate(coeffs) if c})

    def render(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for e, c in self.items():
            parts.append(format_rational(c) if e == 0 else f"{format_rational(c)}*y^{e}")
        return " ".join(parts)

    def __repr__(self):
        return f"Laurent({self.render()})"

    @classmethod
    def parse(cls, text: str) -> "Laurent":
        text = text.strip()
        if text == "0":
            return cls()
        terms: dict = {}
        for tok in text.split():
            if "*y^" in tok:
                c, e = tok.split("*y^")
            else:
                c, e = tok, "0"
            terms[int(e)] = terms.get(int(e), 0) + Fraction(c)
        return cls(terms)


class RationalFunction:
    """Reduced quotient of Laurent polynomials in y.

    The denominator is stored as an honest polynomial with constant term 1;
    any power of y is absorbed into the numerator.
    """

    __slots__ = ("num", "den", "_h")

    def __init__(self, num, den=1, _reduced=False):
        if not isinstance(num, Laurent):
            num = Laurent(num)
        if not isinstance(den, Laurent):
            den = Laurent(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        self._h = None
        if _reduced:
            self.num, self.den = num, den
            return
        if num.is_zero():
            self.num, self.den = Laurent(), Laurent(1)
            return
        dlo, dpoly = den._as_poly()
        nlo, npoly = num._as_poly()
        nlo -= dlo
        if len(dpoly) > 1:
            g = _pgcd(npoly, dpoly)
            if len(g) > 1:
                npoly, _ = _pdivmod(npoly, g)
                dpoly, _ = _pdivmod(dpoly, g)
        c0 = dpoly[0]
        if c0 != 1:
            npoly = [c / c0 for c in npoly]
            dpoly = [c / c0 for c in dpoly]
        self.num = Laurent._from_poly(nlo, npoly)
        self.den = Laurent._from_poly(0, dpoly)

    @staticmethod
    def coerce(x) -> "RationalFunction":
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, Laurent):
            return RationalFunction(x, Laurent(1), _reduced=True)
        if isinstance(x, _SCALARS):
            return RationalFunction(Laurent(x), Laurent(1), _reduced=True)
        raise TypeError(f"cannot coerce {type(x).__name__} to RationalFunction")

    def is_polynomial(self) -> bool:
        return self.den == Laurent(1)

    def to_laurent(self) -> Laurent | None:
        return self.num if self.is_polynomial() else None

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def _combine(self, other, sign):
        if self.den == other.den:
            num = self.num + other.num if sign > 0 else self.num - other.num
            if self.is_polynomial():
                return RationalFunction(num, self.den, _reduced=True)
            return RationalFunction(num, self.den)
        a = self.num * other.den
        b = other.num * self.den
        return RationalFunction(a + b if sign > 0 else a - b, self.den * other.den)

    def __add__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        return self._combine(other, -1)

    def __rsub__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        return other._combine(self, -1)

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _reduced=True)

    def __mul__(self, other):
        if isinstance(other, _SCALARS):
            return RationalFunction(self.num * other, self.den, _reduced=True)
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_polynomial() and other.is_polynomial():
            return RationalFunction(self.num * other.num, self.den, _reduced=True)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def is_unit(self) -> bool:
        return not self.num.is_zero()

    def inverse(self) -> "RationalFunction":
        if self.num.is_zero():
            raise NonUnitConstantTerm("zero is not invertible in Q(y)")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RationalFunction.coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RationalFunction(self.num**n, self.den**n)

    def evaluate(self, value) -> Fraction:
        d = self.den.evaluate(value)
        if d == 0:
            raise ZeroDivisionError(f"denominator vanishes at y={value}")
        return self.num.evaluate(value) / d

    def __eq__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._h is None:
            self._h = hash((self.num, self.den))
        return self._h

    def __repr__(self):
        if self.is_polynomial():
            return f"RationalFunction({self.num.render()})"
        return f"RationalFunction(({self.num.render()}) / ({self.den.render()}))"


# ---------------------------------------------------------------------------


def _zero_like(x):
    return x * 0


def _one_like(x):
    return x * 0 + 1


def _is_zero(x) -> bool:
    if isinstance(x, _SCALARS):
        return x == 0
    return x.is_zero()


def _invert_coeff(x):
    if isinstance(x, _SCALARS):
        if x == 0:
            raise NonUnitConstantTerm("constant term 0 is not invertible")
        return 1 / _frac(x)
    if hasattr(x, "is_unit") and not x.is_unit():
        raise NonUnitConstantTerm(f"constant term {x!r} is not a unit")
    return x.inverse()


class TruncatedSeries:
    """Power series in q known modulo ``q**(order + 1)``.

    Coefficients may be any exact ring element supporting ``+``, ``-``, ``*``
    and mixed arithmetic with integers: Fractions, :class:`Laurent`,
    :class:`RationalFunction` or cohomology-ring elements.
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Iterable, order: int | None = None):
        coeffs = list(coeffs)
        if not coeffs:
            raise ValueError("a series needs at least one coefficient to fix its ring")
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("order must be non-negative")
        if len(coeffs) > order + 1:
            coeffs = coeffs[: order + 1]
        while len(coeffs) < order + 1:
            coeffs.append(_zero_like(coeffs[0]))
        self.coeffs = tuple(coeffs)
        self.order = order

    @classmethod
    def constant(cls, value, order: int) -> "TruncatedSeries":
        return cls([value], order)

    @classmethod
    def from_terms(cls, terms: dict, order: int, zero=None) -> "TruncatedSeries":
        """Build from ``{(q_exp, y_exp): coeff}``."""
        rows = [dict() for _ in range(order + 1)]
        for (m, p), c in terms.items():
            if m <= order:
                rows[m][p] = rows[m].get(p, 0) + c
        return cls([Laurent(r) for r in rows], order)

    def __getitem__(self, m: int):
        return self.coeffs[m]

    def __len__(self):
        return len(self.coeffs)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError("cannot raise the order of a truncated series")
        return TruncatedSeries(self.coeffs[: order + 1], order)

    def map(self, fn: Callable) -> "TruncatedSeries":
        return TruncatedSeries([fn(c) for c in self.coeffs], self.order)

    def is_zero(self) -> bool:
        return all(_is_zero(c) for c in self.coeffs)

    # -- ring operations ----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries([other], self.order)

    def __add__(self, other):
        other = self._coerce(other)
        n = min(self.order, other.order)
        return TruncatedSeries([self.coeffs[i] + other.coeffs[i] for i in range(n + 1)], n)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries([c * other for c in self.coeffs], self.order)
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        nz_a = [i for i in range(n + 1) if not _is_zero(a[i])]
        nz_b = [j for j in range(n + 1) if not _is_zero(b[j])]
        out = [None] * (n + 1)
        for i in nz_a:
            for j in nz_b:
                if i + j > n:
                    break
                t = a[i] * b[j]
                out[i + j] = t if out[i + j] is None else out[i + j] + t
        zero = _zero_like(a[0] * b[0])
        return TruncatedSeries([zero if c is None else c for c in out], n)

    def __rmul__(self, other):
        return TruncatedSeries([other * c for c in self.coeffs], self.order)

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse; raises NonUnitConstantTerm if impossible."""
        a = self.coeffs
        inv0 = _invert_coeff(a[0])
        out = [inv0]
        nz = [i for i in range(1, self.order + 1) if not _is_zero(a[i])]
        for m in range(1, self.order + 1):
            acc = None
            for i in nz:
                if i > m:
                    break
                t = a[i] * out[m - i]
                acc = t if acc is None else acc + t
            out.append(_zero_like(inv0) if acc is None else -(acc * inv0))
        return TruncatedSeries(out, self.order)

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            n = min(self.order, other.order)
            return self.truncate(n) * other.truncate(n).inverse()
        return self * _invert_coeff(other)

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = TruncatedSeries([_one_like(self.coeffs[0])], self.order)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        n = min(self.order, other.order)
        return all(self.coeffs[i] == other.coeffs[i] for i in range(n + 1))

    def __hash__(self):
        return hash((self.order, self.coeffs))

    # -- y bookkeeping ------------------------------------------------------
    @property
    def ydeg_window(self) -> list[tuple[int, int] | None]:
        """Per-order (min, max) y-exponent actually present; ``None`` for zero."""
        out = []
        for c in self.coeffs:
            c = _as_laurent(c)
            out.append(c.window)
        return out

    def render(self) -> str:
        return serialize_series(self)

    def __repr__(self):
        return f"TruncatedSeries(order={self.order}, coeffs={list(self.coeffs)!r})"


def _as_laurent(c) -> Laurent:
    if isinstance(c, Laurent):
        return c
    if isinstance(c, _SCALARS):
        return Laurent(c)
    if isinstance(c, RationalFunction):
        lp = c.to_laurent()
        if lp is not None:
            return lp
    raise TypeError(f"coefficient {c!r} is not a Laurent polynomial in y")


def as_laurent_series(s: TruncatedSeries) -> TruncatedSeries:
    return s.map(_as_laurent)


def invert(a: TruncatedSeries) -> TruncatedSeries:
    return a.inverse()


# ---------------------------------------------------------------------------
# theta builders


def _mul_binomial(coeffs: list, shift: int, mono: Laurent, limit: int) -> None:
    """In place: coeffs *= (1 - q**shift * mono), truncated at q**limit."""
    for i in range(limit, shift - 1, -1):
        src = coeffs[i - shift]
        if src:
            coeffs[i] = coeffs[i] - src * mono


def theta_tilde(N: int) -> TruncatedSeries:
    """prod_{j>=1} (1 - q^(j-1) y)(1 - q^j / y) modulo q^(N+1)."""
    if N < 0:
        raise ValueError("order must be non-negative")
    coeffs = [Laurent(1)] + [Laurent() for _ in range(N)]
    y, yinv = Laurent.y(1), Laurent.y(-1)
    for j in range(1, N + 2):
        if j - 1 <= N:
            _mul_binomial(coeffs, j - 1, y, N)
        if j <= N:
            _mul_binomial(coeffs, j, yinv, N)
    return TruncatedSeries(coeffs, N)


def theta_plus(N: int) -> TruncatedSeries:
    """prod_{j>=1} (1 - q^j y)(1 - q^j / y) modulo q^(N+1)."""
    if N < 0:
        raise ValueError("order must be non-negative")
    coeffs = [Laurent(1)] + [Laurent() for _ in range(N)]
    y, yinv = Laurent.y(1), Laurent.y(-1)
    for j in range(1, N + 1):
        _mul_binomial(coeffs, j, y, N)
        _mul_binomial(coeffs, j, yinv, N)
    return TruncatedSeries(coeffs, N)


def g_series(N: int, method: str = "quotient") -> TruncatedSeries:
    """G(q, y) = theta_tilde(q, y) / theta_plus(q, 1) modulo q^(N+1).

    ``method="quotient"`` divides the two theta series; ``method="product"``
    expands prod (1 - q^(j-1) y)(1 - q^j/y) / (1 - q^j)^2 factor by factor,
    multiplying by geometric series instead of inverting anything.
    """
    if method == "quotient":
        den = specialize(theta_plus(N), y=1).map(Laurent)
        return theta_tilde(N) * den.inverse()
    if method == "product":
        coeffs = list(theta_tilde(N).coeffs)
        for j in range(1, N + 1):
            for _ in range(2):
                # multiply by 1/(1 - q^j) = sum_k q^(jk): running prefix sums with stride j
                for i in range(j, N + 1):
                    coeffs[i] = coeffs[i] + coeffs[i - j]
        return TruncatedSeries(coeffs, N)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# substitutions


def shift_y(s: TruncatedSeries, k: int = 1) -> tuple[TruncatedSeries, int]:
    """Substitute y -> q^k y and report the order up to which the result is certified.

    A monomial q^m y^p lands on q^(m + k p). Negative p pulls coefficients down
    from orders above the truncation, which are unknown. The certificate assumes
    that past the truncation the deepest negative y-power grows by at most one
    per k q-orders (true for products of theta functions, whose lowest y-power
    at order m grows like sqrt(2m)), and that a series with no negative y-power
    anywhere in its known range has none beyond it either.
    """
    if k < 1:
        raise ValueError("only positive shifts are supported")
    s = as_laurent_series(s)
    N = s.order
    windows = s.ydeg_window
    depth = [max(0, -w[0]) if w else 0 for w in windows]
    if any(depth):
        M = N - k * depth[N] - 1
    else:
        M = N
    if M < 0:
        raise EmptyVerifiableRange(
            f"y-window at q^{N} (depth {depth[N]}) leaves no certifiable order"
        )
    rows: list[dict] = [dict() for _ in range(M + 1)]
    for m, c in enumerate(s.coeffs):
        for p, v in c.items():
            target = m + k * p
            if target < 0:
                raise NegativeQPower(f"q^{m} y^{p} maps to q^{target}")
            if target <= M:
                rows[target][p] = rows[target].get(p, 0) + v
    return TruncatedSeries([Laurent(r) for r in rows], M), M


def specialize(s: TruncatedSeries, q=None, y=None):
    """Exact substitution q=0 (returns the q^0 coefficient) or y=value."""
    if (q is None) == (y is None):
        raise ValueError("specify exactly one of q=0 or y=value")
    if q is not None:
        if q != 0:
            raise ValueError("only q=0 is supported")
        return s.coeffs[0]
    value = _frac(y)
    if value == 0:
        raise ValueError("y must be a nonzero rational")

    def ev(c):
        if isinstance(c, _SCALARS):
            return _frac(c)
        return c.evaluate(value)

    return s.map(ev)


def monomial_factor(coeff, exp: int) -> Laurent:
    return Laurent.monomial(coeff, exp)


# ---------------------------------------------------------------------------
# canonical text format


def serialize_series(s: TruncatedSeries) -> str:
    """One line per q-order: ``q^m: <c> <c>*y^p ...`` with y-exponents ascending."""
    lines = []
    for m, c in enumerate(s.coeffs):
        lines.append(f"q^{m}: {_as_laurent(c).render()}")
    return "\n".join(lines) + "\n"


def parse_series(text: str) -> TruncatedSeries:
    coeffs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        head, _, body = line.partition(":")
        if not head.startswith("q^"):
            raise InputError("expected 'q^m:' prefix", lineno, 1)
        try:
            m = int(head[2:])
        except ValueError:
            raise InputError(f"bad q-order {head[2:]!r}", lineno, 3) from None
        if m != len(coeffs):
            raise InputError("orders must be consecutive from 0", lineno, 3)
        try:
            coeffs.append(Laurent.parse(body))
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad coefficient ({exc})", lineno, len(head) + 2) from None
    if not coeffs:
        raise InputError("empty series text")
    return TruncatedSeries(coeffs)
