"""Truncated jet algebras and log jet algebras of a coordinate chart.

Symbols are ``(kind, index, order)`` with kind ``"g"`` (gamma) or ``"l"``
(ell); ``order`` counts unnormalized derivatives. In the log jet algebra of
(d, r, K) the normal form keeps gamma_i only at order 0 for i <= r, since

    D^k gamma_i = gamma_i * Y_k(ell_i, D ell_i, ...),   Y_0 = 1,  Y_{k+1} = ell_i Y_k + D Y_k,

the Y_k being complete Bell polynomials. Jet orders never exceed K; a
derivation that would go past K raises JetTruncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Mapping, Sequence

from ._linalg import SparseEchelon
from ._poly import Poly
from .errors import InputError, JetTruncation, NotDivisorial, NotTangent

_KIND_ORDER = {"g": 0, "l": 1}


def _sym_key(sym):
    kind, i, k = sym
    return (_KIND_ORDER[kind], i, k)


def _mono(factors: Mapping) -> tuple:
    return tuple(sorted(((s, e) for s, e in factors.items() if e), key=lambda t: _sym_key(t[0])))


def render_symbol(sym) -> str:
    kind, i, k = sym
    name = ("gamma" if kind == "g" else "ell") + str(i)
    if k == 0:
        return name
    return f"D({name})" if k == 1 else f"D^{k}({name})"


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class DiffPoly:
    """Polynomial in jet symbols with rational coefficients: {monomial: Fraction}."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        self.terms = {m: Fraction(c) for m, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, c) -> "DiffPoly":
        return cls({(): c})

    @classmethod
    def sym(cls, sym, exponent: int = 1) -> "DiffPoly":
        return cls({_mono({sym: exponent}): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        other = _lift(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return DiffPoly(t)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, DiffPoly):
            return DiffPoly({m: c * other for m, c in self.terms.items()})
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                f = dict(m1)
                for s, e in m2:
                    f[s] = f.get(s, 0) + e
                m = _mono(f)
                t[m] = t.get(m, 0) + c1 * c2
        return DiffPoly(t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise ValueError("only monomials have negative powers")
            ((m, c),) = self.terms.items()
            return DiffPoly({_mono({s: e * n for s, e in m}): Fraction(c) ** n})
        out = DiffPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, DiffPoly):
            try:
                other = _lift(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def symbols(self) -> set:
        return {s for m in self.terms for s, _ in m}

    def max_order(self) -> int:
        return max((s[2] for s in self.symbols()), default=0)

    def substitute(self, images: Mapping) -> "DiffPoly":
        """Replace symbols by DiffPolys (symbols not in ``images`` are kept)."""
        out = DiffPoly()
        for m, c in self.terms.items():
            term = DiffPoly.const(c)
            for s, e in m:
                term = term * (images[s] ** e if s in images else DiffPoly.sym(s, e))
            out = out + term
        return out

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), key=lambda t: [(_sym_key(s), e) for s, e in t[0]]):
            body = " ".join(render_symbol(s) + (f"^{e}" if e != 1 else "") for s, e in m)
            if not body:
                parts.append(_fmt(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{_fmt(c)} {body}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"DiffPoly({self.render()})"


def _lift(x) -> DiffPoly:
    if isinstance(x, DiffPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return DiffPoly.const(x)
    raise TypeError(f"cannot use {type(x).__name__} as a DiffPoly")


# ---------------------------------------------------------------------------


@dataclass
class LogJetAlgebra:
    """Jets of the chart with coordinates gamma_1..gamma_d along gamma_1 ... gamma_r = 0."""

    d: int
    r: int
    K: int
    localized: tuple = ()  # indices whose gamma is inverted (open-chart comparisons only)
    _bell: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.d < 1 or self.K < 0 or not 0 <= self.r <= self.d:
            raise InputError(f"need d >= 1, K >= 0, 0 <= r <= d (got d={self.d}, r={self.r}, K={self.K})")
        for i in self.localized:
            if not 1 <= i <= self.d:
                raise InputError(f"cannot localize index {i}")

    # -- symbols -------------------------------------------------------------

    def is_log(self, i: int) -> bool:
        return i <= self.r

    def symbols(self) -> list:
        """Normal-form symbols, ordered."""
        out = []
        for i in range(1, self.d + 1):
            if self.is_log(i):
                out.append(("g", i, 0))
            else:
                out.extend(("g", i, k) for k in range(self.K + 1))
        for i in range(1, self.r + 1):
            out.extend(("l", i, k) for k in range(self.K + 1))
        return out

    def weight(self, sym) -> int:
        """Conformal weight: gamma^(k) has weight k, ell^(k) has weight k + 1."""
        kind, _, k = sym
        return k + (1 if kind == "l" else 0)

    def _check_symbol(self, sym):
        kind, i, k = sym
        if not 1 <= i <= self.d or k < 0:
            raise InputError(f"no symbol {render_symbol(sym)} in d={self.d}")
        if kind == "l" and i > self.r:
            raise InputError(f"ell{i} exists only for indices up to r={self.r}")
        if k > self.K:
            raise JetTruncation(f"{render_symbol(sym)} exceeds truncation K={self.K}")

    def gamma(self, i: int, k: int = 0) -> DiffPoly:
        return self.normal_form(DiffPoly.sym(("g", i, k)))

    def ell(self, i: int, k: int = 0) -> DiffPoly:
        return self.normal_form(DiffPoly.sym(("l", i, k)))

    def bell(self, i: int, k: int) -> DiffPoly:
        """Y_k in ell_i and its derivatives, so that D^k gamma_i = gamma_i Y_k."""
        key = (i, k)
        if key not in self._bell:
            if k == 0:
                val = DiffPoly.const(1)
            else:
                prev = self.bell(i, k - 1)
                val = DiffPoly.sym(("l", i, 0)) * prev + self._derive_normal(prev)
            self._bell[key] = val
        return self._bell[key]

    # -- normal form and derivation -----------------------------------------

    def normal_form(self, p: DiffPoly) -> DiffPoly:
        images = {}
        for s in p.symbols():
            self._check_symbol(s)
            kind, i, k = s
            if kind == "g" and self.is_log(i) and k > 0:
                images[s] = DiffPoly.sym(("g", i, 0)) * self.bell(i, k)
        for m in p.terms:
            for s, e in m:
                if e < 0 and not (s[0] == "g" and s[2] == 0 and s[1] in self.localized):
                    raise InputError(f"negative power of {render_symbol(s)} in a non-localized algebra")
        return p.substitute(images) if images else p

    def is_normal(self, p: DiffPoly) -> bool:
        return all(not (s[0] == "g" and self.is_log(s[1]) and s[2] > 0) for s in p.symbols())

    def symbol_derivative(self, sym) -> DiffPoly:
        kind, i, k = sym
        if kind == "g" and self.is_log(i):
            if k != 0:
                raise InputError(f"{render_symbol(sym)} is not in normal form")
            return DiffPoly.sym(("g", i, 0)) * DiffPoly.sym(("l", i, 0))
        if k + 1 > self.K:
            raise JetTruncation(f"D({render_symbol(sym)}) exceeds truncation K={self.K}")
        return DiffPoly.sym((kind, i, k + 1))

    def _derive_normal(self, p: DiffPoly) -> DiffPoly:
        out = DiffPoly()
        cache: dict = {}
        for m, c in p.terms.items():
            for idx, (s, e) in enumerate(m):
                if s not in cache:
                    cache[s] = self.symbol_derivative(s)
                rest = dict(m)
                rest[s] = e - 1
                out = out + DiffPoly({_mono(rest): c * e}) * cache[s]
        return out

    def derivative(self, p: DiffPoly, times: int = 1) -> DiffPoly:
        p = self.normal_form(p)
        for _ in range(times):
            p = self._derive_normal(p)
        return p

    def mode(self, p: DiffPoly, n: int) -> DiffPoly:
        """The n-th mode p(n) = D^n p / n!, so that D p(n) = (n + 1) p(n + 1)."""
        return self.derivative(p, n) * Fraction(1, factorial(n))

    def derivation_table(self) -> list:
        """[(symbol, image or None when truncated)] over normal-form symbols."""
        out = []
        for s in self.symbols():
            try:
                out.append((s, self.symbol_derivative(s)))
            except JetTruncation:
                out.append((s, None))
        return out

    def rewrite_rules(self) -> list:
        """[(eliminated symbol, normal form)] for gamma_i^(k), i <= r, 1 <= k <= K."""
        return [
            (("g", i, k), self.gamma(i, k))
            for i in range(1, self.r + 1)
            for k in range(1, self.K + 1)
        ]

    def render(self) -> str:
        head = "jet algebra" if self.r == 0 else "log jet algebra"
        lines = [f"{head} d={self.d} r={self.r} K={self.K}"]
        lines.append("generators: " + " ".join(render_symbol(s) for s in self.symbols()))
        rules = self.rewrite_rules()
        lines.append("relations:" + ("" if rules else " none"))
        for s, v in rules:
            lines.append(f"  {render_symbol(s)} = {v.render()}")
        lines.append("derivation:")
        for s, v in self.derivation_table():
            lines.append(f"  D {render_symbol(s)} = {'truncated' if v is None else v.render()}")
        return "\n".join(lines) + "\n"


def jet_algebra(d: int, K: int, localized: Sequence[int] = ()) -> LogJetAlgebra:
    return LogJetAlgebra(d, 0, K, tuple(localized))


def log_jet_algebra(d: int, r: int, K: int) -> LogJetAlgebra:
    return LogJetAlgebra(d, r, K)


def rewrite_step(A: LogJetAlgebra, p: DiffPoly, choice: int = 0) -> DiffPoly | None:
    """One Leibniz rewrite gamma_i^(k) -> sum_j C(k-1, j) gamma_i^(j) ell_i^(k-1-j).

    ``choice`` selects which occurrence (among terms and factors) to rewrite.
    Returns None when p is already normal.
    """
    sites = [
        (m, s)
        for m in sorted(p.terms, key=lambda m: [(_sym_key(s), e) for s, e in m])
        for s, _ in m
        if s[0] == "g" and A.is_log(s[1]) and s[2] > 0
    ]
    if not sites:
        return None
    m, s = sites[choice % len(sites)]
    _, i, k = s
    rule = DiffPoly()
    for j in range(k):
        rule = rule + DiffPoly.sym(("g", i, j)) * DiffPoly.sym(("l", i, k - 1 - j)) * comb(k - 1, j)
    c = p.terms[m]
    rest = dict(m)
    rest[s] -= 1
    rest_terms = dict(p.terms)
    del rest_terms[m]
    return DiffPoly(rest_terms) + DiffPoly({_mono(rest): c}) * rule


# ---------------------------------------------------------------------------
# ideals and associated variety


def _monomial_exponents(p: DiffPoly):
    if len(p.terms) != 1:
        return None
    ((m, _),) = p.terms.items()
    return dict(m)


def _divides(a: dict, b: dict) -> bool:
    return all(b.get(s, 0) >= e for s, e in a.items())


def in_monomial_ideal(p: DiffPoly, gens: Sequence[dict]) -> bool:
    return all(any(_divides(g, dict(m)) for g in gens) for m in p.terms)


def ideal_stability_check(A: LogJetAlgebra, generators: Sequence[DiffPoly] | None = None) -> bool:
    """Whether D maps the ideal spanned by monomial generators into itself.

    By the Leibniz rule D(g h) = D(g) h + g D(h), so it suffices to test D(g)
    for each generator g. The default generators are gamma_i, i <= r.
    """
    if generators is None:
        generators = [A.gamma(i) for i in range(1, A.r + 1)]
    gens = []
    for g in generators:
        g = A.normal_form(g)
        e = _monomial_exponents(g)
        if e is None:
            raise InputError("ideal generators must be monomials")
        gens.append(e)
    for g in generators:
        if not in_monomial_ideal(A.derivative(g), gens):
            return False
    return True


@dataclass
class Presentation:
    generators: list  # symbols
    relations: list  # DiffPolys
    weights: dict  # symbol -> weight under the contracting grading

    def render(self) -> str:
        gens = ", ".join(render_symbol(s) for s in self.generators)
        rels = ", ".join(r.render().replace(" ", "*") for r in self.relations)
        out = f"<{gens} | {rels}>"
        wts = " ".join(f"{render_symbol(s)}:{w}" for s, w in self.weights.items())
        return out + f"\nweights: {wts}\n"


def assvar_presentation(A: LogJetAlgebra) -> Presentation:
    """Order-0 ring modulo the ideal generated by all D(symbol).

    Every positive-order symbol is itself a derivative, hence lies in that
    ideal, so the quotient is the order-0 ring modulo the order-0 parts of the
    derivatives of order-0 symbols.
    """
    order0 = [s for s in A.symbols() if s[2] == 0]
    rels = []
    seen = SparseEchelon()
    for s in order0:
        try:
            img = A.symbol_derivative(s)
        except JetTruncation:
            continue  # a positive-order symbol, killed in the quotient
        proj = DiffPoly({m: c for m, c in img.terms.items() if all(t[2] == 0 for t, _ in m)})
        if not proj.is_zero() and seen.add(proj.terms):
            rels.append(proj)
    weights = {s: A.weight(s) for s in order0}
    return Presentation(order0, rels, weights)


# ---------------------------------------------------------------------------
# arcs


def _series_mul(a: Sequence, b: Sequence, n: int) -> list:
    out = [Fraction(0)] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


def _series_inv(a: Sequence, n: int) -> list:
    out = [Fraction(0)] * n
    out[0] = 1 / Fraction(a[0])
    for k in range(1, n):
        s = sum((Fraction(a[j]) * out[k - j] for j in range(1, min(k, len(a) - 1) + 1)), Fraction(0))
        out[k] = -s * out[0]
    return out


def _series_deriv(a: Sequence) -> list:
    return [Fraction(k) * a[k] for k in range(1, len(a))]


@dataclass
class LogArc:
    phi: list  # d coefficient lists, t^0..t^K
    psi: list  # r entries: coefficient list (determined) or None (free)
    free_parameters: int

    @property
    def unique(self) -> bool:
        return self.free_parameters == 0

    def check(self, choice: Sequence | None = None) -> bool:
        """d phi^*(gamma_i) = psi_i phi^*(gamma_i) through t^K, free psi set from ``choice``."""
        K = len(self.phi[0]) - 1
        for i, ps in enumerate(self.psi):
            if ps is None:
                ps = list(choice) if choice is not None else [Fraction(0)] * (K + 1)
            f = self.phi[i]
            lhs = _series_deriv(f) + [Fraction(0)]
            if lhs != _series_mul(ps, f, K + 1):
                return False
        return True


@dataclass
class NoLift:
    index: int
    reason: str

    def __bool__(self):
        return False


def lift_arc(phi: Sequence[Sequence], A: LogJetAlgebra) -> LogArc | NoLift:
    """Lift a truncated arc (d coefficient lists t^0..t^K) to the log jet space.

    The arc is read as the polynomial arc it spells out, so the lifting
    condition d phi^* gamma_i = psi_i phi^* gamma_i is solved through t^K.
    """
    K = A.K
    phi = [[Fraction(x) for x in f] for f in phi]
    if len(phi) != A.d:
        raise InputError(f"arc has {len(phi)} components, expected {A.d}")
    phi = [(f + [Fraction(0)] * (K + 1))[: K + 1] for f in phi]
    psi: list = []
    free = 0
    for i in range(A.r):
        f = phi[i]
        if f[0] != 0:
            df = _series_deriv(f) + [Fraction(0)]
            psi.append(_series_mul(df, _series_inv(f, K + 1), K + 1))
        elif all(x == 0 for x in f):
            psi.append(None)
            free += K + 1
        else:
            m = next(k for k, x in enumerate(f) if x)
            return NoLift(i + 1, f"phi^*(gamma{i + 1}) has a zero of order {m} without vanishing identically")
    return LogArc(phi, psi, free)


# ---------------------------------------------------------------------------
# universal property of log jets at truncated order


@dataclass
class ChartData:
    """A polynomial chart: variables, a divisor (variable indices) and a derivation.

    ``derivation[k]`` is the image of variable k, or None if it is not
    available (a truncated jet symbol).
    """

    names: list
    divisor: tuple
    derivation: list

    @property
    def n(self) -> int:
        return len(self.names)

    def var(self, k: int) -> Poly:
        return Poly.var(self.n, k)


def chart_of(A: LogJetAlgebra) -> ChartData:
    """The log jet algebra itself as chart data, with its own derivation."""
    syms = A.symbols()
    index = {s: k for k, s in enumerate(syms)}
    der = []
    for s, img in A.derivation_table():
        der.append(None if img is None else _to_poly(img, index))
    divisor = tuple(index[("g", i, 0)] for i in range(1, A.r + 1))
    return ChartData([render_symbol(s) for s in syms], divisor, der)


def _to_poly(p: DiffPoly, index: Mapping) -> Poly:
    n = len(index)
    terms = {}
    for m, c in p.terms.items():
        e = [0] * n
        for s, x in m:
            e[index[s]] = x
        terms[tuple(e)] = c
    return Poly(n, terms)


def _low_degree(p: Poly) -> int | None:
    r = p.degree_range()
    return None if r is None else r[0]


def _apply_derivation(Y: ChartData, p: Poly) -> Poly:
    out = Poly(Y.n)
    for k in range(Y.n):
        dp = p.partial(k)
        if dp.is_zero():
            continue
        if Y.derivation[k] is None:
            raise JetTruncation(f"derivation of {Y.names[k]} is not available")
        out = out + dp.mul(Y.derivation[k])
    return out


def _precision_loss(Y: ChartData) -> int:
    """How far one application of the derivation can lower total degree."""
    loss = 0
    for img in Y.derivation:
        if img is None or img.is_zero():
            continue
        loss = max(loss, 1 - _low_degree(img))
    return loss


@dataclass
class ExtensionMap:
    images: dict  # algebra symbol -> (Poly, precision or None if exact)
    chart: ChartData
    unique: bool

    def image(self, sym) -> Poly:
        return self.images[sym][0]

    def render(self) -> str:
        lines = []
        for s, (p, prec) in self.images.items():
            tail = "" if prec is None else f"  (exact through degree {prec})"
            lines.append(f"{render_symbol(s)} -> {_render_poly(p, self.chart.names)}{tail}")
        lines.append(f"unique: {'yes' if self.unique else 'no'}")
        return "\n".join(lines) + "\n"


def _render_poly(p: Poly, names) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for e, c in sorted(p.terms.items(), key=lambda t: (sum(t[0]), tuple(-x for x in t[0]))):
        body = " ".join(names[k] + (f"^{x}" if x != 1 else "") for k, x in enumerate(e) if x)
        if not body:
            parts.append(_fmt(c))
        else:
            parts.append(body if c == 1 else ("-" + body if c == -1 else f"{_fmt(c)} {body}"))
    return " + ".join(parts).replace("+ -", "- ")


def _split_divisorial(Y: ChartData, f: Poly, i: int):
    """f = m * v with m a monomial in divisor variables and v(0) != 0."""
    if f.is_zero():
        raise NotDivisorial(f"image of gamma{i} is zero")
    low = [min(e[k] for e in f.terms) for k in range(Y.n)]
    for k, x in enumerate(low):
        if x and k not in Y.divisor:
            raise NotDivisorial(f"image of gamma{i} vanishes along {Y.names[k]}, which is not in the divisor")
    m = tuple(low)
    v = Poly(Y.n, {tuple(a - b for a, b in zip(e, m)): c for e, c in f.terms.items()})
    if v.constant() == 0:
        raise NotDivisorial(f"image of gamma{i} is not a monomial times a unit")
    return m, v


def _unknown_monomials(n: int, max_degree: int) -> list:
    out = [()]
    for _ in range(n):
        out = [e + (x,) for e in out for x in range(max_degree + 1) if sum(e) + x <= max_degree]
    return [e for e in out if sum(e) <= max_degree]


def _solution_is_unique(f: Poly, target: Poly, candidate: Poly, max_degree: int) -> bool:
    """Check f * X = target through the degrees that X up to max_degree controls.

    The map X -> f X (restricted to X of degree <= max_degree, observed in
    degrees <= max_degree + lowdeg(f)) must be injective, and the candidate must
    solve it.
    """
    top = max_degree + _low_degree(f)
    lhs = f.mul(candidate.truncate(max_degree), top)
    if lhs != target.truncate(top):
        return False
    ech = SparseEchelon()
    cols = _unknown_monomials(f.nvars, max_degree)
    for e in cols:
        col = f.mul(Poly(f.nvars, {e: 1}), top)
        if not ech.add(col.terms):
            return False
    return ech.rank == len(cols)


def universal_extension(Y: ChartData, f: Sequence[Poly], A: LogJetAlgebra, K: int | None = None) -> ExtensionMap:
    """The derivation-compatible extension of f: O(X) -> O(Y) to the log jets.

    gamma_i^(k) goes to D_Y^k f(gamma_i) and ell_i^(k) to D_Y^k (D_Y f_i / f_i).
    Power series in Y are kept through total degree K, with the precision of
    every image tracked.
    """
    K = A.K if K is None else K
    if len(f) != A.d:
        raise InputError(f"need {A.d} images, got {len(f)}")
    for k in Y.divisor:
        img = Y.derivation[k]
        if img is None:
            continue
        if not in_poly_monomial_ideal(img, k):
            raise NotTangent(f"D_Y does not preserve the divisor component {Y.names[k]}")
    loss = _precision_loss(Y)
    images: dict = {}
    unique = True
    for i in range(1, A.d + 1):
        fi = f[i - 1]
        if A.is_log(i):
            m, v = _split_divisorial(Y, fi, i)
            dfi = _apply_derivation(Y, fi)
            quotient = {}
            for e, c in dfi.terms.items():
                q = tuple(a - b for a, b in zip(e, m))
                if any(x < 0 for x in q):
                    raise NotTangent(f"D_Y f(gamma{i}) is not divisible by f(gamma{i})")
                quotient[q] = c
            exact_unit = v.degree_range() == (0, 0)
            vinv = v.inverse_unit(K)
            h = Poly(Y.n, quotient).mul(vinv, None if exact_unit else K)
            prec = None if exact_unit else K
            unique = unique and _solution_is_unique(fi, dfi, h, K)
            images[("g", i, 0)] = (fi, None)
            cur, cp = h, prec
            for k in range(A.K + 1):
                images[("l", i, k)] = (cur if cp is None else cur.truncate(cp), cp)
                if k == A.K:
                    break
                try:
                    cur = _apply_derivation(Y, cur)
                except JetTruncation:
                    break
                cp = None if cp is None else cp - loss
        else:
            cur, cp = fi, None
            for k in range(A.K + 1):
                images[("g", i, k)] = (cur, cp)
                if k == A.K:
                    break
                try:
                    cur = _apply_derivation(Y, cur)
                except JetTruncation:
                    break
    return ExtensionMap(images, Y, unique)


def in_poly_monomial_ideal(p: Poly, k: int) -> bool:
    """Whether the variable with index k divides every term of p."""
    return all(e[k] >= 1 for e in p.terms)


def check_compatibility(ext: ExtensionMap, A: LogJetAlgebra) -> bool:
    """The images satisfy every relation D(s) = image of the derivation table."""
    Y = ext.chart
    for s, img in A.derivation_table():
        if img is None or s not in ext.images:
            continue
        p, prec = ext.images[s]
        try:
            lhs = _apply_derivation(Y, p)
        except JetTruncation:
            continue
        rhs = _image_of(img, ext)
        if rhs is None:
            continue
        rhs_poly, rprec = rhs
        bound = [x for x in (prec, rprec) if x is not None]
        if bound:
            cut = min(bound) - _precision_loss(Y)
            if lhs.truncate(cut) != rhs_poly.truncate(cut):
                return False
        elif lhs != rhs_poly:
            return False
    return True


def _image_of(p: DiffPoly, ext: ExtensionMap):
    out = Poly(ext.chart.n)
    prec = None
    for m, c in p.terms.items():
        term = Poly.const(ext.chart.n, c)
        for s, e in m:
            if s not in ext.images:
                return None
            img, pr = ext.images[s]
            term = term.mul(img.power(e, 10**6) if e > 0 else img)
            if pr is not None:
                prec = pr if prec is None else min(prec, pr)
        out = out + term
    return out, prec


def identity_chart_extension(A: LogJetAlgebra) -> tuple[ExtensionMap, bool]:
    """Extension of the identity chart map; returns it with whether it is the identity."""
    Y = chart_of(A)
    syms = A.symbols()
    index = {s: k for k, s in enumerate(syms)}
    f = [Y.var(index[("g", i, 0)]) for i in range(1, A.d + 1)]
    ext = universal_extension(Y, f, A)
    is_identity = all(
        ext.images.get(s, (None,))[0] == Y.var(index[s]) for s in syms
    )
    return ext, is_identity


# ---------------------------------------------------------------------------
# the open chart: ell_i -> D gamma_i / gamma_i


def open_chart_maps(A: LogJetAlgebra):
    """Mutually inverse maps between log jets and jets with gamma_1..gamma_r inverted.

    Returns (to_plain, to_log, plain), symbol substitution tables and the
    localized plain jet algebra. ell_i^(K) is omitted from to_plain since its
    image needs gamma_i^(K+1).
    """
    plain = jet_algebra(A.d, A.K, localized=tuple(range(1, A.r + 1)))
    to_plain = {}
    for s in A.symbols():
        kind, i, k = s
        if kind == "g":
            to_plain[s] = plain.gamma(i, k)
        elif k < A.K:
            base = plain.gamma(i, 1) * DiffPoly.sym(("g", i, 0), -1)
            to_plain[s] = plain.derivative(base, k)
    to_log = {s: A.gamma(s[1], s[2]) for s in plain.symbols()}
    return to_plain, to_log, plain


def open_chart_isomorphism(A: LogJetAlgebra) -> bool:
    """Both composites are the identity on every generator where they are defined."""
    to_plain, to_log, plain = open_chart_maps(A)
    for s, img in to_plain.items():
        if img.substitute(to_log) != DiffPoly.sym(s):
            return False
    for s, img in to_log.items():
        if img.symbols() <= set(to_plain) and img.substitute(to_plain) != DiffPoly.sym(s):
            return False
    return True


# ---------------------------------------------------------------------------
# log forms on log jets against the classical c-gamma span


@dataclass
class GradeComparison:
    grade: tuple  # (weight, fermion number, charge)
    jet_dimension: int
    image_rank: int
    vertex_rank: int
    joint_rank: int  # rank of both spans together; equal ranks alone do not give equal spans

    @property
    def matches(self) -> bool:
        return self.jet_dimension == self.image_rank == self.vertex_rank == self.joint_rank


def _multisets(items: Sequence, max_weight: int, max_charge: int):
    """Products of items (label, weight, fermion, charge, odd), odd items at most once."""
    out = []

    def rec(start, chosen, w, f, ch):
        out.append((tuple(chosen), (w, f, ch)))
        for k in range(start, len(items)):
            _, iw, ifn, ich, odd = items[k]
            nw = w + iw
            nch = tuple(a + b for a, b in zip(ch, ich))
            if nw > max_weight or any(x > max_charge for x in nch):
                continue
            rec(k + 1 if odd else k, chosen + [k], nw, f + ifn, nch)

    rec(0, [], 0, 0, (0,) * len(items[0][3]) if items else ())
    return out


def classical_comparison(d: int, r: int, max_weight: int = 2, max_charge: int = 2) -> list:
    """Compare log forms on log jets with the classical span of the c-gamma log generators.

    Jet side: monomials in gamma_i (i <= r), ell_i^(k), gamma_j^(k) (j > r) and
    the log forms dlog gamma_i, d ell_i^(k), d gamma_j^(k). Each maps to a
    commutative product in the localized c-gamma system (ell -> D gamma/gamma,
    d -> c). The vertex side spans products of derivatives of gamma, D gamma/gamma,
    c/gamma (i <= r) and gamma, c (j > r). Per grade, the image of the jet
    basis must be independent and span the vertex side.
    """
    from .vertex.engine import nop
    from .vertex.states import GAMMA, C, VState

    K = max_weight
    unit = tuple([0] * d)

    def charge(i):
        return tuple(1 if k == i - 1 else 0 for k in range(d))

    def sym(kind, i, order=0):
        return VState.symbol(d, r, kind, i, order)

    def inv(i):
        return VState.gamma_power(d, r, i, -1)

    def prod(*states):
        return nop(*states, classical=True)

    jet_items = []
    for i in range(1, d + 1):
        g = sym(GAMMA, i)
        if i <= r:
            jet_items.append((prod(g), 0, 0, charge(i), False))
            ell = prod(sym(GAMMA, i, 1), inv(i))
            dlog = prod(sym(C, i), inv(i))
            jet_items.append((dlog, 0, 1, unit, True))
            for k in range(K):
                jet_items.append((ell.derivative(k), k + 1, 0, unit, False))
                jet_items.append((dlog.derivative(k + 1), k + 1, 1, unit, True))
        else:
            for k in range(K + 1):
                jet_items.append((sym(GAMMA, i, k), k, 0, charge(i), False))
                jet_items.append((sym(C, i, k), k, 1, charge(i), True))

    vertex_items = []
    for i in range(1, d + 1):
        if i <= r:
            gens = [
                (sym(GAMMA, i), charge(i), False),
                (prod(sym(GAMMA, i, 1), inv(i)), unit, False),
                (prod(sym(C, i), inv(i)), unit, True),
            ]
        else:
            gens = [(sym(GAMMA, i), charge(i), False), (sym(C, i), charge(i), True)]
        for s, ch, odd in gens:
            for k in range(K + 1):
                ds = s.derivative(k)
                if ds.is_zero():
                    continue
                w = ds.homogeneous_weight()
                if w > K:
                    break
                vertex_items.append((ds, w, 1 if odd else 0, ch, odd))

    def spans(items):
        groups: dict = {}
        for chosen, grade in _multisets(items, max_weight, max_charge):
            state = prod(*[items[k][0] for k in chosen]) if chosen else VState.vacuum(d, r)
            groups.setdefault(grade, []).append(state)
        return groups

    jet = spans(jet_items)
    vert = spans(vertex_items)
    out = []
    for grade in sorted(set(jet) | set(vert)):
        states = jet.get(grade, [])
        e1 = SparseEchelon()
        for s in states:
            e1.add(s.terms)
        image_rank = e1.rank
        e2 = SparseEchelon()
        for s in vert.get(grade, []):
            e2.add(s.terms)
            e1.add(s.terms)
        out.append(GradeComparison(grade, len(states), image_rank, e2.rank, e1.rank))
    return out
