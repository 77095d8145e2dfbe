"""Independent oracles for the test suite.

Nothing here imports the package under test except to convert its outputs;
the values are produced by sympy or by small standalone evaluators.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction

import sympy as sp

q, y, x = sp.symbols("q y x")


# ---------------------------------------------------------------------------
# q-series via sympy


def _truncated_expand(expr, N):
    """Expand in q and keep q^0..q^N as {(m, p): Fraction}."""
    poly = sp.expand(expr)
    out = {}
    for term in sp.Add.make_args(poly):
        c, rest = term.as_coeff_Mul()
        powers = rest.as_powers_dict()
        m = int(powers.get(q, 0))
        p = int(powers.get(y, 0))
        if m <= N:
            out[(m, p)] = out.get((m, p), Fraction(0)) + Fraction(int(c.p), int(c.q))
    return {k: v for k, v in out.items() if v}


def _mul_trunc(a: dict, b: dict, N: int) -> dict:
    out: dict = {}
    for (m1, p1), c1 in a.items():
        for (m2, p2), c2 in b.items():
            if m1 + m2 <= N:
                k = (m1 + m2, p1 + p2)
                out[k] = out.get(k, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


z = sp.symbols("z")  # stands for 1/y inside sympy polynomials


def _poly_trunc(p: sp.Poly, N: int) -> sp.Poly:
    return sp.Poly.from_dict({m: c for m, c in p.as_dict().items() if m[0] <= N}, *p.gens)


def _poly_to_dict(p: sp.Poly) -> dict:
    out: dict = {}
    for (m, a, b), c in p.as_dict().items():
        k = (m, a - b)
        out[k] = out.get(k, Fraction(0)) + Fraction(int(c.p), int(c.q))
    return {k: v for k, v in out.items() if v}


def theta_tilde_oracle(N: int) -> dict:
    """prod_{j>=1} (1 - q^(j-1) y)(1 - q^j / y) through q^N, by sympy polynomial products."""
    acc = sp.Poly(1, q, y, z)
    for j in range(1, N + 2):
        acc = _poly_trunc(acc * sp.Poly((1 - q ** (j - 1) * y) * (1 - q**j * z), q, y, z), N)
    return _poly_to_dict(acc)


def g_oracle(N: int) -> dict:
    """G = theta_tilde / prod (1 - q^j)^2; 1/(1 - q^j) is expanded as a geometric series."""
    num = theta_tilde_oracle(N)
    inv = sp.Poly(1, q, y, z)
    for j in range(1, N + 1):
        geom = sp.Poly(sum(q ** (j * k) for k in range(N // j + 1)), q, y, z)
        inv = _poly_trunc(inv * geom * geom, N)
    return _mul_trunc(num, _poly_to_dict(inv), N)


def power_oracle(a: dict, k: int, N: int) -> dict:
    out = {(0, 0): Fraction(1)}
    for _ in range(k):
        out = _mul_trunc(out, a, N)
    return out


def series_to_dict(s) -> dict:
    """Convert a package TruncatedSeries with Laurent coefficients to {(m, p): Fraction}."""
    from logchiral.qseries import _as_laurent

    out = {}
    for m, c in enumerate(s.coeffs):
        for p, v in _as_laurent(c).items():
            if v:
                out[(m, p)] = Fraction(v)
    return out


def render_golden(d: dict, N: int) -> str:
    """Canonical text: one line per q-order, ascending y powers, ``c*y^p`` for p != 0."""
    lines = []
    for m in range(N + 1):
        row = sorted((p, c) for (mm, p), c in d.items() if mm == m)
        parts = []
        for p, c in row:
            cs = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
            parts.append(cs if p == 0 else f"{cs}*y^{p}")
        lines.append(f"q^{m}: " + (" ".join(parts) if parts else "0"))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# characteristic classes via sympy


def todd_oracle(n: int) -> list:
    s = sp.series(x / (1 - sp.exp(-x)), x, 0, n + 1).removeO()
    return [Fraction(int(sp.Rational(s.coeff(x, k)).p), int(sp.Rational(s.coeff(x, k)).q)) for k in range(n + 1)]


def chi_y_projective_oracle(d: int, points: int | None = None):
    """chi_y of (P^d, toric boundary) from Hirzebruch's formula, by sympy residues.

    chi_y(X, log D) = int Td(X) ch(Lambda_{-y} Omega(log D)). For toric P^d,
    Omega(log D) is trivial of rank d, so the answer is (1 - y)^d. For P^1
    with k points, Omega(log D) = O(k - 2).
    """
    h = sp.symbols("h")
    if points is None:
        return sp.expand((1 - y) ** d)
    td = sp.expand(sp.series((h / (1 - sp.exp(-h))) ** 2, h, 0, 2).removeO())
    ch = 1 - y * sp.exp((points - 2) * h)
    integrand = sp.expand(sp.series(td * ch, h, 0, 2).removeO())
    return sp.expand(integrand.coeff(h, 1))


# ---------------------------------------------------------------------------
# an independent supercommutative evaluator for the classical limit


class ClassicalPoly:
    """Supercommutative polynomial; a monomial is (even Counter items, odd tuple of names).

    Symbol names are strings like ``"gamma1"``, ``"D2_beta1"``; odd factors are
    kept sorted by name with the Koszul sign tracked explicitly.
    """

    def __init__(self, terms=None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @staticmethod
    def _canon(evens: Counter, odds: list):
        odds = list(odds)
        if len(set(odds)) != len(odds):
            return None, 0
        sign = 1
        for i in range(len(odds)):
            for j in range(i + 1, len(odds)):
                if odds[i] > odds[j]:
                    sign = -sign
        ev = tuple(sorted((k, v) for k, v in evens.items() if v))
        return (ev, tuple(sorted(odds))), sign

    @classmethod
    def monomial(cls, evens: dict, odds: list, coeff=1):
        key, sign = cls._canon(Counter(evens), odds)
        if key is None:
            return cls()
        return cls({key: Fraction(coeff) * sign})

    def __add__(self, other):
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return ClassicalPoly(t)

    def __mul__(self, other):
        if not isinstance(other, ClassicalPoly):
            return ClassicalPoly({k: v * other for k, v in self.terms.items()})
        out = ClassicalPoly()
        for (e1, o1), c1 in self.terms.items():
            for (e2, o2), c2 in other.terms.items():
                ev = Counter(dict(e1))
                ev.update(dict(e2))
                out = out + ClassicalPoly.monomial(ev, list(o1) + list(o2), c1 * c2)
        return out

    def derivative(self):
        out = ClassicalPoly()
        for (ev, od), c in self.terms.items():
            evd = dict(ev)
            for name, n in ev:
                rest = Counter(evd)
                rest[name] -= 1
                rest[_bump(name)] += 1
                out = out + ClassicalPoly.monomial(rest, list(od), c * n)
            for i, name in enumerate(od):
                new = list(od)
                new[i] = _bump(name)
                out = out + ClassicalPoly.monomial(Counter(evd), new, c)
        return out

    def __eq__(self, other):
        return self.terms == other.terms


def _bump(name: str) -> str:
    """D^k name -> D^(k+1) name, with undifferentiated names written plainly."""
    if name.startswith("D"):
        head, base = name[1:].split("_", 1)
        return f"D{int(head) + 1}_{base}"
    return f"D1_{name}"


def from_vstate(s) -> ClassicalPoly:
    """Convert a package state to the oracle representation (engine order -> name order)."""
    from logchiral.vertex.states import KIND_NAMES

    def name(sym):
        kind, idx, order = sym
        base = f"{KIND_NAMES[kind]}{idx}"
        return base if order == 0 else f"D{order}_{base}"

    out = ClassicalPoly()
    for (gexp, evens, odds), c in s.terms.items():
        ev = Counter()
        for i, m in enumerate(gexp):
            if m:
                ev[f"gamma{i + 1}"] += m
        for sym, n in evens:
            ev[name(sym)] += n
        out = out + ClassicalPoly.monomial(ev, [name(o) for o in odds], c)
    return out
