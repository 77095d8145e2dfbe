"""Canonical states of the rank-d bc-beta-gamma system, localized at gamma^1..gamma^r.

A state is a finite linear combination of monomials in the creation symbols
d^k gamma, d^k beta, d^k c, d^k b (here d^k is the k-th derivative, not divided
by k!). Undifferentiated gamma^i may carry any integer exponent for i <= r.

Monomial keys are ``(gexp, evens, odds)``:

* ``gexp``: tuple of d integers, the exponents of undifferentiated gamma^i;
* ``evens``: sorted tuple of ``(symbol, count)`` for d^k gamma (k >= 1) and d^k beta;
* ``odds``: strictly increasing tuple of odd symbols (each appears at most once).

A symbol is ``(kind, index, order)`` with kinds ordered gamma < beta < c < b.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from ..errors import LocalizationMismatch, NonCanonicalInput

GAMMA, BETA, C, B = 0, 1, 2, 3
KIND_NAMES = ("gamma", "beta", "c", "b")
KIND_BY_NAME = {n: i for i, n in enumerate(KIND_NAMES)}
_WEIGHT = (0, 1, 0, 1)
_FERMION = (0, 0, 1, -1)


def is_odd(kind: int) -> bool:
    return kind >= C


def symbol_weight(sym) -> int:
    return _WEIGHT[sym[0]] + sym[2]


def symbol_name(sym) -> str:
    kind, idx, order = sym
    base = f"{KIND_NAMES[kind]}{idx}"
    if order == 0:
        return base
    if order == 1:
        return f"D({base})"
    return f"D^{order}({base})"


def _sort_sign(odds: list):
    """Sort odd symbols, returning (sorted tuple, sign) or None on a repeat."""
    seq = list(odds)
    sign = 1
    # insertion sort counting transpositions
    for i in range(1, len(seq)):
        j = i
        while j > 0 and seq[j - 1] > seq[j]:
            seq[j - 1], seq[j] = seq[j], seq[j - 1]
            sign = -sign
            j -= 1
    for i in range(1, len(seq)):
        if seq[i] == seq[i - 1]:
            return None
    return tuple(seq), sign


def canonicalize(gexp: Iterable[int], evens: Iterable, odds: Iterable):
    """Build a key from loose parts; returns (key, sign) or None if it vanishes.

    ``evens`` is an iterable of symbols (repeats allowed) or (symbol, count) pairs.
    Undifferentiated gamma appearing among ``evens`` is folded into ``gexp``.
    """
    g = list(gexp)
    counts: dict = {}
    for item in evens:
        if len(item) == 2:
            sym, n = item
        else:
            sym, n = item, 1
        if sym[0] == GAMMA and sym[2] == 0:
            g[sym[1] - 1] += n
            continue
        if is_odd(sym[0]):
            raise NonCanonicalInput(f"odd symbol {symbol_name(sym)} among even factors")
        counts[sym] = counts.get(sym, 0) + n
    srt = _sort_sign(odds)
    if srt is None:
        return None
    odd_t, sign = srt
    ev = tuple(sorted((s, n) for s, n in counts.items() if n))
    return (tuple(g), ev, odd_t), sign


def key_weight(key) -> int:
    _, evens, odds = key
    return sum(symbol_weight(s) * n for s, n in evens) + sum(symbol_weight(s) for s in odds)


def key_fermion(key) -> int:
    return sum(_FERMION[s[0]] for s in key[2])


def key_charge(key) -> tuple:
    """Per-index gamma-charge: gamma-type and c count +1, beta and b count -1."""
    gexp, evens, odds = key
    ch = list(gexp)
    for (kind, idx, _), n in evens:
        ch[idx - 1] += n if kind == GAMMA else -n
    for kind, idx, _ in odds:
        ch[idx - 1] += 1 if kind == C else -1
    return tuple(ch)


def key_parity(key) -> int:
    return len(key[2]) % 2


@lru_cache(maxsize=None)
def product_keys(k1, k2):
    """Supercommutative product of two monomials: (key, sign) or None."""
    g = tuple(a + b for a, b in zip(k1[0], k2[0]))
    counts = dict(k1[1])
    for s, n in k2[1]:
        counts[s] = counts.get(s, 0) + n
    ev = tuple(sorted(counts.items()))
    srt = _sort_sign(list(k1[2]) + list(k2[2]))
    if srt is None:
        return None
    odd_t, sign = srt
    return (g, ev, odd_t), sign


@lru_cache(maxsize=None)
def derivative_key(key) -> tuple:
    """The translation operator on one monomial, as a tuple of (key, coeff)."""
    gexp, evens, odds = key
    out: dict = {}

    def add(res, c):
        if res is None or c == 0:
            return
        k, s = res
        out[k] = out.get(k, 0) + c * s

    d = len(gexp)
    for i in range(d):
        m = gexp[i]
        if m:
            g = list(gexp)
            g[i] -= 1
            add(canonicalize(g, list(evens) + [((GAMMA, i + 1, 1), 1)], odds), m)
    for j, (sym, n) in enumerate(evens):
        rest = list(evens)
        rest[j] = (sym, n - 1)
        up = (sym[0], sym[1], sym[2] + 1)
        add(canonicalize(gexp, rest + [(up, 1)], odds), n)
    for j, sym in enumerate(odds):
        new = list(odds)
        new[j] = (sym[0], sym[1], sym[2] + 1)
        add(canonicalize(gexp, evens, new), 1)
    return tuple((k, Fraction(c)) for k, c in out.items() if c)


@lru_cache(maxsize=None)
def derivative_power(key, k: int) -> tuple:
    if k == 0:
        return ((key, Fraction(1)),)
    prev = derivative_power(key, k - 1)
    out: dict = {}
    for k1, c1 in prev:
        for k2, c2 in derivative_key(k1):
            out[k2] = out.get(k2, 0) + c1 * c2
    return tuple((kk, c) for kk, c in out.items() if c)


def render_key(key) -> str:
    gexp, evens, odds = key
    parts = []
    for i, m in enumerate(gexp):
        if m == 1:
            parts.append(f"gamma{i + 1}")
        elif m:
            parts.append(f"gamma{i + 1}^{m}")
    for s, n in evens:
        parts.append(symbol_name(s) + (f"^{n}" if n > 1 else ""))
    parts.extend(symbol_name(s) for s in odds)
    return " ".join(parts) or "vac"


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class VState:
    """A finite sum of canonical monomials with rational coefficients."""

    __slots__ = ("d", "r", "terms")

    def __init__(self, d: int, r: int, terms: Mapping | None = None):
        if not 0 <= r <= d:
            raise LocalizationMismatch(f"localization rank {r} outside 0..{d}")
        self.d = d
        self.r = r
        clean = {}
        for k, c in (terms or {}).items():
            if c:
                if len(k[0]) != d:
                    raise NonCanonicalInput("monomial rank differs from state rank")
                for i, m in enumerate(k[0]):
                    if m < 0 and i + 1 > r:
                        raise LocalizationMismatch(
                            f"gamma{i + 1} is not inverted (localization rank {r})"
                        )
                clean[k] = Fraction(c)
        self.terms = clean

    # -- constructors -------------------------------------------------------
    @classmethod
    def vacuum(cls, d: int, r: int = 0) -> "VState":
        return cls(d, r, {((0,) * d, (), ()): 1})

    @classmethod
    def from_parts(cls, d, r, gexp=None, evens=(), odds=(), coeff=1) -> "VState":
        res = canonicalize(gexp or (0,) * d, evens, odds)
        if res is None:
            return cls(d, r)
        k, s = res
        return cls(d, r, {k: s * Fraction(coeff)})

    @classmethod
    def symbol(cls, d, r, kind: int, index: int, order: int = 0) -> "VState":
        if not 1 <= index <= d:
            raise NonCanonicalInput(f"index {index} outside 1..{d}")
        sym = (kind, index, order)
        if is_odd(kind):
            return cls.from_parts(d, r, odds=[sym])
        return cls.from_parts(d, r, evens=[sym])

    @classmethod
    def gamma_power(cls, d, r, index: int, exponent: int) -> "VState":
        g = [0] * d
        g[index - 1] = exponent
        return cls(d, r, {(tuple(g), (), ()): 1})

    def _like(self, terms) -> "VState":
        return VState(self.d, self.r, terms)

    def zero(self) -> "VState":
        return self._like({})

    # -- linear structure ---------------------------------------------------
    def _check(self, other: "VState"):
        if not isinstance(other, VState):
            raise TypeError("expected a VState")
        if (self.d, self.r) != (other.d, other.r):
            raise LocalizationMismatch(
                f"states over (d={self.d}, r={self.r}) and (d={other.d}, r={other.r})"
            )

    def __add__(self, other):
        if not isinstance(other, VState):
            return NotImplemented
        self._check(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return self._like(t)

    def __sub__(self, other):
        if not isinstance(other, VState):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return self._like({k: -c for k, c in self.terms.items()})

    def __mul__(self, scalar):
        if isinstance(scalar, (int, Fraction)):
            return self._like({k: c * scalar for k, c in self.terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VState):
            return NotImplemented
        return (self.d, self.r) == (other.d, other.r) and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, self.r, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    # -- algebra ------------------------------------------------------------
    def fock_product(self, other: "VState") -> "VState":
        """Supercommutative product of creation monomials (no contractions)."""
        self._check(other)
        out: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                res = product_keys(k1, k2)
                if res is None:
                    continue
                k, s = res
                out[k] = out.get(k, 0) + s * c1 * c2
        return self._like(out)

    def derivative(self, k: int = 1) -> "VState":
        out: dict = {}
        for key, c in self.terms.items():
            for k2, c2 in derivative_power(key, k):
                out[k2] = out.get(k2, 0) + c * c2
        return self._like(out)

    def localize(self, r: int) -> "VState":
        """The same vector viewed with a different localization rank."""
        return VState(self.d, r, self.terms)

    # -- gradings -----------------------------------------------------------
    def weights(self) -> set:
        return {key_weight(k) for k in self.terms}

    def fermion_numbers(self) -> set:
        return {key_fermion(k) for k in self.terms}

    def charges(self) -> set:
        return {key_charge(k) for k in self.terms}

    def homogeneous_weight(self) -> int | None:
        w = self.weights()
        return w.pop() if len(w) == 1 else None

    def parity(self) -> int | None:
        p = {key_parity(k) for k in self.terms}
        return p.pop() if len(p) == 1 else None

    # -- text ---------------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (key_weight(kv[0]), kv[0]))

    def render(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for i, (k, c) in enumerate(self.sorted_terms()):
            mono = render_key(k)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = mono if mag == 1 else f"{_fmt(mag)} {mono}"
            if i == 0:
                out.append(("-" if c < 0 else "") + body)
            else:
                out.append(f"{sign} {body}")
        return " ".join(out)

    def __repr__(self):
        return f"VState(d={self.d}, r={self.r}: {self.render()})"
