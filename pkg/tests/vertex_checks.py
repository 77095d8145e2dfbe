"""Axiom checks on the vertex engine, each returning the defect (zero when it holds)."""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

from logchiral.vertex import nth_product
from logchiral.vertex.engine import max_pole


def koszul(a, b) -> int:
    pa, pb = a.parity(), b.parity()
    return -1 if pa and pb else 1


def skew_defect(a, b, n: int):
    """b_(n) a - p * sum_j (-1)^(n+j+1) d^j(a_(n+j) b) / j!."""
    p = koszul(a, b)
    rhs = a.zero()
    for j in range(max(0, max_pole(a, b) - n) + 1):
        term = nth_product(a, b, n + j).derivative(j)
        rhs = rhs + term * (Fraction(-1 if (n + j) % 2 == 0 else 1, factorial(j)) * p)
    return nth_product(b, a, n) - rhs


def commutator_defect(a, b, c, m: int, n: int):
    """a_(m)(b_(n)c) - p b_(n)(a_(m)c) - sum_j C(m, j) (a_(j)b)_(m+n-j) c, for m >= 0."""
    p = koszul(a, b)
    lhs = nth_product(a, nth_product(b, c, n), m) - nth_product(b, nth_product(a, c, m), n) * p
    rhs = a.zero()
    for j in range(m + 1):
        rhs = rhs + nth_product(nth_product(a, b, j), c, m + n - j) * comb(m, j)
    return lhs - rhs


def quasi_associativity_defect(a, b, c):
    """(ab)c - a(bc) - sum_j a_(-j-2)(b_(j)c) - p sum_j b_(-j-2)(a_(j)c)."""
    p = koszul(a, b)
    out = nth_product(nth_product(a, b, -1), c, -1) - nth_product(a, nth_product(b, c, -1), -1)
    for j in range(max_pole(b, c)):
        out = out - nth_product(a, nth_product(b, c, j), -j - 2)
    for j in range(max_pole(a, c)):
        out = out - nth_product(b, nth_product(a, c, j), -j - 2) * p
    return out


def leibniz_defect(a, b, n: int):
    """d(a_(n)b) - (da)_(n)b - a_(n)(db)."""
    return (
        nth_product(a, b, n).derivative()
        - nth_product(a.derivative(), b, n)
        - nth_product(a, b.derivative(), n)
    )
