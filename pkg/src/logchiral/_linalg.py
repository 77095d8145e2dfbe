"""Exact Gaussian elimination over Q on sparse vectors (dicts keyed by basis labels)."""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Mapping, Sequence


class SparseEchelon:
    """Incrementally maintained row-echelon basis of a subspace."""

    def __init__(self):
        self.rows: list[tuple[Hashable, dict]] = []  # (pivot, row) with row[pivot] == 1

    def reduce(self, vec: Mapping) -> dict:
        v = {k: Fraction(c) for k, c in vec.items() if c}
        for pivot, row in self.rows:
            c = v.get(pivot)
            if c:
                for k, rc in row.items():
                    nv = v.get(k, 0) - c * rc
                    if nv:
                        v[k] = nv
                    else:
                        v.pop(k, None)
        return v

    def add(self, vec: Mapping) -> bool:
        """Insert a vector; returns True if it enlarged the span."""
        v = self.reduce(vec)
        if not v:
            return False
        pivot = min(v, key=repr)
        inv = 1 / v[pivot]
        v = {k: c * inv for k, c in v.items()}
        # keep previous rows reduced against the new pivot
        new_rows = []
        for p, row in self.rows:
            c = row.get(pivot)
            if c:
                row = dict(row)
                for k, vc in v.items():
                    nv = row.get(k, 0) - c * vc
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
            new_rows.append((p, row))
        new_rows.append((pivot, v))
        self.rows = new_rows
        return True

    def contains(self, vec: Mapping) -> bool:
        return not self.reduce(vec)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def support(self) -> set:
        out = set()
        for _, row in self.rows:
            out.update(row)
        return out


def rank(vectors: Sequence[Mapping]) -> int:
    e = SparseEchelon()
    for v in vectors:
        e.add(v)
    return e.rank


def in_span(vectors: Sequence[Mapping], target: Mapping) -> bool:
    e = SparseEchelon()
    for v in vectors:
        e.add(v)
    return e.contains(target)


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> list | None:
    """One exact solution of matrix @ x = rhs, or None if inconsistent (free variables set to 0)."""
    m = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(matrix, rhs)]
    n = len(matrix[0]) if matrix else 0
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    for i in range(r, len(m)):
        if m[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        x[col] = m[i][n]
    return x


def matrix_rank(matrix: Sequence[Sequence]) -> int:
    return rank([{j: v for j, v in enumerate(row) if v} for row in matrix])
