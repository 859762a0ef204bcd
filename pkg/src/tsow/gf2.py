"""GF(2) linear algebra on int bitsets.

A vector of width ``n`` is an int whose bit ``n-1-i`` is coordinate ``i``
(leftmost coordinate = most significant bit), matching bit-string order.
"""

from __future__ import annotations

from itertools import combinations, product
from typing import Iterable


def gf2_rref(rows: Iterable[int], n_cols: int) -> list[int]:
    """Reduced row echelon basis of the row span, pivots from the high bit down."""
    basis: list[int] = []
    for row in rows:
        for b in basis:
            if row & _pivot(b):
                row ^= b
        if row:
            p = _pivot(row)
            basis = [b ^ row if b & p else b for b in basis]
            basis.append(row)
    basis.sort(reverse=True)
    return basis


def _pivot(row: int) -> int:
    return 1 << (row.bit_length() - 1)


def gf2_rank(rows: Iterable[int], n_cols: int) -> int:
    return len(gf2_rref(rows, n_cols))


def dot(x: int, y: int) -> int:
    return (x & y).bit_count() & 1


def gf2_solve(vectors: Iterable[int], n: int) -> list[int]:
    """Basis of {x : y.x = 0 for every supplied y}; the whole space for no input."""
    rref = gf2_rref(vectors, n)
    pivots = {_pivot(r) for r in rref}
    free = [1 << (n - 1 - i) for i in range(n) if (1 << (n - 1 - i)) not in pivots]
    basis = []
    for f in free:
        x = f
        for r in rref:
            if r & f:
                x |= _pivot(r)
        basis.append(x)
    return sorted(basis, reverse=True)


def span(basis: Iterable[int]) -> set[int]:
    out = {0}
    for v in basis:
        out |= {x ^ v for x in out}
    return out


def subspaces(n: int, k: int) -> list[tuple[int, ...]]:
    """All k-dimensional subspaces of GF(2)^n, each as its canonical RREF basis."""
    out = []
    for pivots in combinations(range(n), k):
        free_slots = []
        for r, pc in enumerate(pivots):
            for c in range(pc + 1, n):
                if c not in pivots:
                    free_slots.append((r, c))
        for bits in product((0, 1), repeat=len(free_slots)):
            rows = [1 << (n - 1 - pc) for pc in pivots]
            for (r, c), bit in zip(free_slots, bits):
                if bit:
                    rows[r] |= 1 << (n - 1 - c)
            out.append(tuple(sorted(rows, reverse=True)))
    return sorted(out)
