from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tsow.gf2 import dot, gf2_rank, gf2_rref, gf2_solve, span, subspaces


def _brute_span(vectors):
    out = set()
    for coeffs in itertools.product((0, 1), repeat=len(vectors)):
        x = 0
        for c, v in zip(coeffs, vectors):
            if c:
                x ^= v
        out.add(x)
    return out


def _brute_subspaces(n, k):
    """Distinct spans of every k-tuple of vectors with full rank."""
    seen = set()
    for vecs in itertools.combinations(range(1, 1 << n), k):
        s = frozenset(_brute_span(vecs))
        if len(s) == 1 << k:
            seen.add(s)
    return seen


def _gaussian_binomial(n, k):
    num = den = 1
    for i in range(k):
        num *= (1 << (n - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


vectors = st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, (1 << n) - 1), max_size=6)))


@given(vectors)
def test_rank_matches_span_size(nv):
    n, vs = nv
    assert 1 << gf2_rank(vs, n) == len(_brute_span(vs))
    assert span(gf2_rref(vs, n)) == _brute_span(vs)


@given(vectors)
def test_solve_is_the_annihilator(nv):
    n, vs = nv
    expected = {x for x in range(1 << n) if all(dot(x, y) == 0 for y in vs)}
    assert span(gf2_solve(vs, n)) == expected


def test_solve_examples():
    assert gf2_solve([0b01], 2) == [0b10]
    assert sorted(gf2_solve([], 2)) == [0b01, 0b10]
    assert gf2_solve([0b110, 0b011], 3) == [0b111]


@pytest.mark.parametrize("n,k", [(n, k) for n in range(1, 5) for k in range(0, n + 1)])
def test_subspaces_match_brute_force(n, k):
    got = subspaces(n, k)
    assert len(got) == _gaussian_binomial(n, k)
    expected = _brute_subspaces(n, k) if k else {frozenset({0})}
    assert {frozenset(span(b)) for b in got} == expected


def test_subspace_counts():
    assert len(subspaces(4, 2)) == 35
    assert len(subspaces(6, 3)) == 1395
