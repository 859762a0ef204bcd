from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsow.errors import InvalidSubsetError, SearchBudgetError, UndeterminedError
from tsow.oracle import make_builtin, make_grover, problem_from_dict, restrict
from tsow.query import DecisionTreeSolver, all_subsets, brute_force_depth, dt_depth, dt_strategy


@pytest.mark.parametrize("name", ["grover", "dj"])
def test_memoized_equals_plain_minimax_on_all_subsets(name):
    p = make_builtin(name, 2)
    for subset in all_subsets(p):
        assert dt_depth(p, subset) == brute_force_depth(p, subset), subset


@pytest.mark.parametrize("name", ["grover", "dj"])
def test_monotone_under_restriction(name):
    p = make_builtin(name, 2)
    depth = {s: dt_depth(p, s) for s in all_subsets(p)}
    for s, d in depth.items():
        for i in range(len(s)):
            smaller = s[:i] + s[i + 1:]
            if smaller:
                assert depth[smaller] <= d


@pytest.mark.parametrize("name", ["grover", "dj"])
def test_strategy_replay_sound(name):
    p = make_builtin(name, 2)
    for subset in all_subsets(p):
        plan = dt_strategy(p, subset)
        assert plan.depth == dt_depth(p, subset)
        for b in subset:
            sol, spent = plan.classify(p, b)
            assert sol == p.solution(b)
            assert spent <= plan.depth


@pytest.mark.parametrize("n", [1, 2, 3])
def test_grover_classical_depth(n):
    # unstructured search over N items needs N - 1 queries in the worst case
    assert dt_depth(make_grover(n)) == (1 << n) - 1


def test_known_depths():
    assert dt_depth(make_builtin("dj", 2)) == 3
    assert dt_depth(make_builtin("dj", 3)) == 5
    assert dt_depth(make_builtin("simon", 2)) == 3


def test_reduced_problem_and_plan(grover2):
    assert dt_depth(restrict(grover2, [1, 3])) == 1
    plan = dt_strategy(grover2, [1, 3])
    assert plan.argument in (1, 3)
    doc = json.loads(plan.to_json(grover2))
    assert set(doc["branches"]) == {"0", "1"}
    assert "query" in plan.to_text(grover2)


def test_singleton_is_depth_zero(grover2):
    assert dt_depth(grover2, [2]) == 0
    assert dt_strategy(grover2, [2]).solution == 2


def test_subset_errors(grover2):
    with pytest.raises(InvalidSubsetError):
        dt_depth(grover2, [])
    with pytest.raises(InvalidSubsetError):
        dt_depth(grover2, [7])
    with pytest.raises(InvalidSubsetError):
        dt_depth(restrict(grover2, [0, 1]), [2])


def test_budget():
    p = make_grover(3)
    with pytest.raises(SearchBudgetError):
        DecisionTreeSolver(p, budget=10).depth((1 << 8) - 1)


def test_undetermined():
    p = problem_from_dict(
        {
            "name": "twins",
            "setting_width": 1,
            "encoding": "compact",
            "settings": ["0", "1"],
            "domain": ["0"],
            "answers": {"0": ["1"], "1": ["1"]},
            "solutions": {"0": "0", "1": "1"},
        }
    )
    with pytest.raises(UndeterminedError):
        dt_depth(p)
    with pytest.raises(UndeterminedError):
        brute_force_depth(p)


def test_pruning_does_not_change_depths():
    p = make_builtin("dj", 2)
    plain = DecisionTreeSolver(p, prune=False)
    pruned = DecisionTreeSolver(p)
    for subset in all_subsets(p):
        mask = pruned.bitset(subset)
        assert plain.depth(mask) == pruned.depth(mask)


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(0, 35), min_size=1, max_size=8))
def test_simon_subsets_match_brute_force(idx):
    p = make_builtin("simon", 2)
    subset = sorted(int(p.settings[i]) for i in idx)
    assert dt_depth(p, subset) == brute_force_depth(p, subset)
