"""Deterministic classical query complexity by exhaustive decision-tree search.

Subsets of a problem's settings are int bitsets over the canonical
(sorted) setting order: bit i set means ``settings[i]`` is a member.
"""

from __future__ import annotations

import json
import weakref
from dataclasses import dataclass, field
from typing import Iterable

from .errors import InvalidSubsetError, SearchBudgetError, UndeterminedError
from .oracle import OracleProblem, ReducedProblem, SettingSet, base_and_subset, fmt_bits

DEFAULT_MEMO_BUDGET = 4_000_000


@dataclass
class QueryPlan:
    """Decision tree: query ``argument``, then follow the branch for the answer.

    A leaf has ``argument is None`` and carries the determined ``solution``.
    """

    argument: int | None = None
    branches: dict[int, "QueryPlan"] = field(default_factory=dict)
    solution: int | None = None
    settings: tuple[int, ...] = ()

    @property
    def depth(self) -> int:
        if self.argument is None:
            return 0
        return 1 + max(child.depth for child in self.branches.values())

    def classify(self, problem: OracleProblem, b: int) -> tuple[int, int]:
        """Replay against setting b: (solution reached, queries spent)."""
        node, spent = self, 0
        while node.argument is not None:
            answer = problem.answer(b, node.argument)
            node = node.branches[answer]
            spent += 1
        return node.solution, spent

    def to_dict(self, problem: OracleProblem) -> dict:
        if self.argument is None:
            return {"solution": problem.solution_label(self.solution)}
        return {
            "query": fmt_bits(self.argument, problem.arg_width),
            "branches": {
                fmt_bits(ans, problem.answer_width): child.to_dict(problem)
                for ans, child in sorted(self.branches.items())
            },
        }

    def to_text(self, problem: OracleProblem, indent: int = 0) -> str:
        pad = "  " * indent
        if self.argument is None:
            return f"{pad}-> {problem.solution_label(self.solution)}\n"
        lines = [f"{pad}query {fmt_bits(self.argument, problem.arg_width)}\n"]
        for ans, child in sorted(self.branches.items()):
            lines.append(f"{pad}  answer {fmt_bits(ans, problem.answer_width)}:\n")
            lines.append(child.to_text(problem, indent + 2))
        return "".join(lines)

    def to_json(self, problem: OracleProblem) -> str:
        return json.dumps(self.to_dict(problem), sort_keys=True, indent=2)


class DecisionTreeSolver:
    """Memoized minimax over setting subsets for one problem.

    ``depth(S)`` is 0 when all of S share one solution, otherwise the
    minimum over informative arguments (those splitting S into at least two
    answer classes) of 1 + the worst class depth. Arguments that cannot beat
    the incumbent are abandoned early; this never changes the result.
    """

    def __init__(self, problem: OracleProblem, budget: int = DEFAULT_MEMO_BUDGET, prune: bool = True):
        self.problem = problem
        self.budget = budget
        self.prune = prune
        self.memo: dict[int, int] = {}
        self.full = (1 << len(problem.settings)) - 1
        self._splits = []
        for j in range(len(problem.domain)):
            col = problem.answers[:, j]
            classes = {}
            for i, v in enumerate(col.tolist()):
                classes[v] = classes.get(v, 0) | (1 << i)
            if len(classes) > 1:
                self._splits.append((j, tuple(sorted(classes.items()))))
        sol_masks = {}
        for i, s in enumerate(problem.solutions.tolist()):
            sol_masks[s] = sol_masks.get(s, 0) | (1 << i)
        self._sol_masks = tuple(sol_masks.values())

    def bitset(self, subset: Iterable[int]) -> int:
        mask = 0
        for b in subset:
            mask |= 1 << self.problem.index_of(b)
        return mask

    def members(self, mask: int) -> tuple[int, ...]:
        return tuple(int(self.problem.settings[i]) for i in range(mask.bit_length()) if mask >> i & 1)

    def solution_count(self, mask: int) -> int:
        return sum(1 for m in self._sol_masks if m & mask)

    def _classes(self, mask: int, split) -> list[tuple[int, int]]:
        return [(v, mask & m) for v, m in split if mask & m]

    def depth(self, mask: int) -> int:
        if mask == 0:
            raise InvalidSubsetError("subset must be nonempty")
        return self._depth(mask)

    def _depth(self, mask: int) -> int:
        hit = self.memo.get(mask)
        if hit is not None:
            return hit
        if self.solution_count(mask) <= 1:
            result = 0
        else:
            best = None
            seen = set()
            for _, split in self._splits:
                classes = self._classes(mask, split)
                if len(classes) < 2:
                    continue
                key = tuple(sorted(c for _, c in classes))
                if key in seen:
                    continue
                seen.add(key)
                worst = 0
                for c in sorted(key, key=lambda m: -m.bit_count()):
                    worst = max(worst, self._depth(c))
                    if self.prune and best is not None and 1 + worst >= best:
                        break
                if best is None or 1 + worst < best:
                    best = 1 + worst
                if self.prune and best == 1:
                    break
            if best is None:
                raise UndeterminedError(
                    f"{self.problem.name}: settings {self.members(mask)} have distinct solutions "
                    "but no argument separates them"
                )
            result = best
        if len(self.memo) >= self.budget:
            raise SearchBudgetError(f"{self.problem.name}: decision-tree memo exceeded {self.budget} entries")
        self.memo[mask] = result
        return result

    def strategy(self, mask: int) -> QueryPlan:
        d = self.depth(mask)
        if d == 0:
            sols = {int(self.problem.solutions[i]) for i in range(mask.bit_length()) if mask >> i & 1}
            return QueryPlan(solution=sols.pop(), settings=self.members(mask))
        for j, split in self._splits:
            classes = self._classes(mask, split)
            if len(classes) < 2:
                continue
            if 1 + max(self.depth(c) for _, c in classes) == d:
                return QueryPlan(
                    argument=int(self.problem.domain[j]),
                    branches={int(v): self.strategy(c) for v, c in classes},
                    settings=self.members(mask),
                )
        raise AssertionError("memoized depth has no witnessing argument")


_SOLVERS: "weakref.WeakKeyDictionary[OracleProblem, DecisionTreeSolver]" = weakref.WeakKeyDictionary()


def solver_for(problem: OracleProblem) -> DecisionTreeSolver:
    solver = _SOLVERS.get(problem)
    if solver is None:
        solver = _SOLVERS[problem] = DecisionTreeSolver(problem)
    return solver


def _resolve(problem, subset) -> tuple[OracleProblem, int]:
    base, default = base_and_subset(problem)
    if subset is None:
        subset = default
    members = list(subset)
    if not members:
        raise InvalidSubsetError("subset must be nonempty")
    for b in members:
        if b not in default:
            raise InvalidSubsetError(f"{fmt_bits(b, base.setting_width)} is outside the problem's settings")
    return base, solver_for(base).bitset(members)


def dt_depth(problem: OracleProblem | ReducedProblem, subset: SettingSet | Iterable[int] | None = None) -> int:
    """Worst-case deterministic query count to determine s(b) given b in subset."""
    base, mask = _resolve(problem, subset)
    return solver_for(base).depth(mask)


def dt_strategy(problem: OracleProblem | ReducedProblem, subset: SettingSet | Iterable[int] | None = None) -> QueryPlan:
    base, mask = _resolve(problem, subset)
    return solver_for(base).strategy(mask)


def brute_force_depth(problem: OracleProblem | ReducedProblem, subset: Iterable[int] | None = None) -> int:
    """Plain minimax: no memo, no pruning, no shared state. Reference for self-tests."""
    base, default = base_and_subset(problem)
    members = list(default if subset is None else subset)
    rows = {b: base.index_of(b) for b in members}
    answers = base.answers
    solutions = base.solutions

    def rec(group: list[int]) -> int:
        if len({int(solutions[rows[b]]) for b in group}) <= 1:
            return 0
        best = None
        for j in range(answers.shape[1]):
            parts: dict[int, list[int]] = {}
            for b in group:
                parts.setdefault(int(answers[rows[b], j]), []).append(b)
            if len(parts) < 2:
                continue
            cost = 1 + max(rec(p) for p in parts.values())
            best = cost if best is None else min(best, cost)
        if best is None:
            raise UndeterminedError("no argument separates settings with distinct solutions")
        return best

    if not members:
        raise InvalidSubsetError("subset must be nonempty")
    return rec(members)


def all_subsets(problem: OracleProblem) -> list[tuple[int, ...]]:
    """Every nonempty subset of sigma, smallest first (for exhaustive checks)."""
    settings = [int(b) for b in problem.settings]
    out = []
    for mask in range(1, 1 << len(settings)):
        out.append(tuple(b for i, b in enumerate(settings) if mask >> i & 1))
    return sorted(out, key=lambda s: (len(s), s))


__all__ = [
    "DecisionTreeSolver",
    "QueryPlan",
    "brute_force_depth",
    "dt_depth",
    "dt_strategy",
    "all_subsets",
    "solver_for",
]
