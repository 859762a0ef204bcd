"""Splitting the measurement of register B into two partial measurements.

A sharing pair consists of an initial share (``spec1``) and a final
share (``spec2``). Propagated back to the input by the adjoint of
Alice's unitary, the final share becomes knowledge she holds in
advance: the cell of settings agreeing with the actual one on it.

A pair is accepted when the two shares jointly determine the solution,
contribute equal solution information, and do not overlap in what they
select (c1 + c2 <= c12, information measured in bits of the solution).
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .algorithms import AlgorithmUnitary
from .errors import InstanceMismatchError, NoValidPairError, SizeLimitError
from .gf2 import gf2_rank, subspaces
from .oracle import COMPACT, OracleProblem, ReducedProblem, SettingSet, as_problem, fmt_bits
from .statevector import (
    STATE_TOL,
    MeasurementSpec,
    StateVector,
    apply_backward,
    apply_forward,
    basis_state,
    cell_superposition,
    fidelity,
    init_superposed_input,
    project,
)

COORDINATE = "coordinate"
GF2 = "gf2-linear"
MODES = (COORDINATE, GF2)
MAX_GF2_WIDTH = 4
MAX_PAIR_EVALUATIONS = 2_000_000


@dataclass(frozen=True)
class SharingPair:
    spec1: MeasurementSpec
    spec2: MeasurementSpec
    mode: str
    near_even: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        s1, s2 = self.spec1, self.spec2
        gap = abs(s1.size - s2.size)
        if gap > (1 if self.near_even else 0):
            raise ValueError(f"shares of sizes {s1.size} and {s2.size} are not even")
        if s1.register == s2.register == "B":
            width = s1.width
            if s2.width != width:
                raise ValueError("shares act on registers of different widths")
            if gf2_rank(s1.functionals + s2.functionals, width) != width or s1.size + s2.size != width:
                raise ValueError("shares must be independent and jointly cover the register")

    def swapped(self) -> "SharingPair":
        return SharingPair(self.spec2, self.spec1, self.mode, self.near_even)

    def describe(self) -> str:
        return f"{self.spec1.describe()} | {self.spec2.describe()}"


@dataclass(frozen=True)
class ValidityReport:
    c1: float
    c2: float
    c12: float
    even: bool
    non_redundant: bool
    jointly_determining: bool
    setting_even: bool

    @property
    def valid(self) -> bool:
        return self.even and self.non_redundant and self.jointly_determining and self.setting_even


@dataclass(frozen=True)
class InstanceDescriptor:
    pair: SharingPair
    setting: int
    initial_cell: SettingSet
    advanced_cell: SettingSet
    validity: ValidityReport


@dataclass(frozen=True, eq=False)
class SymmetrizationInstance:
    pair: SharingPair
    setting: int
    advanced_cell: SettingSet
    instance_input: StateVector
    instance_output: StateVector
    input_fidelity: float


@dataclass
class RebuildReport:
    support_ok: bool
    proportional: bool
    weight_vector: dict[int, float]
    fidelity: float
    no_valid_pair: list[int]


class _Sharing:
    """Per-problem cache of share outcomes and solution-class bitsets."""

    def __init__(self, problem: OracleProblem):
        self.problem = problem
        self.full = (1 << len(problem.settings)) - 1
        masks: dict[int, int] = {}
        for i, s in enumerate(problem.solutions.tolist()):
            masks[s] = masks.get(s, 0) | (1 << i)
        self.sol_masks = tuple(masks.values())
        self._cells: dict[MeasurementSpec, dict[int, int]] = {}
        self._settings = np.asarray(problem.settings, dtype=np.int64)
        self.n_solutions = len(self.sol_masks)

    def cells(self, spec: MeasurementSpec) -> dict[int, int]:
        """Outcome -> bitset of settings with that outcome (B-register specs)."""
        hit = self._cells.get(spec)
        if hit is None:
            if spec.register == "B":
                values = self._settings
            else:
                values = np.asarray(self.problem.solutions, dtype=np.int64)
            outcomes = np.asarray(spec.outcome_of(values)).tolist()
            hit = {}
            for i, o in enumerate(outcomes):
                hit[o] = hit.get(o, 0) | (1 << i)
            self._cells[spec] = hit
        return hit

    def cell_of(self, spec: MeasurementSpec, b: int) -> int:
        i = self.problem.index_of(b)
        value = b if spec.register == "B" else int(self.problem.solutions[i])
        return self.cells(spec)[int(spec.outcome_of(value))]

    def n_sol(self, mask: int) -> int:
        return sum(1 for m in self.sol_masks if m & mask)

    def members(self, mask: int) -> SettingSet:
        p = self.problem
        return SettingSet(tuple(int(p.settings[i]) for i in range(mask.bit_length()) if mask >> i & 1), p.setting_width)


_CACHE: "weakref.WeakKeyDictionary[OracleProblem, _Sharing]" = weakref.WeakKeyDictionary()


def _sharing(problem) -> _Sharing:
    p = as_problem(problem)
    ctx = _CACHE.get(p)
    if ctx is None:
        ctx = _CACHE[p] = _Sharing(p)
    return ctx


def _bits(n_sol_total: int, n_sol_cell: int) -> float:
    return math.log2(n_sol_total) - math.log2(n_sol_cell)


def contribution(problem, b: int, spec: MeasurementSpec) -> tuple[SettingSet, float]:
    """Cell of settings agreeing with b on ``spec``, and the solution bits it fixes."""
    ctx = _sharing(problem)
    cell = ctx.cell_of(spec, b)
    return ctx.members(cell), _bits(ctx.n_solutions, ctx.n_sol(cell))


def is_valid_pair(problem, b: int, pair: SharingPair) -> ValidityReport:
    ctx = _sharing(problem)
    cell1 = ctx.cell_of(pair.spec1, b)
    cell2 = ctx.cell_of(pair.spec2, b)
    total, k1, k2, k12 = ctx.n_solutions, ctx.n_sol(cell1), ctx.n_sol(cell2), ctx.n_sol(cell1 & cell2)
    c1, c2, c12 = _bits(total, k1), _bits(total, k2), _bits(total, k12)
    # integer forms of c1 == c2 and c1 + c2 <= c12
    even = k1 == k2 or (pair.near_even and max(k1, k2) <= 2 * min(k1, k2))
    return ValidityReport(
        c1=c1,
        c2=c2,
        c12=c12,
        even=even,
        non_redundant=total * k12 <= k1 * k2,
        jointly_determining=k12 == 1,
        setting_even=abs(pair.spec1.size - pair.spec2.size) <= (1 if pair.near_even else 0),
    )


def candidate_pairs(problem, mode: str, near_even: bool = False) -> list[SharingPair]:
    """All structurally admissible ordered pairs on register B, in canonical order."""
    p = as_problem(problem)
    m = p.setting_width
    sizes = [m // 2] if m % 2 == 0 else ([m // 2, m - m // 2] if near_even else [])
    pairs = []
    if mode == COORDINATE:
        count = sum(math.comb(m, k) for k in sizes)
        if count * len(p.settings) > MAX_PAIR_EVALUATIONS:
            raise SizeLimitError(f"{count} coordinate pairs x {len(p.settings)} settings is beyond desk scale")
        for k in sizes:
            for first in combinations(range(m), k):
                rest = [i for i in range(m) if i not in first]
                pairs.append(
                    SharingPair(
                        MeasurementSpec.coordinate("B", m, first),
                        MeasurementSpec.coordinate("B", m, rest),
                        COORDINATE,
                        near_even,
                    )
                )
    elif mode == GF2:
        if p.encoding != COMPACT:
            raise ValueError("gf2-linear sharing is defined only for compact encodings")
        if m > MAX_GF2_WIDTH:
            raise SizeLimitError(f"gf2-linear sharing limited to settings of at most {MAX_GF2_WIDTH} bits")
        for k in sizes:
            firsts = subspaces(m, k)
            seconds = subspaces(m, m - k)
            for u in firsts:
                for v in seconds:
                    if gf2_rank(u + v, m) == m:
                        pairs.append(
                            SharingPair(MeasurementSpec.gf2("B", m, u), MeasurementSpec.gf2("B", m, v), GF2, near_even)
                        )
    else:
        raise ValueError(f"mode must be one of {MODES}")
    return pairs


def enumerate_instances(problem, b: int, mode: str, near_even: bool = False) -> list[InstanceDescriptor]:
    """Every valid ordered pair for setting b; either share may be the final one."""
    ctx = _sharing(problem)
    out = []
    for pair in candidate_pairs(problem, mode, near_even):
        report = is_valid_pair(problem, b, pair)
        if report.valid:
            out.append(
                InstanceDescriptor(
                    pair,
                    b,
                    ctx.members(ctx.cell_of(pair.spec1, b)),
                    ctx.members(ctx.cell_of(pair.spec2, b)),
                    report,
                )
            )
    if not out:
        raise NoValidPairError(
            f"{as_problem(problem).name}: no valid {mode} pair for setting {fmt_bits(b, ctx.problem.setting_width)}"
        )
    return out


def distinct_cells(instances: list[InstanceDescriptor]) -> list[SettingSet]:
    return sorted({d.advanced_cell for d in instances}, key=lambda c: c.members)


def _final_outcome(problem, pair: SharingPair, b: int) -> int:
    p = as_problem(problem)
    value = b if pair.spec2.register == "B" else p.solution(b)
    return int(pair.spec2.outcome_of(value))


def make_instance(problem, algo: AlgorithmUnitary, pair: SharingPair, b: int) -> SymmetrizationInstance:
    """Forward the input of complete ignorance, keep the final share's outcome, go back.

    The back-propagated state must equal the advanced-knowledge cell
    superposition; otherwise ``InstanceMismatchError``.
    """
    ctx = _sharing(problem)
    p = as_problem(problem)
    out = apply_forward(init_superposed_input(p, algo.layout), algo)
    kept, prob = project(out, pair.spec2, _final_outcome(p, pair, b))
    if prob <= 0:
        raise InstanceMismatchError(f"final share {pair.spec2.describe()} has zero probability")
    back = apply_backward(kept, algo).normalize()
    cell = ctx.members(ctx.cell_of(pair.spec2, b))
    expected = cell_superposition(cell, algo.layout)
    fid = fidelity(back, expected)
    if 1 - fid > STATE_TOL:
        raise InstanceMismatchError(
            f"back-propagated input has fidelity {fid!r} with the cell superposition of {cell.labels()}"
        )
    return SymmetrizationInstance(pair, b, cell, back, apply_forward(back, algo), fid)


def bob_invariance_check(problem, algo: AlgorithmUnitary, pair: SharingPair, b: int) -> float:
    """Initial share forward, final share backward: fidelity with |b>|0...>."""
    p = as_problem(problem)
    start = init_superposed_input(p, algo.layout)
    first, _ = project(start, pair.spec1, int(pair.spec1.outcome_of(b)))
    out = apply_forward(first, algo)
    second, prob = project(out, pair.spec2, _final_outcome(p, pair, b))
    if prob <= 0:
        return 0.0
    back = apply_backward(second, algo)
    return fidelity(back, basis_state(algo.layout, b=b))


def rebuild_check(problem, algo: AlgorithmUnitary, mode: str, near_even: bool = False) -> RebuildReport:
    """Sum every setting's distinct instance outputs and compare with Alice's full output.

    Instance inputs are the unnormalized cell sums, so a setting's weight
    in the total is the number of (setting, cell) instances containing it.
    """
    p = as_problem(problem)
    lay = algo.layout
    total = np.zeros(lay.dim, dtype=complex)
    missing = []
    for b in (int(x) for x in p.settings):
        try:
            instances = enumerate_instances(p, b, mode, near_even)
        except NoValidPairError:
            missing.append(b)
            continue
        for cell in distinct_cells(instances):
            state = cell_superposition(cell, lay)
            total += apply_forward(state, algo).amplitudes * math.sqrt(len(cell))
    summed = StateVector(total, lay, normalized=False)
    reference = apply_forward(init_superposed_input(p, lay), algo)
    weights = {}
    support = True
    for b, s in zip((int(x) for x in p.settings), p.solutions.tolist()):
        branch = summed.branch(b)
        mass = float(np.vdot(branch, branch).real)
        weights[b] = math.sqrt(mass)
        hit = float(np.sum(np.abs(branch[s]) ** 2))
        if mass <= STATE_TOL or abs(hit - mass) > STATE_TOL * max(1.0, mass):
            support = False
    fid = fidelity(summed, reference) if summed.norm() > 0 else 0.0
    return RebuildReport(support, 1 - fid <= STATE_TOL, weights, fid, missing)
