"""Oracle algorithms with B as a passive control register.

Each builder returns an ``AlgorithmUnitary``: the ordered operator list
of Alice's action, independent of Bob's setting (the setting lives in B
and only the oracle steps read it). Oracle steps are tagged, and the
query count is the number of tagged steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import (
    CalibrationFailedError,
    LayoutMismatchError,
    OutputNotCanonicalError,
    SamplingStallError,
    SizeLimitError,
    UseLongVariantError,
)
from .gf2 import dot, gf2_rank, gf2_solve
from .oracle import (
    OracleProblem,
    as_problem,
    make_bernstein_vazirani,
    make_deutsch_jozsa,
    make_grover,
    make_simon,
)
from .statevector import (
    STATE_TOL,
    X_GATE,
    BasisPermutation,
    DenseOp,
    LinearOperator,
    Reflection,
    RegisterLayout,
    StateVector,
    apply_forward,
    basis_state,
    check_layout,
    fidelity,
    gather_bits,
    hadamards,
    init_superposed_input,
    phase_oracle,
    scatter_bits,
    xor_oracle,
)

LONG_SUCCESS_TOL = 1e-6
CALIBRATION_TOL = 1e-12
CALIBRATION_GRID = 4097


@dataclass(frozen=True, eq=False)
class AlgorithmUnitary:
    name: str
    problem: OracleProblem
    layout: RegisterLayout
    steps: tuple[LinearOperator, ...]
    params: object = None
    notes: tuple[str, ...] = ()

    @property
    def query_count(self) -> int:
        return sum(1 for op in self.steps if op.query)


@dataclass(frozen=True)
class LongParameters:
    """Phase-matched Grover: ``iterations`` rounds with ``phase`` replacing pi in both reflections."""

    n: int
    theta: float
    iterations: int
    phase: float
    success: float


@dataclass
class RunResult:
    output_state: StateVector | None
    queries_used: int
    per_setting_success: dict[int, float]
    sampled_solution: int | None = None
    canonical: bool | None = None
    strict_fidelity: float | None = None
    workspace_clean: bool | None = None
    samples: list[int] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _solution_in_a(problem: OracleProblem, layout: RegisterLayout) -> np.ndarray:
    if layout.a_qubits < problem.solution_width:
        raise LayoutMismatchError("A register narrower than the solution")
    return np.asarray(problem.solutions, dtype=np.int64)


# ----------------------------------------------------------------- Grover


def build_grover(n: int = 2, problem: OracleProblem | None = None) -> AlgorithmUnitary:
    """One query and one inversion about the mean: exact for four drawers."""
    if n != 2:
        raise UseLongVariantError(f"plain Grover is exact only for n=2; use build_grover_long({n})")
    problem = problem or make_grover(n)
    layout = RegisterLayout(n, n, 0)
    a = layout.qubits("A")
    uniform = np.full(1 << n, 1 / np.sqrt(1 << n), dtype=complex)
    steps = (
        *hadamards(a, layout.total),
        phase_oracle(problem, layout),
        Reflection(a, uniform, np.pi, layout.total, global_phase=-1, label="diffusion"),
    )
    return AlgorithmUnitary("grover", problem, layout, steps)


def _long_success(n: int, iterations: int, phase):
    """Success probability in the two-dimensional (marked, unmarked) subspace.

    ``phase`` may be an array; the result then has the same shape.
    """
    beta = np.arcsin(2.0 ** (-n / 2))
    phase = np.asarray(phase, dtype=float)
    e = np.exp(1j * phase)
    sm, su = np.sin(beta), np.cos(beta)
    m = np.full(phase.shape, sm, dtype=complex)
    u = np.full(phase.shape, su, dtype=complex)
    for _ in range(iterations):
        m = m * e
        overlap = sm * m + su * u
        m = -(m - (1 - e) * sm * overlap)
        u = -(u - (1 - e) * su * overlap)
    return np.abs(m) ** 2


def _refine_max(f, lo: float, hi: float, h: float = 1e-7, steps: int = 80) -> float:
    """Bisection on the sign of a central-difference derivative."""
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        slope = f(min(mid + h, np.pi)) - f(max(mid - h, 0.0))
        if slope > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=None)
def calibrate_long(n: int) -> LongParameters:
    """Smallest iteration count admitting a phase with success 1, and that phase.

    For each candidate count, scan the phase on a grid over [0, pi], then
    refine the best grid point by derivative-sign bisection. Deterministic.
    """
    if not 2 <= n <= 8:
        raise SizeLimitError(f"exact Grover: n={n} outside 2..8")
    theta = float(np.arcsin(2.0 ** (-n / 2)))
    grid = np.linspace(0.0, np.pi, CALIBRATION_GRID)
    max_iter = int(np.ceil(np.pi / (4 * theta))) + 2
    for iterations in range(1, max_iter + 1):
        f = lambda phi, j=iterations: float(_long_success(n, j, phi))  # noqa: E731
        vals = _long_success(n, iterations, grid)
        i = int(np.argmax(vals))
        phase = _refine_max(f, grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)])
        candidates = [(f(phase), phase), (vals[i], float(grid[i]))]
        success, phase = max(candidates)
        if 1 - success <= CALIBRATION_TOL:
            return LongParameters(n, theta, iterations, float(phase), float(success))
    raise CalibrationFailedError(f"no exact phase found for n={n} within {max_iter} iterations")


def build_grover_long(n: int, problem: OracleProblem | None = None) -> AlgorithmUnitary:
    """Zero-failure Grover search for any n, verified on the full statevector."""
    params = calibrate_long(n)
    problem = problem or make_grover(n)
    layout = RegisterLayout(n, n, 0)
    a = layout.qubits("A")
    uniform = np.full(1 << n, 1 / np.sqrt(1 << n), dtype=complex)
    oracle = phase_oracle(problem, layout, phase=params.phase)
    diffusion = Reflection(a, uniform, params.phase, layout.total, global_phase=-1, label="phase-diffusion")
    steps = [*hadamards(a, layout.total)]
    for _ in range(params.iterations):
        steps += [oracle, diffusion]
    algo = AlgorithmUnitary("grover-long", problem, layout, tuple(steps), params)
    worst = min(_per_setting_success(problem, algo, apply_forward(init_superposed_input(problem, layout), algo)).values())
    if 1 - worst > LONG_SUCCESS_TOL:
        raise CalibrationFailedError(f"n={n}: statevector success {worst!r} below 1 - {LONG_SUCCESS_TOL}")
    return algo


def build_grover_any(n: int, problem: OracleProblem | None = None) -> AlgorithmUnitary:
    return build_grover(n, problem) if n == 2 else build_grover_long(n, problem)


# ---------------------------------------------------------- Deutsch-Jozsa


def build_deutsch_jozsa(n: int, problem: OracleProblem | None = None) -> AlgorithmUnitary:
    """Hadamard sandwich around one xor query, then OR of the argument into A.

    Layout: A is the one-bit solution register; W holds the n-bit argument
    followed by the oracle target qubit. The target is returned to |0>, the
    argument register keeps the (setting-dependent) interference pattern.
    """
    if n not in (1, 2, 3):
        raise SizeLimitError(f"deutsch-jozsa: n={n} outside {{1,2,3}}")
    problem = problem or make_deutsch_jozsa(n)
    layout = RegisterLayout(1 << n, 1, n + 1)
    total = layout.total
    w = layout.qubits("W")
    arg, target = w[:n], w[n]
    (sol,) = layout.qubits("A")
    idx = np.arange(layout.dim, dtype=np.int64)
    any_set = (gather_bits(idx, arg, total) != 0).astype(np.int64)
    or_into_a = BasisPermutation(idx ^ scatter_bits(any_set, (sol,), total), "or-into-A")
    steps = (
        DenseOp((target,), X_GATE, total, "X"),
        *hadamards((*arg, target), total),
        xor_oracle(problem, layout, arg_qubits=arg, target_qubits=(target,)),
        *hadamards((*arg, target), total),
        DenseOp((target,), X_GATE, total, "X"),
        or_into_a,
    )
    return AlgorithmUnitary(
        "deutsch-jozsa",
        problem,
        layout,
        steps,
        notes=("argument register (in W) keeps a setting-dependent pattern; OR step uses no queries",),
    )


def build_bernstein_vazirani(n: int, problem: OracleProblem | None = None) -> AlgorithmUnitary:
    if not 1 <= n <= 8:
        raise SizeLimitError(f"bernstein-vazirani: n={n} outside 1..8")
    problem = problem or make_bernstein_vazirani(n)
    layout = RegisterLayout(n, n, 0)
    a = layout.qubits("A")
    steps = (*hadamards(a, layout.total), phase_oracle(problem, layout), *hadamards(a, layout.total))
    return AlgorithmUnitary("bernstein-vazirani", problem, layout, steps, notes=("exploratory",))


# ------------------------------------------------------------------ Simon


def build_simon_circuit(n: int, problem: OracleProblem | None = None, setting: int | None = None) -> AlgorithmUnitary:
    """One Simon round: H on A, xor query into W, H on A.

    With ``setting`` given, B is dropped (Bob's measurement already made)
    and the oracle is bound to that setting.
    """
    problem = problem or make_simon(n)
    layout = RegisterLayout(0 if setting is not None else problem.setting_width, n, n)
    a = layout.qubits("A")
    steps = (
        *hadamards(a, layout.total),
        xor_oracle(problem, layout, setting=setting),
        *hadamards(a, layout.total),
    )
    return AlgorithmUnitary("simon-round", problem, layout, steps, notes=("one sampling round; A holds a random y with y.p = 0, not the solution",))


def _simon_distribution(problem: OracleProblem, n: int, setting: int) -> np.ndarray:
    algo = build_simon_circuit(n, problem, setting)
    out = apply_forward(basis_state(algo.layout), algo)
    mass = out.register_mass("A")
    return mass / mass.sum()


def run_simon(
    n: int,
    seed: int = 0,
    setting: int | None = None,
    problem: OracleProblem | None = None,
    rng: np.random.Generator | None = None,
) -> RunResult:
    """Repeat the one-query round until n-1 independent samples, then solve over GF(2).

    Bob's setting is drawn from the seeded generator when not given. A
    caller-supplied ``rng`` takes precedence over ``seed``.
    """
    problem = problem or make_simon(n)
    if rng is None:
        rng = np.random.default_rng(seed)
    if setting is None:
        setting = int(problem.settings[rng.integers(len(problem.settings))])
    p = problem.solution(setting)
    dist = _simon_distribution(problem, n, setting)
    samples: list[int] = []
    for runs in range(1, 64 * n + 1):
        y = int(rng.choice(len(dist), p=dist))
        if dot(y, p):
            raise SamplingStallError(f"sample {y:0{n}b} violates y.p = 0 for p={p:0{n}b}; broken oracle")
        samples.append(y)
        if gf2_rank(samples, n) == n - 1:
            (period,) = gf2_solve(samples, n)
            return RunResult(
                output_state=None,
                queries_used=runs,
                per_setting_success={setting: float(period == p)},
                sampled_solution=period,
                samples=samples,
                notes=[f"simon controller: {runs} one-query rounds"],
            )
    raise SamplingStallError(f"rank n-1 not reached after {64 * n} rounds")


# ------------------------------------------------------------------- runs


def _per_setting_success(problem, algo: AlgorithmUnitary, out: StateVector) -> dict[int, float]:
    p = as_problem(problem)
    sols = _solution_in_a(p, algo.layout)
    lay = algo.layout
    cube = out.probabilities().reshape(1 << lay.b_qubits, 1 << lay.a_qubits, 1 << lay.w_qubits)
    branch_mass = cube.sum(axis=(1, 2))
    hit = cube.sum(axis=2)
    result = {}
    for b, s in zip(p.settings, sols):
        m = branch_mass[int(b)]
        result[int(b)] = float(hit[int(b), s] / m) if m > 0 else 0.0
    return result


def canonical_output(problem, layout: RegisterLayout) -> StateVector:
    """(1/sqrt|sigma|) sum_b |b>_B |s(b)>_A |0>_W."""
    p = as_problem(problem)
    amps = np.zeros(layout.dim, dtype=complex)
    idx = (np.asarray(p.settings, dtype=np.int64) << (layout.a_qubits + layout.w_qubits)) | (
        _solution_in_a(p, layout) << layout.w_qubits
    )
    amps[idx] = 1 / np.sqrt(len(p.settings))
    return StateVector(amps, layout)


def run_relativized(problem, algo: AlgorithmUnitary, check: bool = True) -> RunResult:
    """Forward-propagate Alice's input of complete ignorance and check the output.

    The output is canonical when every setting branch carries weight
    1/|sigma| and reads s(b) in A with certainty. ``strict_fidelity`` is the
    fidelity against sum_b |b>|s(b)>|0> itself, which additionally needs a
    clean workspace and equal branch phases.
    """
    p = as_problem(problem)
    check_layout(p, algo.layout)
    out = apply_forward(init_superposed_input(p, algo.layout), algo)
    success = _per_setting_success(p, algo, out)
    branch = out.register_mass("B")
    weight_ok = all(abs(branch[int(b)] - 1 / len(p.settings)) <= STATE_TOL for b in p.settings)
    canonical = weight_ok and all(1 - v <= STATE_TOL for v in success.values())
    strict = fidelity(out, canonical_output(p, algo.layout))
    lay = algo.layout
    w_mass = out.register_mass("W")
    result = RunResult(
        output_state=out,
        queries_used=algo.query_count,
        per_setting_success=success,
        canonical=canonical,
        strict_fidelity=strict,
        workspace_clean=bool(abs(w_mass[0] - 1) <= STATE_TOL) if lay.w_qubits else True,
        notes=list(algo.notes),
    )
    if check and not canonical:
        worst = min(success.values())
        raise OutputNotCanonicalError(
            f"{algo.name} on {p.name}: output is not sum_b |b>|s(b)> (worst per-setting success {worst:.6g})",
            result,
        )
    return result


def run_extended(problem, algo: AlgorithmUnitary, setting: int) -> RunResult:
    """Bob has measured B: start from |b>|0>|0> and propagate."""
    p = as_problem(problem)
    p.index_of(setting)
    out = apply_forward(basis_state(algo.layout, b=setting), algo)
    success = _per_setting_success(p, algo, out)[setting]
    return RunResult(out, algo.query_count, {setting: success}, notes=list(algo.notes))


def build_for(problem_key: str, n: int, problem: OracleProblem | None = None) -> AlgorithmUnitary:
    """Standard algorithm for a builtin family."""
    if problem_key == "grover":
        return build_grover_any(n, problem)
    if problem_key == "dj":
        return build_deutsch_jozsa(n, problem)
    if problem_key == "bv":
        return build_bernstein_vazirani(n, problem)
    if problem_key == "simon":
        # the full-B circuit for n=3 would need 30 qubits; the controller
        # only ever runs the round with Bob's setting already fixed
        problem = problem or make_simon(n)
        return build_simon_circuit(n, problem, setting=int(problem.settings[0]))
    raise KeyError(problem_key)


def all_settings(problem) -> Sequence[int]:
    return [int(b) for b in as_problem(problem).settings]


__all__ = [
    "AlgorithmUnitary",
    "LongParameters",
    "RunResult",
    "build_grover",
    "build_grover_long",
    "build_grover_any",
    "build_deutsch_jozsa",
    "build_bernstein_vazirani",
    "build_simon_circuit",
    "build_for",
    "calibrate_long",
    "canonical_output",
    "run_relativized",
    "run_extended",
    "run_simon",
]
