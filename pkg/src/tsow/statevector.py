"""Dense statevectors over the registers B (setting), A (argument/solution), W (workspace).

Basis convention: B occupies the most significant bits of the basis index,
then A, then W. Global qubit 0 is the leftmost bit of B. A basis index is
``b << (a_qubits + w_qubits) | a << w_qubits | w``.

Operators never mutate their input; every application returns a new array.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    LayoutMismatchError,
    LengthMismatchError,
    NotUnitaryError,
    PhaseNeedsBinaryError,
    SizeLimitError,
    UnknownOutcomeError,
)
from .oracle import OracleProblem, ReducedProblem, as_problem, fmt_bits

DEFAULT_MAX_QUBITS = 24
HARD_MAX_QUBITS = 30
STATE_TOL = 1e-9
NORM_DRIFT_TOL = 1e-12
DUMP_THRESHOLD = 1e-12


def max_qubits() -> int:
    """Qubit cap; ``TSOW_MAX_QUBITS`` overrides the default but is still validated."""
    raw = os.environ.get("TSOW_MAX_QUBITS")
    if raw is None:
        return DEFAULT_MAX_QUBITS
    try:
        value = int(raw)
    except ValueError:
        raise SizeLimitError(f"TSOW_MAX_QUBITS={raw!r} is not an integer") from None
    if not 1 <= value <= HARD_MAX_QUBITS:
        raise SizeLimitError(f"TSOW_MAX_QUBITS={value} outside 1..{HARD_MAX_QUBITS}")
    return value


@dataclass(frozen=True)
class RegisterLayout:
    b_qubits: int
    a_qubits: int
    w_qubits: int = 0

    def __post_init__(self):
        if min(self.b_qubits, self.a_qubits, self.w_qubits) < 0:
            raise LayoutMismatchError("register widths must be nonnegative")
        cap = max_qubits()
        if self.total > cap:
            raise SizeLimitError(f"layout needs {self.total} qubits, cap is {cap}")

    @property
    def total(self) -> int:
        return self.b_qubits + self.a_qubits + self.w_qubits

    @property
    def dim(self) -> int:
        return 1 << self.total

    def qubits(self, register: str) -> tuple[int, ...]:
        start, width = {
            "B": (0, self.b_qubits),
            "A": (self.b_qubits, self.a_qubits),
            "W": (self.b_qubits + self.a_qubits, self.w_qubits),
        }[register]
        return tuple(range(start, start + width))

    def index(self, b: int = 0, a: int = 0, w: int = 0) -> int:
        return (b << (self.a_qubits + self.w_qubits)) | (a << self.w_qubits) | w

    def fields(self, idx: np.ndarray | int):
        """Split basis indices into (b, a, w) register contents."""
        w = idx & ((1 << self.w_qubits) - 1)
        a = (idx >> self.w_qubits) & ((1 << self.a_qubits) - 1)
        b = idx >> (self.a_qubits + self.w_qubits)
        return b, a, w

    def label(self, idx: int) -> str:
        b, a, w = self.fields(idx)
        parts = [fmt_bits(b, self.b_qubits), fmt_bits(a, self.a_qubits), fmt_bits(w, self.w_qubits)]
        return "|".join(p for p in parts if p)


def gather_bits(idx: np.ndarray, qubits: Sequence[int], total: int) -> np.ndarray:
    """Integer formed by the given global qubits of each basis index, first qubit most significant."""
    out = np.zeros_like(idx)
    for q in qubits:
        out = (out << 1) | ((idx >> (total - 1 - q)) & 1)
    return out


def scatter_bits(values: np.ndarray, qubits: Sequence[int], total: int) -> np.ndarray:
    """Inverse of ``gather_bits``: place value bits at the given qubit positions."""
    out = np.zeros_like(values)
    k = len(qubits)
    for i, q in enumerate(qubits):
        out |= ((values >> (k - 1 - i)) & 1) << (total - 1 - q)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    layout: RegisterLayout
    normalized: bool = True

    def __post_init__(self):
        if self.amplitudes.shape != (self.layout.dim,):
            raise LayoutMismatchError(
                f"amplitude vector of length {self.amplitudes.size} does not fit a {self.layout.total}-qubit layout"
            )
        if self.normalized and abs(self.norm() - 1.0) > STATE_TOL:
            raise ValueError(f"state flagged normalized has norm {self.norm()!r}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.layout, True)

    def with_amplitudes(self, amps: np.ndarray, normalized: bool | None = None) -> "StateVector":
        return StateVector(amps, self.layout, self.normalized if normalized is None else normalized)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def register_mass(self, register: str) -> np.ndarray:
        """Marginal probability mass on each basis value of a register (unnormalized)."""
        lay = self.layout
        cube = self.probabilities().reshape(1 << lay.b_qubits, 1 << lay.a_qubits, 1 << lay.w_qubits)
        axes = {"B": (1, 2), "A": (0, 2), "W": (0, 1)}[register]
        return cube.sum(axis=axes)

    def branch(self, b: int) -> np.ndarray:
        """Amplitudes of the B = b branch, as an (A, W) matrix."""
        lay = self.layout
        cube = self.amplitudes.reshape(1 << lay.b_qubits, 1 << lay.a_qubits, 1 << lay.w_qubits)
        return cube[b]


def basis_state(layout: RegisterLayout, b: int = 0, a: int = 0, w: int = 0) -> StateVector:
    amps = np.zeros(layout.dim, dtype=complex)
    amps[layout.index(b, a, w)] = 1.0
    return StateVector(amps, layout)


def check_layout(problem: OracleProblem | ReducedProblem, layout: RegisterLayout):
    p = as_problem(problem)
    if layout.b_qubits not in (0, p.setting_width):
        raise LayoutMismatchError(
            f"B has {layout.b_qubits} qubits but settings of {p.name} are {p.setting_width} bits"
        )
    if layout.a_qubits < p.solution_width:
        raise LayoutMismatchError(
            f"A has {layout.a_qubits} qubits but solutions of {p.name} are {p.solution_width} bits"
        )


def init_superposed_input(problem: OracleProblem | ReducedProblem, layout: RegisterLayout) -> StateVector:
    """(1/sqrt|sigma|) sum_b |b>_B |0>_A |0>_W."""
    p = as_problem(problem)
    check_layout(p, layout)
    if layout.b_qubits == 0:
        raise LayoutMismatchError("superposed input needs a B register")
    amps = np.zeros(layout.dim, dtype=complex)
    amps[np.asarray(p.settings, dtype=np.int64) << (layout.a_qubits + layout.w_qubits)] = 1.0
    return StateVector(amps / np.sqrt(len(p.settings)), layout)


def cell_superposition(settings: Iterable[int], layout: RegisterLayout) -> StateVector:
    members = list(settings)
    amps = np.zeros(layout.dim, dtype=complex)
    amps[np.array(members, dtype=np.int64) << (layout.a_qubits + layout.w_qubits)] = 1.0
    return StateVector(amps / np.sqrt(len(members)), layout)


# ---------------------------------------------------------------- operators


class LinearOperator:
    """A linear map on the full register space.

    ``query`` tags the operator as one black-box function evaluation.
    """

    kind = "abstract"
    unitary = True
    query = False
    total: int

    def apply(self, amps: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self) -> "LinearOperator":
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind

    def _check(self, amps: np.ndarray):
        if amps.shape != (1 << self.total,):
            raise LayoutMismatchError(
                f"{self.describe()} acts on {self.total} qubits, state has length {amps.size}"
            )


def _move_targets_front(amps: np.ndarray, targets: Sequence[int], total: int):
    tensor = amps.reshape((2,) * total)
    rest = [q for q in range(total) if q not in targets]
    perm = list(targets) + rest
    moved = np.transpose(tensor, perm).reshape(1 << len(targets), -1)
    return moved, perm


def _move_targets_back(moved: np.ndarray, perm: list[int], total: int) -> np.ndarray:
    tensor = moved.reshape((2,) * total)
    return np.transpose(tensor, np.argsort(perm)).reshape(-1)


class DenseOp(LinearOperator):
    """A dense matrix on a subset of qubits; first target is the matrix's high bit."""

    kind = "dense-on-subset"

    def __init__(self, targets: Sequence[int], matrix: np.ndarray, total: int, label: str = "", unitary: bool = True):
        self.targets = tuple(targets)
        self.matrix = np.asarray(matrix, dtype=complex)
        self.total = total
        self.label = label
        self.unitary = unitary
        k = len(self.targets)
        if len(set(self.targets)) != k or any(not 0 <= q < total for q in self.targets):
            raise LayoutMismatchError(f"bad target qubits {self.targets} for {total} qubits")
        if self.matrix.shape != (1 << k, 1 << k):
            raise LayoutMismatchError(f"matrix shape {self.matrix.shape} for {k} targets")
        if unitary:
            err = np.abs(self.matrix.conj().T @ self.matrix - np.eye(1 << k)).max()
            if err > STATE_TOL:
                raise NotUnitaryError(f"{label or 'dense operator'} deviates from unitarity by {err:.2e}")

    def apply(self, amps):
        self._check(amps)
        moved, perm = _move_targets_front(amps, self.targets, self.total)
        return _move_targets_back(self.matrix @ moved, perm, self.total)

    def adjoint(self):
        return DenseOp(self.targets, self.matrix.conj().T, self.total, f"{self.label}^dag", self.unitary)

    def describe(self):
        return f"{self.label or 'dense'}@{list(self.targets)}"


class DiagonalPhase(LinearOperator):
    kind = "diagonal-phase"

    def __init__(self, diagonal: np.ndarray, label: str = "", query: bool = False):
        self.diagonal = np.asarray(diagonal, dtype=complex)
        self.total = int(np.log2(self.diagonal.size))
        self.label = label
        self.query = query
        if not np.allclose(np.abs(self.diagonal), 1.0, atol=1e-12):
            raise NotUnitaryError(f"{label or 'diagonal'} has entries off the unit circle")

    def apply(self, amps):
        self._check(amps)
        return amps * self.diagonal

    def adjoint(self):
        return DiagonalPhase(self.diagonal.conj(), f"{self.label}^dag", self.query)

    def describe(self):
        return self.label or self.kind


class BasisPermutation(LinearOperator):
    """|i> -> |perm[i]>."""

    kind = "basis-permutation"

    def __init__(self, perm: np.ndarray, label: str = "", query: bool = False):
        self.perm = np.asarray(perm, dtype=np.int64)
        self.total = int(np.log2(self.perm.size))
        self.label = label
        self.query = query
        if self.perm.size != 1 << self.total or not np.array_equal(np.sort(self.perm), np.arange(self.perm.size)):
            raise NotUnitaryError(f"{label or 'permutation'} is not a bijection on basis states")

    def apply(self, amps):
        self._check(amps)
        out = np.empty_like(amps)
        out[self.perm] = amps
        return out

    def adjoint(self):
        return BasisPermutation(np.argsort(self.perm), f"{self.label}^dag", self.query)

    def describe(self):
        return self.label or self.kind


class Reflection(LinearOperator):
    """g * (I - (1 - e^{i phase}) |v><v|) on the target qubits, identity elsewhere."""

    kind = "reflection"

    def __init__(self, targets: Sequence[int], vector: np.ndarray, phase: float, total: int,
                 global_phase: complex = 1.0, label: str = ""):
        self.targets = tuple(targets)
        self.vector = np.asarray(vector, dtype=complex)
        self.phase = float(phase)
        self.global_phase = complex(global_phase)
        self.total = total
        self.label = label
        if self.vector.shape != (1 << len(self.targets),):
            raise LayoutMismatchError("reflection vector does not match its targets")
        if abs(np.linalg.norm(self.vector) - 1) > STATE_TOL or abs(abs(self.global_phase) - 1) > 1e-12:
            raise NotUnitaryError("reflection needs a unit vector and a unit global phase")

    def apply(self, amps):
        self._check(amps)
        moved, perm = _move_targets_front(amps, self.targets, self.total)
        overlap = self.vector.conj() @ moved
        moved = moved - (1 - np.exp(1j * self.phase)) * np.outer(self.vector, overlap)
        return self.global_phase * _move_targets_back(moved, perm, self.total)

    def adjoint(self):
        return Reflection(self.targets, self.vector, -self.phase, self.total,
                          self.global_phase.conjugate(), f"{self.label}^dag")

    def describe(self):
        return f"{self.label or 'reflection'}@{list(self.targets)}"


H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X_GATE = np.array([[0, 1], [1, 0]], dtype=complex)


def hadamards(qubits: Iterable[int], total: int) -> list[DenseOp]:
    return [DenseOp((q,), H_GATE, total, "H") for q in qubits]


# ------------------------------------------------------------------- oracles


def _answers_on_basis(problem: OracleProblem, layout: RegisterLayout, arg_qubits, setting):
    """f_b(a) for every basis index, 0 where b is outside sigma or a outside the domain."""
    idx = np.arange(layout.dim, dtype=np.int64)
    args = gather_bits(idx, arg_qubits, layout.total)
    dom_pos = np.searchsorted(problem.domain, args)
    dom_pos = np.minimum(dom_pos, len(problem.domain) - 1)
    in_domain = problem.domain[dom_pos] == args
    if layout.b_qubits == 0:
        if setting is None:
            raise LayoutMismatchError("layout has no B register; a fixed setting is required")
        rows = np.full(idx.shape, problem.index_of(setting))
        in_sigma = np.ones(idx.shape, dtype=bool)
    else:
        if setting is not None:
            raise LayoutMismatchError("a fixed setting is only meaningful without a B register")
        bvals, _, _ = layout.fields(idx)
        rows = np.searchsorted(problem.settings, bvals)
        rows = np.minimum(rows, len(problem.settings) - 1)
        in_sigma = problem.settings[rows] == bvals
    f = problem.answers[rows, dom_pos].astype(np.int64)
    return np.where(in_sigma & in_domain, f, 0), idx


def xor_oracle(problem, layout: RegisterLayout, arg_qubits=None, target_qubits=None, setting=None) -> BasisPermutation:
    """|b>|a>|w> -> |b>|a>|w xor f_b(a)>, by default with a in A and w in W."""
    p = as_problem(problem)
    check_layout(p, layout)
    arg_qubits = layout.qubits("A") if arg_qubits is None else tuple(arg_qubits)
    target_qubits = layout.qubits("W") if target_qubits is None else tuple(target_qubits)
    if len(arg_qubits) != p.arg_width:
        raise LayoutMismatchError(f"argument register has {len(arg_qubits)} qubits, need {p.arg_width}")
    if len(target_qubits) < p.answer_width:
        raise LayoutMismatchError(
            f"answer target has {len(target_qubits)} qubits, need {p.answer_width}"
        )
    target_qubits = target_qubits[len(target_qubits) - p.answer_width:]
    f, idx = _answers_on_basis(p, layout, arg_qubits, setting)
    perm = idx ^ scatter_bits(f, target_qubits, layout.total)
    return BasisPermutation(perm, "xor-oracle", query=True)


def phase_oracle(problem, layout: RegisterLayout, phase: float = np.pi, arg_qubits=None, setting=None) -> DiagonalPhase:
    """|b>|a> -> e^{i phase f_b(a)} |b>|a>; phase = pi is the usual (-1)^f form."""
    p = as_problem(problem)
    if p.answer_width != 1:
        raise PhaseNeedsBinaryError(f"{p.name} answers are {p.answer_width} bits wide")
    check_layout(p, layout)
    arg_qubits = layout.qubits("A") if arg_qubits is None else tuple(arg_qubits)
    if len(arg_qubits) != p.arg_width:
        raise LayoutMismatchError(f"argument register has {len(arg_qubits)} qubits, need {p.arg_width}")
    f, _ = _answers_on_basis(p, layout, arg_qubits, setting)
    return DiagonalPhase(np.exp(1j * phase * f), "phase-oracle", query=True)


def apply_xor_oracle(state: StateVector, problem, layout: RegisterLayout | None = None, **kw) -> StateVector:
    layout = layout or state.layout
    if layout != state.layout:
        raise LayoutMismatchError("state layout differs from the requested layout")
    op = xor_oracle(problem, layout, **kw)
    return state.with_amplitudes(op.apply(state.amplitudes))


def apply_phase_oracle(state: StateVector, problem, layout: RegisterLayout | None = None, **kw) -> StateVector:
    layout = layout or state.layout
    if layout != state.layout:
        raise LayoutMismatchError("state layout differs from the requested layout")
    op = phase_oracle(problem, layout, **kw)
    return state.with_amplitudes(op.apply(state.amplitudes))


def apply_operator(state: StateVector, op: LinearOperator) -> StateVector:
    return state.with_amplitudes(op.apply(state.amplitudes))


# -------------------------------------------------------------- measurement


@dataclass(frozen=True)
class MeasurementSpec:
    """A partial measurement of register B or A.

    Each functional is a bit mask over the register (position 0 is the
    leftmost bit); the outcome is the string of parities, one per
    functional. A coordinate measurement uses single-bit masks.
    """

    register: str
    width: int
    functionals: tuple[int, ...]
    mode: str = "gf2-linear"
    positions: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.register not in ("A", "B"):
            raise ValueError(f"register must be 'A' or 'B', not {self.register!r}")
        if any(f <= 0 or f >> self.width for f in self.functionals):
            raise ValueError("functionals must be nonzero masks within the register width")
        from .gf2 import gf2_rank

        if gf2_rank(list(self.functionals), self.width) != len(self.functionals):
            raise ValueError("functionals must be linearly independent")

    @classmethod
    def coordinate(cls, register: str, width: int, positions: Iterable[int]) -> "MeasurementSpec":
        pos = tuple(sorted(set(positions)))
        if any(not 0 <= i < width for i in pos):
            raise ValueError(f"positions {pos} outside a {width}-bit register")
        return cls(register, width, tuple(1 << (width - 1 - i) for i in pos), "coordinate", pos)

    @classmethod
    def gf2(cls, register: str, width: int, functionals: Iterable[int]) -> "MeasurementSpec":
        return cls(register, width, tuple(functionals), "gf2-linear")

    @property
    def size(self) -> int:
        return len(self.functionals)

    def outcome_of(self, value: int | np.ndarray):
        """Outcome index (parities packed, first functional most significant)."""
        out = 0
        for f in self.functionals:
            out = (out << 1) | (np.bitwise_count(np.asarray(value) & f) & 1)
        return out

    def label_of(self, value: int) -> str:
        return fmt_bits(int(self.outcome_of(value)), self.size)

    def outcomes(self) -> list[str]:
        return [fmt_bits(i, self.size) for i in range(1 << self.size)]

    def describe(self) -> str:
        if self.mode == "coordinate" and self.positions is not None:
            return f"{self.register}[{','.join(map(str, self.positions))}]"
        masks = ",".join(fmt_bits(f, self.width) for f in self.functionals)
        return f"{self.register}<{masks}>"


def project(state: StateVector, spec: MeasurementSpec, outcome: str | int):
    """Zero the amplitudes outside the outcome cell.

    Returns the unnormalized projected state and the Born probability of
    the outcome.
    """
    if isinstance(outcome, str):
        if len(outcome) != spec.size or set(outcome) - {"0", "1"}:
            raise UnknownOutcomeError(f"{outcome!r} is not an outcome of {spec.describe()}")
        outcome = int(outcome, 2) if outcome else 0
    if not 0 <= outcome < (1 << spec.size):
        raise UnknownOutcomeError(f"{outcome!r} is not an outcome of {spec.describe()}")
    lay = state.layout
    reg_width = lay.b_qubits if spec.register == "B" else lay.a_qubits
    if reg_width != spec.width:
        raise LayoutMismatchError(f"{spec.describe()} expects {spec.width} qubits in {spec.register}")
    idx = np.arange(lay.dim, dtype=np.int64)
    b, a, _ = lay.fields(idx)
    reg = b if spec.register == "B" else a
    keep = spec.outcome_of(reg) == outcome
    amps = np.where(keep, state.amplitudes, 0)
    total = state.norm() ** 2
    prob = float(np.vdot(amps, amps).real / total) if total > 0 else 0.0
    return StateVector(amps, lay, normalized=False), prob


# ---------------------------------------------------------------- dynamics


def _steps(algo) -> Sequence[LinearOperator]:
    return algo.steps if hasattr(algo, "steps") else algo


def apply_forward(state: StateVector, algo) -> StateVector:
    if hasattr(algo, "layout") and algo.layout != state.layout:
        raise LayoutMismatchError("algorithm layout differs from the state's layout")
    amps = state.amplitudes
    for op in _steps(algo):
        amps = op.apply(amps)
    return state.with_amplitudes(amps)


def apply_backward(state: StateVector, algo) -> StateVector:
    """Propagate backward in time: adjoints in reverse order."""
    if hasattr(algo, "layout") and algo.layout != state.layout:
        raise LayoutMismatchError("algorithm layout differs from the state's layout")
    amps = state.amplitudes
    for op in reversed(_steps(algo)):
        amps = op.adjoint().apply(amps)
    return state.with_amplitudes(amps)


def fidelity(s1: StateVector | np.ndarray, s2: StateVector | np.ndarray) -> float:
    """|<s1|s2>|^2 of the normalized states."""
    v1 = s1.amplitudes if isinstance(s1, StateVector) else np.asarray(s1)
    v2 = s2.amplitudes if isinstance(s2, StateVector) else np.asarray(s2)
    if v1.shape != v2.shape:
        raise LengthMismatchError(f"states of length {v1.size} and {v2.size}")
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if n1 == 0 or n2 == 0:
        raise ValueError("fidelity of a zero vector is undefined")
    return float(min(1.0, abs(np.vdot(v1, v2)) ** 2 / (n1 * n1 * n2 * n2)))


def dump_state(state: StateVector, threshold: float = DUMP_THRESHOLD) -> str:
    """``bitstring<TAB>re<TAB>im`` per amplitude above threshold, in basis order."""
    lines = []
    total = state.layout.total
    for i in np.flatnonzero(np.abs(state.amplitudes) > threshold):
        z = state.amplitudes[i]
        lines.append(f"{fmt_bits(int(i), total)}\t{z.real:.12g}\t{z.imag:.12g}")
    return "\n".join(lines) + ("\n" if lines else "")
