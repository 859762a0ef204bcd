"""Contract sweep behind ``tsow verify``: invariance, instances, rebuild, operator properties."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algorithms import AlgorithmUnitary
from .errors import InstanceMismatchError, NoValidPairError
from .oracle import as_problem, fmt_bits
from .statevector import (
    NORM_DRIFT_TOL,
    STATE_TOL,
    BasisPermutation,
    StateVector,
    apply_backward,
    apply_forward,
    init_superposed_input,
)
from .symmetrization import bob_invariance_check, enumerate_instances, make_instance, rebuild_check


@dataclass
class Check:
    name: str
    passed: bool
    value: float | int | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value, "detail": self.detail}


def random_state(layout, rng: np.random.Generator) -> StateVector:
    z = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return StateVector(z / np.linalg.norm(z), layout)


def norm_drift(algo: AlgorithmUnitary, rng: np.random.Generator, trials: int = 100) -> float:
    """Worst |‖Uψ‖ - 1| over random (operator, state) draws."""
    worst = 0.0
    for _ in range(trials):
        op = algo.steps[int(rng.integers(len(algo.steps)))]
        psi = random_state(algo.layout, rng)
        worst = max(worst, abs(float(np.linalg.norm(op.apply(psi.amplitudes))) - 1.0))
    return worst


def roundtrip_error(algo: AlgorithmUnitary, rng: np.random.Generator, trials: int = 5) -> float:
    worst = 0.0
    for _ in range(trials):
        psi = random_state(algo.layout, rng)
        back = apply_backward(apply_forward(psi, algo), algo)
        worst = max(worst, float(np.max(np.abs(back.amplitudes - psi.amplitudes))))
    return worst


def xor_involution_error(algo: AlgorithmUnitary, rng: np.random.Generator) -> float | None:
    """max |O O ψ - ψ| for the algorithm's xor oracle steps (None when it has none)."""
    oracles = [op for op in algo.steps if op.query and isinstance(op, BasisPermutation)]
    if not oracles:
        return None
    psi = random_state(algo.layout, rng).amplitudes
    return max(float(np.max(np.abs(op.apply(op.apply(psi)) - psi))) for op in oracles)


def b_mass_drift(problem, algo: AlgorithmUnitary) -> float:
    """Per-setting B mass before and after Alice's action."""
    start = init_superposed_input(problem, algo.layout)
    end = apply_forward(start, algo)
    return float(np.max(np.abs(start.register_mass("B") - end.register_mass("B"))))


def verify_problem(problem, algo: AlgorithmUnitary, mode: str, seed: int = 0) -> list[Check]:
    p = as_problem(problem)
    rng = np.random.default_rng(seed)
    checks = []

    worst_bob, pairs, missing, mismatch = 1.0, 0, [], []
    for b in (int(x) for x in p.settings):
        try:
            instances = enumerate_instances(p, b, mode)
        except NoValidPairError:
            missing.append(fmt_bits(b, p.setting_width))
            continue
        for inst in instances:
            pairs += 1
            worst_bob = min(worst_bob, bob_invariance_check(p, algo, inst.pair, b))
            try:
                make_instance(p, algo, inst.pair, b)
            except InstanceMismatchError as exc:
                mismatch.append(str(exc))
    checks.append(Check("bob_invariance", 1 - worst_bob <= STATE_TOL, worst_bob, f"{pairs} (setting, pair) combinations"))
    checks.append(Check("instance_input_matches_cell", not mismatch, len(mismatch), "; ".join(mismatch[:3])))
    checks.append(Check("valid_pair_coverage", True, len(missing), ("no valid pair: " + ",".join(missing)) if missing else ""))

    rebuild = rebuild_check(p, algo, mode)
    checks.append(Check("rebuild_support", rebuild.support_ok, None))
    weights = ",".join(f"{fmt_bits(b, p.setting_width)}:{w:.6g}" for b, w in rebuild.weight_vector.items())
    # proportionality is a measured outcome, not a contract
    checks.append(Check("rebuild_proportional", True, rebuild.fidelity, f"proportional={rebuild.proportional}; weights {weights}"))

    drift = norm_drift(algo, rng)
    checks.append(Check("norm_drift", drift <= NORM_DRIFT_TOL, drift))
    err = roundtrip_error(algo, rng)
    checks.append(Check("backward_forward_identity", err <= STATE_TOL, err))
    inv = xor_involution_error(algo, rng)
    if inv is not None:
        checks.append(Check("xor_oracle_involution", inv <= STATE_TOL, inv))
    mass = b_mass_drift(p, algo)
    checks.append(Check("b_mass_invariance", mass <= STATE_TOL, mass))
    return checks


__all__ = [
    "Check",
    "b_mass_drift",
    "norm_drift",
    "random_state",
    "roundtrip_error",
    "verify_problem",
    "xor_involution_error",
]
