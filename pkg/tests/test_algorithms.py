from __future__ import annotations

import math

import numpy as np
import pytest

from tsow.algorithms import (
    build_bernstein_vazirani,
    build_deutsch_jozsa,
    build_for,
    build_grover,
    build_grover_long,
    build_simon_circuit,
    calibrate_long,
    run_extended,
    run_relativized,
    run_simon,
)
from tsow.errors import OutputNotCanonicalError, SamplingStallError, UseLongVariantError
from tsow.gf2 import dot
from tsow.oracle import make_simon
from tsow.statevector import fidelity


def _closed_form(n):
    """Smallest exact iteration count and matched phase for one marked item in 2^n."""
    beta = math.asin(1 / math.sqrt(1 << n))
    j = math.ceil(math.pi / (4 * beta) - 0.5)
    phase = 2 * math.asin(math.sin(math.pi / (4 * j + 2)) / math.sin(beta))
    return j, phase


@pytest.mark.parametrize("n", range(2, 9))
def test_long_calibration_matches_closed_form(n):
    j, phase = _closed_form(n)
    params = calibrate_long(n)
    assert params.iterations == j
    assert params.phase == pytest.approx(phase, abs=1e-6)
    assert 1 - params.success <= 1e-12


def test_long_counts_frozen():
    assert [calibrate_long(n).iterations for n in range(2, 9)] == [1, 2, 3, 4, 6, 9, 13]


def test_plain_grover_exact(grover2, grover2_algo):
    res = run_relativized(grover2, grover2_algo)
    assert res.queries_used == 1
    assert all(abs(v - 1) <= 1e-9 for v in res.per_setting_success.values())
    assert res.canonical and res.strict_fidelity == pytest.approx(1, abs=1e-9)


def test_plain_grover_refuses_other_sizes():
    with pytest.raises(UseLongVariantError):
        build_grover(3)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_long_grover_statevector(n):
    algo = build_grover_long(n)
    res = run_relativized(algo.problem, algo)
    assert res.queries_used == calibrate_long(n).iterations
    assert min(res.per_setting_success.values()) >= 1 - 1e-6


def test_extended_run_reads_the_drawer(grover2, grover2_algo):
    res = run_extended(grover2, grover2_algo, 0b01)
    mass = res.output_state.register_mass("A")
    assert mass[0b01] == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_deutsch_jozsa(n):
    algo = build_deutsch_jozsa(n)
    res = run_relativized(algo.problem, algo)
    assert res.queries_used == 1
    assert all(abs(v - 1) <= 1e-9 for v in res.per_setting_success.values())
    # the argument register keeps setting-dependent garbage
    assert res.workspace_clean is False
    assert res.canonical


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bernstein_vazirani_exact(n):
    algo = build_bernstein_vazirani(n)
    res = run_relativized(algo.problem, algo)
    assert res.queries_used == 1
    assert res.strict_fidelity == pytest.approx(1, abs=1e-9)


def test_simon_relativized_is_not_canonical(simon2):
    algo = build_simon_circuit(2, simon2)
    with pytest.raises(OutputNotCanonicalError) as info:
        run_relativized(simon2, algo)
    assert info.value.result is not None
    assert info.value.result.queries_used == 1


def test_simon_samples_orthogonal_and_period_recovered(simon2):
    for b in (int(x) for x in simon2.settings):
        res = run_simon(2, seed=0, setting=b, problem=simon2)
        p = simon2.solution(b)
        assert all(dot(y, p) == 0 for y in res.samples)
        assert res.sampled_solution == p


def test_simon_mean_rounds_small():
    problem = make_simon(3)
    rng = np.random.default_rng(7)
    settings = rng.choice(problem.settings, size=4, replace=False)
    runs = [run_simon(3, seed=s, setting=int(b), problem=problem).queries_used
            for s in range(25) for b in settings]
    # rank 2 from uniform samples of a 2-dim space takes 4/3 + 2 rounds on average
    assert np.mean(runs) <= 4


def test_simon_mean_rounds_n2_over_seeds(simon2):
    runs = [run_simon(2, seed=s, problem=simon2).queries_used for s in range(1000)]
    assert np.mean(runs) <= 4
    assert abs(np.mean(runs) - 2) < 0.2


def test_simon_random_setting_is_seeded(simon2):
    a = run_simon(2, seed=5, problem=simon2)
    b = run_simon(2, seed=5, problem=simon2)
    assert a.samples == b.samples and a.sampled_solution == b.sampled_solution


def test_simon_stall_detected(simon2, monkeypatch):
    import tsow.algorithms as alg

    # a distribution concentrated on y = 0 never reaches rank n-1
    monkeypatch.setattr(alg, "_simon_distribution", lambda *a: np.array([1.0, 0, 0, 0]))
    with pytest.raises(SamplingStallError):
        run_simon(2, seed=0, setting=int(simon2.settings[0]), problem=simon2)


def test_build_for_keys():
    assert build_for("grover", 2).query_count == 1
    assert build_for("grover", 4).name == "grover-long"
    with pytest.raises(KeyError):
        build_for("shor", 2)


def test_strict_fidelity_is_fidelity_to_canonical(grover2, grover2_algo):
    from tsow.algorithms import canonical_output

    res = run_relativized(grover2, grover2_algo)
    assert res.strict_fidelity == pytest.approx(fidelity(res.output_state, canonical_output(grover2, grover2_algo.layout)))
