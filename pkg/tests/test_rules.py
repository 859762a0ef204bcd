from __future__ import annotations

import pytest

from tsow.algorithms import build_for, calibrate_long
from tsow.oracle import make_builtin, make_grover
from tsow.query import brute_force_depth, dt_depth
from tsow.rules import compare, predict, simon_advanced_knowledge_probe, simon_controller
from tsow.symmetrization import COORDINATE, GF2


def test_predict_grover2(grover2):
    for mode in (GF2, COORDINATE):
        report = predict(grover2, mode)
        assert report.global_prediction == 1
        assert report.all_agree and not report.no_valid_pair
    assert all(len(r.instances) == 3 for r in predict(grover2, GF2).records)


def test_predict_dj2(dj2):
    assert predict(dj2).global_prediction == 1


@pytest.mark.parametrize("n,expected", [(2, 1), (4, 3)])
def test_grover_prediction_is_sqrt_minus_one(n, expected):
    assert predict(make_grover(n)).global_prediction == expected == (1 << (n // 2)) - 1


def test_grover4_gf2_agrees_with_coordinate():
    assert predict(make_grover(4), GF2).global_prediction == 3


def test_setting_prediction_is_max_of_instances():
    report = predict(make_grover(3), COORDINATE, near_even=True)
    # cells of size 2 and 4 give reduced depths 1 and 3
    assert not report.all_agree
    for rec in report.records:
        assert rec.prediction == max(rec.depths) == 3
    assert report.global_prediction == 3


def test_no_valid_pair_is_marked_not_fatal():
    report = predict(make_grover(3), COORDINATE)
    assert len(report.no_valid_pair) == 8
    assert report.global_prediction is None
    doc = report.to_dict()
    assert doc["no_valid_pair"][0] == "000"


@pytest.mark.parametrize("name,n", [("grover", 2), ("grover", 4), ("dj", 2), ("dj", 3), ("bv", 2), ("bv", 4), ("simon", 2)])
def test_prediction_not_above_classical(name, n):
    p = make_builtin(name, n)
    report = predict(p)
    assert report.global_prediction <= dt_depth(p)


@pytest.mark.parametrize("name,n", [("grover", 2), ("dj", 2), ("bv", 2)])
def test_reported_depths_match_plain_minimax(name, n):
    p = make_builtin(name, n)
    for rec in predict(p).records:
        for cell, depth in rec.instances:
            assert brute_force_depth(p, cell) == depth


@pytest.mark.parametrize(
    "name,n,row",
    [("grover", 2, (3, 1, 1)), ("dj", 2, (3, 1, 1)), ("grover", 4, (15, 3, None))],
)
def test_compare_rows(name, n, row):
    p = make_builtin(name, n)
    r = compare(p, build_for(name, n, p), n)
    assert (r.classical_depth, r.predicted_quantum) == row[:2]
    if row[2] is None:
        assert 3 <= r.simulated_quantum_queries <= 5
        assert r.simulated_quantum_queries == calibrate_long(n).iterations
    else:
        assert r.simulated_quantum_queries == row[2]
    assert r.simulated_success == pytest.approx(1, abs=1e-6)


def test_compare_annotates_dj_workspace(dj2, dj2_algo):
    row = compare(dj2, dj2_algo, 2)
    assert any("canonical" in a for a in row.annotations)


def test_compare_budget_annotation():
    p = make_grover(4)
    row = compare(p, build_for("grover", 4, p), 4, budget=100)
    assert row.classical_depth is None
    assert any(a.startswith("SEARCH_BUDGET") for a in row.annotations)
    assert row.predicted_quantum == 3


def test_compare_without_algorithm(grover2):
    row = compare(grover2, None, 2)
    assert row.simulated_quantum_queries is None
    assert row.predicted_quantum == 1


def test_compare_bv_exploratory():
    p = make_builtin("bv", 2)
    row = compare(p, build_for("bv", 2, p), 2)
    assert any(a.startswith("exploratory") for a in row.annotations)
    assert predict(p).exploratory


def test_compare_simon(simon2):
    row = compare(simon2, build_for("simon", 2, simon2), 2, seed=0)
    worst, mean, rate = simon_controller(2, 0, simon2)
    assert row.simulated_quantum_queries == worst
    assert rate == 1.0 and mean >= 1
    assert row.classical_depth == 3 and row.predicted_quantum == 1


def test_simon_probe():
    report = simon_advanced_knowledge_probe(2)
    assert report.oracle_agreement
    assert report.repetition_rejected
    assert len(report.settings) == 36
    doc = report.to_dict()
    assert doc["claim_one_evaluation"].startswith(("confirmed", "not confirmed"))
    # half tables exist for every setting and each gives a depth-1 instance
    aligned = {e.setting for e in report.valid_entries if e.entry_aligned}
    assert len(aligned) == 36
    assert report.depth_one_everywhere


def test_simon_probe_repetition_halves_rejected():
    report = simon_advanced_knowledge_probe(2)
    repeated = [e for e in report.entries if e.half_repeats]
    assert repeated and not any(e.valid for e in repeated)


def test_simon_probe_n_guard():
    with pytest.raises(ValueError):
        simon_advanced_knowledge_probe(3)
