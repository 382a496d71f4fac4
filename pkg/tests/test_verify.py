import json

import pytest

from refform import corpus
from refform.influence import all_referring_forms, restriction_map
from refform.model import ReferringForm, RefSet, schedule_from_clocks
from refform.order import check_time_preservation
from refform.verify import (
    check_circuit,
    enumerate_mcd_circuits,
    find_counterexample_selective,
    lemma_violations,
    mcd_circuit_count,
    oracle_spot_check,
    verify_lemma,
    verify_theorem,
)


@pytest.mark.parametrize("k, n", [(0, 1), (1, 9), (2, 343)])
def test_circuit_counts(k, n):
    circuits = list(enumerate_mcd_circuits(k))
    assert len(circuits) == n == mcd_circuit_count(k)
    assert len({(c.ffs, c.output) for c in circuits}) == n
    assert len({c.name for c in circuits}) == n


def test_enumeration_is_deterministic_and_in_class():
    assert list(enumerate_mcd_circuits(2)) == list(enumerate_mcd_circuits(2))
    for c in enumerate_mcd_circuits(2):
        assert c.data_ports == ("I",) and c.is_mcd_class()
        assert all(ff.data_input.alternatives[0] for ff in c.ffs)
        assert c.output.alternatives[0]


def test_enumeration_bound():
    with pytest.raises(ValueError):
        list(enumerate_mcd_circuits(3))
    assert len(list(enumerate_mcd_circuits(3, max_ffs=3))) == 15**4


def test_selmem_outside_class():
    assert not corpus.load("selmem").is_mcd_class()


def test_theorem_small():
    r = verify_theorem(1, 4, oracle_sample=20)
    assert r.ok and r.circuits == 9 and r.schedules_per_circuit == 16 and r.checked == 144
    assert r.text().splitlines()[0] == "theorem: checked 9 circuits × 16 schedules: 0 failures"
    assert r.oracle_checked == 20 and not r.oracle_mismatches


def test_lemma_small():
    r = verify_lemma(1, 4, oracle_sample=0)
    assert r.ok and r.checked == 144
    assert r.text().splitlines()[0] == "lemma: checked 9 circuits × 16 schedules: 0 violations"


def test_self_loops_counted():
    # F1 fed by itself: 2 of the 3 source subsets for one flip-flop
    assert verify_theorem(1, 2, oracle_sample=0).self_loop_circuits == 6
    circuits = list(enumerate_mcd_circuits(2))
    assert verify_theorem(2, 1, oracle_sample=0).self_loop_circuits == sum(c.has_self_loop() for c in circuits)


def test_report_json_shape():
    doc = verify_theorem(1, 3, oracle_sample=5).to_json()
    assert doc["checked"] == 9 * 8 and doc["failures"] == []
    assert json.loads(json.dumps(doc)) == doc


def test_reports_are_deterministic():
    a = verify_theorem(2, 3, oracle_sample=10, seed=7)
    b = verify_theorem(2, 3, oracle_sample=10, seed=7)
    c = verify_theorem(2, 3, oracle_sample=10, seed=7, workers=2)
    assert a.text() == b.text() == c.text()
    assert a.to_json() == c.to_json()


def test_harness_agrees_with_form_level_check():
    # mask-level harness versus the public form-set checker, circuit by circuit
    for c in enumerate_mcd_circuits(1):
        verdict = check_time_preservation(all_referring_forms(c, 5))
        count, failures = check_circuit(c, 5)
        assert count == 32
        assert verdict.preserving == (not failures)


def test_harness_detects_planted_theorem_failure():
    count, failures = check_circuit(corpus.load("selmem"), 4)
    assert count == 4**4 * 2**4
    assert len(failures) == 1
    values = [(w["from"], w["to"]) for w in failures[0]["witness"]]
    assert values[0] == values[1][::-1]


def test_harness_detects_planted_lemma_violation():
    _, failures = check_circuit(corpus.load("selmem"), 4, "lemma")
    assert failures
    f = ReferringForm.from_json(failures[0]["form"])
    a, b = failures[0]["pair"]
    assert (f.past[a].max_time() or -1) > (f.past[b].max_time() or -1) or (f.past[a] and not f.past[b])


def test_lemma_violations_on_planted_form():
    good = ReferringForm.from_steps([[], [("I", 0)], [("I", 0)], [("I", 2)]])
    bad = ReferringForm.from_steps([[], [], [("I", 1)], [("I", 0)]])
    assert lemma_violations([good, bad, good]) == [(1, (2, 3))]


def test_check_circuit_rejects_unknown_kind():
    with pytest.raises(ValueError):
        check_circuit(corpus.load("dff"), 3, "proof")


def test_oracle_spot_check_counts_sample():
    checked, mismatches = oracle_spot_check(enumerate_mcd_circuits(2), 4, 25, seed=3)
    assert checked == 25 and mismatches == []


def _assert_conflict(w):
    rho, rho2 = w.first, w.second
    assert w.a < w.b and w.c < w.d
    assert rho.past[w.a] == rho2.past[w.d]
    assert rho.past[w.b] == rho2.past[w.c]
    assert rho.past[w.a] != rho.past[w.b]
    c = corpus.load("selmem")
    assert restriction_map(c, w.first_schedule) == rho
    assert restriction_map(c, w.second_schedule) == rho2


def test_selective_conflict_horizon_10():
    w = find_counterexample_selective(10)
    _assert_conflict(w)
    assert all(v for v in w.values)


def test_selective_conflict_shortest_horizon():
    # the shortest horizon with a conflict is 3: both memories latch at 0, the mux flips once
    assert find_counterexample_selective(2) is None
    _assert_conflict(find_counterexample_selective(3))


def test_pinned_mux_has_no_conflict():
    assert find_counterexample_selective(8, fixed_choices={"sel": 0}) is None
    assert find_counterexample_selective(8, fixed_choices={"sel": 1}) is None


def test_offsets_three_and_seven_apart_at_horizon_10():
    # a conflict with a = n, b = n+3 in the first form and c = n+3, d = n+7 in the second
    c = corpus.load("selmem")
    H, n = 10, 1
    latch = {"M1": "1000000000", "M2": "0100000000"}
    rho = restriction_map(c, schedule_from_clocks(c, H, {"sel": [0] * 4 + [1] * 6}, latch))
    rho2 = restriction_map(c, schedule_from_clocks(c, H, {"sel": [1] * 7 + [0] * 3}, latch))
    assert rho.past[n] == rho2.past[n + 7] == RefSet([("I1", 0)])
    assert rho.past[n + 3] == rho2.past[n + 3] == RefSet([("I2", 1)])
    assert not check_time_preservation([rho, rho2]).preserving
