import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import assert_sound
from refform import corpus
from refform.influence import all_referring_forms, iter_schedules, restriction_map
from refform.model import ReferringForm, RefSet, schedule_from_clocks
from refform.order import (
    check_time_preservation,
    circuit_precedence_graph,
    lemma_check,
    precedence_graph,
    replay_witness,
    unified_image,
)
from strategies import form_sets

A = RefSet([("I", 0)])
B = RefSet([("I", 1)])


def dff_form(H=9):
    c = corpus.load("dff")
    return restriction_map(c, schedule_from_clocks(c, H))


def const_empty(H=4):
    return ReferringForm.from_steps([[]] * H)


def test_unified_image_single_empty_form():
    assert unified_image([const_empty()]) == {RefSet()}


def test_unified_image_dff():
    assert unified_image([dff_form()]) == {RefSet(), A, RefSet([("I", 4)])}


def test_unified_image_rejects_empty_input():
    with pytest.raises(ValueError):
        unified_image([])
    with pytest.raises(ValueError):
        check_time_preservation([])


def test_precedence_graph_constant_form_has_no_edges():
    g = precedence_graph([const_empty()])
    assert g.nodes == {RefSet()} and not g.edges


def test_precedence_graph_dff_chain():
    g = precedence_graph([dff_form()])
    assert set(g.edges) == {(RefSet(), A), (A, RefSet([("I", 4)]))}


def test_periodic_dff_is_time_preserving():
    c = corpus.load("dff")
    v = check_time_preservation(all_referring_forms(c, 12))
    assert v.preserving and v.witness is None


def test_aba_form_not_preserving():
    form = ReferringForm.from_steps([[], [("I", 0)], [("I", 1)], [("I", 0)]])
    v = check_time_preservation([form])
    assert not v.preserving
    assert [(e.source, e.target) for e in v.witness] == [(A, B), (B, A)]
    assert replay_witness(v)


def test_repeated_values_are_not_violations():
    form = ReferringForm.from_steps([[], [("I", 0)], [("I", 0)], [("I", 0)]])
    assert check_time_preservation([form]).preserving


def test_selmem_not_preserving_with_two_form_witness():
    c = corpus.load("selmem")
    v = check_time_preservation(circuit_precedence_graph(c, 10))
    assert not v.preserving
    assert len(v.witness) == 2
    assert v.witness[0].form != v.witness[1].form
    assert {v.witness[0].source, v.witness[0].target} == {RefSet([("I1", 0)]), RefSet([("I2", 0)])}
    assert replay_witness(v)
    for e in v.witness:
        assert restriction_map(c, v.schedules[e.form]) == v.forms[e.form]


def test_circuit_graph_matches_explicit_forms():
    for name, H in [("selmem", 3), ("selmem", 5), ("mcd_free", 5), ("dff", 9)]:
        c = corpus.load(name)
        g1 = circuit_precedence_graph(c, H)
        g2 = precedence_graph(all_referring_forms(c, H))
        assert g1.nodes == g2.nodes
        assert set(g1.edges) == set(g2.edges)
        for (u, v), evs in g1.edges.items():
            for ev in evs:
                f = g1.forms[ev.form]
                assert f.past[ev.t1] == u and f.past[ev.t2] == v


def test_lemma_check_examples():
    assert lemma_check(dff_form())
    assert lemma_check(const_empty())
    bad = ReferringForm.from_steps([[], [], [("I", 1)], [("I", 0)]])
    res = lemma_check(bad)
    assert not res and res.pair == (2, 3)


def test_lemma_failure_does_not_imply_non_preservation():
    bad = ReferringForm.from_steps([[], [], [("I", 1)], [("I", 0)]])
    assert not lemma_check(bad)
    assert check_time_preservation([bad]).preserving


def test_lemma_emptying_reference_fails():
    f = ReferringForm.from_steps([[], [("I", 0)], []])
    assert lemma_check(f).pair == (1, 2)


def test_lemma_per_port():
    f = ReferringForm.from_steps([[], [("I1", 0)], [("I2", 1)], [("I2", 1), ("I1", 0)]])
    assert lemma_check(f)
    res = lemma_check(f, per_port=True)
    assert not res and res.port == "I1" and res.pair == (1, 2)


def test_lemma_holds_on_single_port_mcd_forms():
    c = corpus.load("mcd_free")
    for s in iter_schedules(c, 4):
        assert lemma_check(restriction_map(c, s))


@settings(max_examples=300, deadline=None)
@given(form_sets(), st.randoms(use_true_random=False))
def test_verdict_sound_and_order_insensitive(forms, rnd):
    v = assert_sound(forms)
    shuffled = list(forms) + [forms[0]]
    rnd.shuffle(shuffled)
    v2 = check_time_preservation(shuffled)
    assert v2.preserving == v.preserving
    assert v2.witness == v.witness
