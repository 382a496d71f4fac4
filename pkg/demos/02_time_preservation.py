"""
Time preservation and the selective memory
==========================================

A set of forms is time preserving when one order on their values fits
every form at once.
"""

from refform import all_referring_forms, check_time_preservation, corpus, lemma_check
from refform.order import circuit_precedence_graph, replay_witness
from refform.verify import find_counterexample_selective

# all latch patterns of two free-running registers, horizon 5
mcd = corpus.load("mcd_free")
forms = all_referring_forms(mcd, 5)
verdict = check_time_preservation(forms)
print(len(forms), "forms, preserving:", verdict.preserving)
print("ordered pairs:", len(verdict.order))

# every one of them only ever moves to newer samples
print("lemma holds:", all(lemma_check(f) for f in forms))

# two memories and a mux: the control can show the samples in either order
selmem = corpus.load("selmem")
verdict = check_time_preservation(circuit_precedence_graph(selmem, 10))
print("selective memory preserving:", verdict.preserving)
for e in verdict.witness:
    print(f"  {e.source} -> {e.target}  form {e.form} [{verdict.schedules[e.form].to_spec(selmem)}] t={e.t1},{e.t2}")
print("witness replays:", replay_witness(verdict))

# a concrete pair of runs with the two values swapped
w = find_counterexample_selective(10)
print("first :", w.first_schedule.to_spec(selmem), "steps", w.a, w.b)
print("second:", w.second_schedule.to_spec(selmem), "steps", w.c, w.d)
print("values:", *w.values)
