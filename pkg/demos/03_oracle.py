"""
Checking the analysis by simulation
===================================

Run the circuit on every binary input stream and flip one input at a time.
"""

from refform import corpus, parse, restriction_map, run, schedule_from_clocks, semantic_influence
from refform.oracle import causality_check, instantiate_tupling

dff = parse("circuit d { input I; clock c edges [0, 4]; ff F clock c from {I}; output from {F}; }")
sched = schedule_from_clocks(dff, 5)

# before the first latch the register holds the bottom marker
print(run(instantiate_tupling(dff), [1, 0, 0, 0, 1], sched))

# tupling hides nothing, so perturbation finds exactly the symbolic sets
sel = corpus.load("selmem")
s = schedule_from_clocks(sel, 5, {"sel": [0, 1, 1, 0, 1]}, {"M1": "10100", "M2": "01010"})
print(semantic_influence(sel, s) == restriction_map(sel, s))
print(causality_check(instantiate_tupling(sel), 5, schedule=s))

# with xor two copies of the same sample cancel
reconv = parse(
    "circuit r { input I; clock c period 2 offset 0; ff A clock c from {I}; ff B clock c from {I}; output from {A, B}; }"
)
s = schedule_from_clocks(reconv, 4)
print("symbolic:", [str(p) for p in restriction_map(reconv, s).past])
print("xor     :", [str(p) for p in semantic_influence(reconv, s, mode="xor").past])
