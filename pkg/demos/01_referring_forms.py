"""
Referring forms of clocked circuits
===================================

Which past input occurrences can the output see at each step?
"""

from refform import corpus, restriction_map, schedule_from_clocks
from refform.render import ascii_timeline, form_table

# a single flip-flop on a period-4 clock
dff = corpus.load("dff")
print(corpus.source("dff"))

# periodic clocks resolve to a fixed latch/hold pattern
sched = schedule_from_clocks(dff, 9)
print(sched.to_spec(dff))

# the output reads the register before it updates, so it holds I@0 for a full period
print(form_table(restriction_map(dff, sched)))

# feeding the register back into itself keeps every sample it ever took
sync = corpus.load("sync")
print(form_table(restriction_map(sync, schedule_from_clocks(sync, 7))))

# two registers on unrelated clocks: B picks up whatever A held at B's edge
two = corpus.load("twoclock")
print(ascii_timeline(two, schedule_from_clocks(two, 12)))
