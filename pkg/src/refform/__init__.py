"""Referring forms of sequential circuits and time-preservation checking."""

from .model import (
    Circuit,
    CircuitError,
    ClockDecl,
    DataSource,
    EMPTY,
    ExplicitEdges,
    FFSource,
    FlipFlop,
    Free,
    InputOccurrence,
    Periodic,
    PortId,
    ReferringForm,
    RefSet,
    Schedule,
    ScheduleError,
    Selector,
    canonicalize,
    schedule_from_clocks,
)
from .influence import (
    BudgetExceeded,
    all_referring_forms,
    enumerate_forms,
    ff_contents_trace,
    iter_schedules,
    restriction_map,
    schedule_space,
)
from .dsl import DSLError, emit, parse
from .order import TimePreservationVerdict, check_time_preservation, lemma_check, unified_image
from .oracle import BOTTOM, instantiate_tupling, instantiate_xor, run, semantic_influence
from .verify import find_counterexample_selective, verify_lemma, verify_theorem

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "CircuitError",
    "ClockDecl",
    "DataSource",
    "EMPTY",
    "ExplicitEdges",
    "FFSource",
    "FlipFlop",
    "Free",
    "InputOccurrence",
    "Periodic",
    "PortId",
    "ReferringForm",
    "RefSet",
    "Schedule",
    "ScheduleError",
    "Selector",
    "canonicalize",
    "schedule_from_clocks",
    "BudgetExceeded",
    "all_referring_forms",
    "enumerate_forms",
    "ff_contents_trace",
    "iter_schedules",
    "restriction_map",
    "schedule_space",
    "DSLError",
    "emit",
    "parse",
    "TimePreservationVerdict",
    "check_time_preservation",
    "lemma_check",
    "unified_image",
    "BOTTOM",
    "instantiate_tupling",
    "instantiate_xor",
    "run",
    "semantic_influence",
    "find_counterexample_selective",
    "verify_lemma",
    "verify_theorem",
]
