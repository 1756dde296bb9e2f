"""Supervisory-control synthesis toolkit for discrete-event systems.

Models plants and control requirements as finite automata with marked
states, synthesizes maximally permissive nonblocking supervisors, and
executes them as a periodic decision engine.  Ships with a complete
multicopter failsafe case study and a live pilot-in-the-loop service.
"""

from .automata import (
    Alphabet,
    AlphabetMismatchError,
    AutFormatError,
    Automaton,
    AutomatonError,
    EventDef,
    Trace,
    coreachable,
    dump_aut,
    enumerate_marked_strings,
    is_nonblocking,
    language_equivalent,
    load_aut,
    parse_aut,
    reachable,
    trim,
    validate,
    write_aut,
)
from .compose import allevents, selfloop_complete, sync, sync_all
from .multicopter import (
    BlockingSpecificationError,
    EventCatalog,
    ExclusiveGroup,
    FlightMode,
    build_event_catalog,
    build_example,
    build_full_specification,
    build_plant,
    build_spec,
    mode_labels,
    synthesize_failsafe,
)
from .runtime import (
    AmbiguityError,
    DeadlockError,
    DecisionError,
    EventFrame,
    LiveSession,
    LogEntry,
    ScenarioFormatError,
    SessionState,
    SupFormatError,
    TransitionMatrix,
    decision_step,
    default_frame,
    dump_sup,
    export_matrix,
    initial_session,
    load_sup,
    matrix_to_automaton,
    parse_scenario,
    parse_sup,
    run_scenario,
    write_scenario,
    write_sup,
)
from .synthesis import (
    BlockingDiagnosis,
    ControllabilityCounterexample,
    SynthesisReport,
    diagnose_blocking,
    is_controllable,
    oracle_supremal,
    supcon,
)

__version__ = "0.1.0"

__all__ = [
    "allevents",
    "Alphabet",
    "AlphabetMismatchError",
    "AmbiguityError",
    "AutFormatError",
    "Automaton",
    "AutomatonError",
    "BlockingDiagnosis",
    "BlockingSpecificationError",
    "build_event_catalog",
    "build_example",
    "build_full_specification",
    "build_plant",
    "build_spec",
    "ControllabilityCounterexample",
    "coreachable",
    "DeadlockError",
    "decision_step",
    "DecisionError",
    "default_frame",
    "diagnose_blocking",
    "dump_aut",
    "dump_sup",
    "enumerate_marked_strings",
    "EventCatalog",
    "EventDef",
    "EventFrame",
    "ExclusiveGroup",
    "export_matrix",
    "FlightMode",
    "initial_session",
    "is_controllable",
    "is_nonblocking",
    "language_equivalent",
    "LiveSession",
    "load_aut",
    "load_sup",
    "LogEntry",
    "matrix_to_automaton",
    "mode_labels",
    "oracle_supremal",
    "parse_aut",
    "parse_scenario",
    "parse_sup",
    "reachable",
    "run_scenario",
    "ScenarioFormatError",
    "selfloop_complete",
    "SessionState",
    "supcon",
    "SupFormatError",
    "sync",
    "sync_all",
    "SynthesisReport",
    "synthesize_failsafe",
    "Trace",
    "TransitionMatrix",
    "trim",
    "validate",
    "write_aut",
    "write_scenario",
    "write_sup",
]
