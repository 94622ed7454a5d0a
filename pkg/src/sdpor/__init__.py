"""Stateful DPOR model checker for event-driven programs."""

from .corpus import CORPUS_NAMES, GeneratorConfig, corpus_programs, corpus_source, generate
from .engine import (
    DporEngine,
    EngineConfig,
    ExplorationReport,
    Violation,
    conflicts,
    explore_all,
    is_full_cycle,
)
from .interp import (
    Access,
    ExecError,
    Location,
    Op,
    Valuation,
    enabled_events,
    execute_event,
    initial_valuation,
    shadow,
    shared_var,
)
from .lang import ParseError, Program, SemanticError, parse_program, pretty_print
from .oracle import (
    CheckInconclusive,
    NodeCapExceeded,
    check_persistent,
    dependence_order,
    enumerate_traces,
    exhaustive_explore,
    find_covering_path,
    is_prefix_of_linearization,
)
from .statespace import StateStore, Trace, Transition, TransitionGraph, to_dot

__all__ = [
    "Access",
    "CORPUS_NAMES",
    "CheckInconclusive",
    "DporEngine",
    "EngineConfig",
    "ExecError",
    "ExplorationReport",
    "GeneratorConfig",
    "Location",
    "NodeCapExceeded",
    "Op",
    "ParseError",
    "Program",
    "SemanticError",
    "StateStore",
    "Trace",
    "Transition",
    "TransitionGraph",
    "Valuation",
    "Violation",
    "check_persistent",
    "conflicts",
    "corpus_programs",
    "corpus_source",
    "dependence_order",
    "enabled_events",
    "enumerate_traces",
    "execute_event",
    "exhaustive_explore",
    "explore_all",
    "find_covering_path",
    "generate",
    "initial_valuation",
    "is_full_cycle",
    "is_prefix_of_linearization",
    "parse_program",
    "pretty_print",
    "shadow",
    "shared_var",
    "to_dot",
]
