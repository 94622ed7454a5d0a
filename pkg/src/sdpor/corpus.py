"""Built-in counterexample programs and the seeded program generator.

The three shipped ``.evt`` programs are the small event-driven programs
that defeat weaker exploration strategies: ``nonterm-threads`` (a cyclic
space where ending on a bare state revisit loses a failure),
``missing-exec`` (a revisit whose skipped re-exploration must still set
backtracking points), and ``per-memory`` (a multi-location handler that
needs per-location conflict tracking).

The generator produces tiny programs with guaranteed-finite state spaces:
assignments are restricted to literals and variable copies over a bounded
value domain, and guards compare variables to literals.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import resources

from .lang import (
    Assert,
    Assign,
    Binary,
    Disable,
    Enable,
    EventDef,
    If,
    IntLit,
    Name,
    Program,
    SelfDisable,
    parse_program,
    validate_program,
)

CORPUS_NAMES = ("nonterm-threads", "missing-exec", "per-memory")


def corpus_source(name: str) -> str:
    return (
        resources.files("sdpor")
        .joinpath("corpus_data", f"{name}.evt")
        .read_text(encoding="utf-8")
    )


def corpus_programs() -> dict[str, Program]:
    """The shipped counterexample programs, parsed."""
    return {name: parse_program(corpus_source(name)) for name in CORPUS_NAMES}


# ---------------------------------------------------------------------------
# Random program generation
# ---------------------------------------------------------------------------

_GUARD_OPS = ("==", "!=", "<=")


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int
    n_events: int = 3
    n_vars: int = 2
    values: tuple[int, ...] = (0, 1, 2)
    max_stmts_per_event: int = 3
    p_enable_disable: float = 0.25
    p_assert: float = 0.25
    p_branch: float = 0.3

    def __post_init__(self) -> None:
        if not 1 <= self.n_events <= 4:
            raise ValueError("n_events must be in 1..4")
        if not 1 <= self.n_vars <= 3:
            raise ValueError("n_vars must be in 1..3")
        if not 1 <= self.max_stmts_per_event <= 4:
            raise ValueError("max_stmts_per_event must be in 1..4")
        if not self.values or not set(self.values) <= {0, 1, 2}:
            raise ValueError("values must be a nonempty subset of {0, 1, 2}")
        for p in (self.p_enable_disable, self.p_assert, self.p_branch):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must be in [0, 1]")


def generate(cfg: GeneratorConfig) -> Program:
    """Deterministically generate a valid program from the seed."""
    rng = random.Random(cfg.seed)
    var_names = [f"v{i + 1}" for i in range(cfg.n_vars)]
    event_names = [f"e{i + 1}" for i in range(cfg.n_events)]
    variables = tuple((v, rng.choice(cfg.values)) for v in var_names)

    def guard():
        return Binary(
            op=rng.choice(_GUARD_OPS),
            left=Name(rng.choice(var_names)),
            right=IntLit(rng.choice(cfg.values)),
        )

    def assignment():
        target = rng.choice(var_names)
        if cfg.n_vars > 1 and rng.random() < 0.5:
            source = rng.choice([v for v in var_names if v != target])
            return Assign(target, Name(source))
        return Assign(target, IntLit(rng.choice(cfg.values)))

    def toggle(self_name: str):
        roll = rng.random()
        if roll < 1 / 3:
            return SelfDisable()
        target = rng.choice(event_names)
        if roll < 2 / 3:
            return Enable(target)
        return Disable(target)

    def simple(self_name: str):
        roll = rng.random()
        if roll < cfg.p_assert:
            return Assert(guard())
        if roll < cfg.p_assert + cfg.p_enable_disable:
            return toggle(self_name)
        return assignment()

    def stmt(self_name: str):
        if rng.random() < cfg.p_branch:
            then = (simple(self_name),)
            orelse = (simple(self_name),) if rng.random() < 0.5 else ()
            return If(cond=guard(), then=then, orelse=orelse)
        return simple(self_name)

    events = []
    for name in event_names:
        body = tuple(
            stmt(name) for _ in range(rng.randint(1, cfg.max_stmts_per_event))
        )
        events.append(
            EventDef(name=name, initially_enabled=rng.random() < 0.8, body=body)
        )
    return validate_program(Program(variables=variables, events=tuple(events)))
