"""Atomic event execution with per-transition access recording.

A valuation is the complete program state: the shared-variable values plus
one enabled flag per event.  Executing an enabled event runs its handler
body atomically and returns the post-valuation, the set of memory accesses
performed, and any assertion failures.

The access model drives conflict detection:

* reading/writing a shared variable records ``Read``/``Write`` on that
  variable's location (a write is recorded even when the value is
  unchanged);
* every event, per execution, records a read of its own shadow location;
* ``enable(e)``/``disable(e)``/``self_disable`` record a write to ``e``'s
  shadow location only when the flag actually flips, so re-enabling an
  already-enabled event stays independent of it.

Handler-local registers live only for one execution and never appear in
the access set or the valuation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .lang import (
    Assert,
    Assign,
    Binary,
    Disable,
    Enable,
    If,
    IntLit,
    Name,
    Program,
    SelfDisable,
    Unary,
    expr_to_str,
)

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


class ExecError(Exception):
    """Runtime failure inside a handler: overflow, unassigned register,
    or executing a disabled event (an engine bug, not a model bug)."""


class Op(Enum):
    READ = "R"
    WRITE = "W"


@dataclass(frozen=True)
class Location:
    """A conflict-detection location: a shared variable or an event shadow."""

    kind: str  # "var" | "shadow"
    name: str

    def __str__(self) -> str:
        return self.name if self.kind == "var" else f"shadow({self.name})"


def shared_var(name: str) -> Location:
    return Location("var", name)


def shadow(event_name: str) -> Location:
    return Location("shadow", event_name)


@dataclass(frozen=True)
class Access:
    op: Op
    loc: Location

    def __str__(self) -> str:
        return f"{self.op.value}({self.loc})"


@dataclass
class Valuation:
    """Shared-variable values plus per-event enabled flags; total over the
    program's declarations."""

    vars: dict[str, int]
    flags: dict[str, bool]

    def copy(self) -> Valuation:
        return Valuation(dict(self.vars), dict(self.flags))

    def canonical_key(self) -> tuple:
        """Deterministic hashable form: sorted (name, value) + (name, flag)."""
        return (
            tuple(sorted(self.vars.items())),
            tuple(sorted(self.flags.items())),
        )


def initial_valuation(program: Program) -> Valuation:
    enabled = program.initially_enabled
    return Valuation(
        vars={name: value for name, value in program.variables},
        flags={name: name in enabled for name in program.event_names},
    )


def enabled_events(val: Valuation, program: Program) -> tuple[str, ...]:
    """Events whose flag is set, in declaration order."""
    return tuple(name for name in program.event_names if val.flags[name])


def _check_range(value: int) -> int:
    if value < INT_MIN or value > INT_MAX:
        raise ExecError(f"integer overflow: {value}")
    return value


class _Execution:
    def __init__(self, val: Valuation, program: Program) -> None:
        self.val = val
        self.program = program
        self.var_names = frozenset(program.var_names)
        self.registers: dict[str, int] = {}
        self.accesses: set[Access] = set()
        self.failures: list[str] = []

    def eval(self, expr) -> int:
        if isinstance(expr, IntLit):
            return expr.value
        if isinstance(expr, Name):
            if expr.ident in self.var_names:
                self.accesses.add(Access(Op.READ, shared_var(expr.ident)))
                return self.val.vars[expr.ident]
            if expr.ident not in self.registers:
                raise ExecError(f"register read before assignment: {expr.ident!r}")
            return self.registers[expr.ident]
        if isinstance(expr, Unary):
            return 0 if self.eval(expr.operand) != 0 else 1
        if isinstance(expr, Binary):
            if expr.op == "&&":
                return 1 if self.eval(expr.left) != 0 and self.eval(expr.right) != 0 else 0
            if expr.op == "||":
                return 1 if self.eval(expr.left) != 0 or self.eval(expr.right) != 0 else 0
            left = self.eval(expr.left)
            right = self.eval(expr.right)
            if expr.op == "+":
                return _check_range(left + right)
            if expr.op == "-":
                return _check_range(left - right)
            if expr.op == "*":
                return _check_range(left * right)
            if expr.op == "==":
                return 1 if left == right else 0
            if expr.op == "!=":
                return 1 if left != right else 0
            if expr.op == "<":
                return 1 if left < right else 0
            if expr.op == "<=":
                return 1 if left <= right else 0
        raise ExecError(f"cannot evaluate {expr!r}")

    def set_flag(self, event_name: str, flag: bool) -> None:
        # Shadow writes are recorded only when the flag flips; a no-op
        # re-enable must stay independent of the target event.
        if self.val.flags[event_name] != flag:
            self.accesses.add(Access(Op.WRITE, shadow(event_name)))
            self.val.flags[event_name] = flag

    def run(self, body, self_name: str) -> None:
        for stmt in body:
            if isinstance(stmt, Assign):
                value = self.eval(stmt.value)
                if stmt.target in self.var_names:
                    self.accesses.add(Access(Op.WRITE, shared_var(stmt.target)))
                    self.val.vars[stmt.target] = value
                else:
                    self.registers[stmt.target] = value
            elif isinstance(stmt, If):
                branch = stmt.then if self.eval(stmt.cond) != 0 else stmt.orelse
                self.run(branch, self_name)
            elif isinstance(stmt, Assert):
                if self.eval(stmt.cond) == 0:
                    self.failures.append(f"assert({expr_to_str(stmt.cond)})")
            elif isinstance(stmt, Enable):
                self.set_flag(stmt.target, True)
            elif isinstance(stmt, Disable):
                self.set_flag(stmt.target, False)
            elif isinstance(stmt, SelfDisable):
                self.set_flag(self_name, False)
            else:
                raise ExecError(f"unknown statement {stmt!r}")


def execute_event(
    val: Valuation, event_name: str, program: Program
) -> tuple[Valuation, frozenset[Access], list[str]]:
    """Run one enabled event atomically.

    Returns the post-valuation, the recorded access set, and the messages
    of every assertion whose condition evaluated false.  Execution
    continues past failed asserts so the violating transition still
    produces a well-defined state.
    """
    event = program.event(event_name)
    if not val.flags[event_name]:
        raise ExecError(f"executing disabled event {event_name!r}")
    ex = _Execution(val.copy(), program)
    ex.accesses.add(Access(Op.READ, shadow(event_name)))
    ex.run(event.body, event_name)
    return ex.val, frozenset(ex.accesses), ex.failures
