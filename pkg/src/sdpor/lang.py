"""Event DSL: abstract syntax, parser, and pretty-printer.

A program is a set of shared integer variables plus a list of event
handlers.  Handlers are loop-free blocks of assignments, conditionals,
asserts, and enable/disable statements over the shared variables.
Handler-local registers are declared implicitly on first assignment and
never persist across executions.

Grammar (line comments with ``//``, file extension ``.evt``)::

    program   := (vardecl | eventdecl)*
    vardecl   := "var" IDENT "=" INT
    eventdecl := "event" IDENT ("enabled" | "disabled") "{" stmt* "}"
    stmt      := IDENT "=" expr ";"
               | "if" "(" expr ")" block ("else" block)?
               | "assert" "(" expr ")" ";"
               | "enable" "(" IDENT ")" ";"
               | "disable" "(" IDENT ")" ";"
               | "self_disable" ";"
    block     := "{" stmt* "}"

Expressions use integer operands with ``+ - * == != < <= && || !``;
comparisons and logical operators yield 0/1 and any nonzero value is
truthy.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(Exception):
    """Syntax error with source position."""

    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class SemanticError(Exception):
    """Validation error naming the offending identifier."""

    def __init__(self, message: str, ident: str) -> None:
        super().__init__(f"{message}: {ident!r}")
        self.ident = ident


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: Expr


@dataclass(frozen=True)
class Binary:
    op: str
    left: Expr
    right: Expr


Expr = IntLit | Name | Unary | Binary


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple
    orelse: tuple


@dataclass(frozen=True)
class Assert:
    cond: Expr


@dataclass(frozen=True)
class Enable:
    target: str


@dataclass(frozen=True)
class Disable:
    target: str


@dataclass(frozen=True)
class SelfDisable:
    pass


@dataclass(frozen=True)
class EventDef:
    name: str
    initially_enabled: bool
    body: tuple


@dataclass(frozen=True)
class Program:
    variables: tuple  # of (name, initial value), declaration order
    events: tuple  # of EventDef, declaration order

    @property
    def var_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.variables)

    @property
    def event_names(self) -> tuple[str, ...]:
        return tuple(ev.name for ev in self.events)

    @property
    def initially_enabled(self) -> frozenset[str]:
        return frozenset(ev.name for ev in self.events if ev.initially_enabled)

    def event(self, name: str) -> EventDef:
        for ev in self.events:
            if ev.name == name:
                return ev
        raise KeyError(name)

    def event_order(self, name: str) -> int:
        """Declaration index of an event, the deterministic tie-break key."""
        return self.event_names.index(name)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>//[^\n]*)
  | (?P<nl>\n)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|&&|\|\||[=<+\-*!;(){}])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"var", "event", "enabled", "disabled", "if", "else", "assert",
             "enable", "disable", "self_disable"}


@dataclass
class _Token:
    kind: str  # "int" | "ident" | "kw" | "op" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(lexeme)
        else:
            if kind == "ident" and lexeme in _KEYWORDS:
                kind = "kw"
            tokens.append(_Token(kind, lexeme, line, col))
            col += len(lexeme)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

# Binary operators by precedence level, loosest first; all left-associative.
_BINARY_LEVELS = [("||",), ("&&",), ("==", "!=", "<", "<="), ("+", "-"), ("*",)]


class _Parser:
    def __init__(self, tokens: list[_Token]) -> None:
        self._tokens = tokens
        self._pos = 0

    def _peek(self) -> _Token:
        return self._tokens[self._pos]

    def _advance(self) -> _Token:
        tok = self._tokens[self._pos]
        if tok.kind != "eof":
            self._pos += 1
        return tok

    def _error(self, message: str) -> ParseError:
        tok = self._peek()
        return ParseError(message, tok.line, tok.col)

    def _expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self._peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise self._error(f"expected {want!r}, found {tok.text or 'end of input'!r}")
        return self._advance()

    def parse_program(self) -> Program:
        variables: list[tuple[str, int]] = []
        events: list[EventDef] = []
        while self._peek().kind != "eof":
            tok = self._peek()
            if tok.kind == "kw" and tok.text == "var":
                variables.append(self._parse_vardecl())
            elif tok.kind == "kw" and tok.text == "event":
                events.append(self._parse_eventdecl())
            else:
                raise self._error("expected 'var' or 'event' declaration")
        return Program(variables=tuple(variables), events=tuple(events))

    def _parse_vardecl(self) -> tuple[str, int]:
        self._expect("kw", "var")
        name = self._expect("ident").text
        self._expect("op", "=")
        sign = 1
        if self._peek().kind == "op" and self._peek().text == "-":
            self._advance()
            sign = -1
        value = sign * int(self._expect("int").text)
        return (name, value)

    def _parse_eventdecl(self) -> EventDef:
        self._expect("kw", "event")
        name = self._expect("ident").text
        mode = self._peek()
        if mode.kind == "kw" and mode.text in ("enabled", "disabled"):
            self._advance()
        else:
            raise self._error("expected 'enabled' or 'disabled'")
        body = self._parse_block()
        return EventDef(name=name, initially_enabled=(mode.text == "enabled"), body=body)

    def _parse_block(self) -> tuple:
        self._expect("op", "{")
        stmts = []
        while not (self._peek().kind == "op" and self._peek().text == "}"):
            if self._peek().kind == "eof":
                raise self._error("unterminated block")
            stmts.append(self._parse_stmt())
        self._expect("op", "}")
        return tuple(stmts)

    def _parse_stmt(self):
        tok = self._peek()
        if tok.kind == "kw":
            if tok.text == "if":
                self._advance()
                self._expect("op", "(")
                cond = self._parse_expr()
                self._expect("op", ")")
                then = self._parse_block()
                orelse: tuple = ()
                nxt = self._peek()
                if nxt.kind == "kw" and nxt.text == "else":
                    self._advance()
                    orelse = self._parse_block()
                return If(cond=cond, then=then, orelse=orelse)
            if tok.text == "assert":
                self._advance()
                self._expect("op", "(")
                cond = self._parse_expr()
                self._expect("op", ")")
                self._expect("op", ";")
                return Assert(cond=cond)
            if tok.text in ("enable", "disable"):
                self._advance()
                self._expect("op", "(")
                target = self._expect("ident").text
                self._expect("op", ")")
                self._expect("op", ";")
                return Enable(target) if tok.text == "enable" else Disable(target)
            if tok.text == "self_disable":
                self._advance()
                self._expect("op", ";")
                return SelfDisable()
            raise self._error(f"unexpected keyword {tok.text!r}")
        if tok.kind == "ident":
            target = self._advance().text
            self._expect("op", "=")
            value = self._parse_expr()
            self._expect("op", ";")
            return Assign(target=target, value=value)
        raise self._error(f"expected statement, found {tok.text or 'end of input'!r}")

    def _parse_expr(self, level: int = 0):
        if level == len(_BINARY_LEVELS):
            return self._parse_unary()
        expr = self._parse_expr(level + 1)
        while self._peek().kind == "op" and self._peek().text in _BINARY_LEVELS[level]:
            op = self._advance().text
            right = self._parse_expr(level + 1)
            expr = Binary(op=op, left=expr, right=right)
        return expr

    def _parse_unary(self):
        tok = self._peek()
        if tok.kind == "op" and tok.text == "!":
            self._advance()
            return Unary(op="!", operand=self._parse_unary())
        return self._parse_primary()

    def _parse_primary(self):
        tok = self._peek()
        if tok.kind == "int":
            self._advance()
            return IntLit(int(tok.text))
        if tok.kind == "ident":
            self._advance()
            return Name(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self._advance()
            expr = self._parse_expr()
            self._expect("op", ")")
            return expr
        raise self._error(f"expected expression, found {tok.text or 'end of input'!r}")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _assigned_registers(body, var_names: frozenset[str], event_names: frozenset[str]) -> set[str]:
    regs: set[str] = set()
    for stmt in body:
        if isinstance(stmt, Assign) and stmt.target not in var_names:
            regs.add(stmt.target)
        elif isinstance(stmt, If):
            regs |= _assigned_registers(stmt.then, var_names, event_names)
            regs |= _assigned_registers(stmt.orelse, var_names, event_names)
    return regs


def _expr_names(expr) -> set[str]:
    if isinstance(expr, Name):
        return {expr.ident}
    if isinstance(expr, Unary):
        return _expr_names(expr.operand)
    if isinstance(expr, Binary):
        return _expr_names(expr.left) | _expr_names(expr.right)
    return set()


def validate_program(program: Program) -> Program:
    """Check naming rules; returns the program unchanged on success."""
    seen_vars: set[str] = set()
    for name, _ in program.variables:
        if name in seen_vars:
            raise SemanticError("duplicate variable", name)
        seen_vars.add(name)
    seen_events: set[str] = set()
    for ev in program.events:
        if ev.name in seen_events:
            raise SemanticError("duplicate event", ev.name)
        if ev.name in seen_vars:
            raise SemanticError("event name collides with variable", ev.name)
        seen_events.add(ev.name)

    var_names = frozenset(seen_vars)
    event_names = frozenset(seen_events)
    for ev in program.events:
        regs = _assigned_registers(ev.body, var_names, event_names)
        bad = regs & event_names
        if bad:
            raise SemanticError("assignment to event name", sorted(bad)[0])
        _validate_body(ev.body, var_names, event_names, regs)
    return program


def _validate_body(body, var_names, event_names, regs) -> None:
    for stmt in body:
        if isinstance(stmt, Assign):
            _validate_expr(stmt.value, var_names, event_names, regs)
        elif isinstance(stmt, (Assert,)):
            _validate_expr(stmt.cond, var_names, event_names, regs)
        elif isinstance(stmt, If):
            _validate_expr(stmt.cond, var_names, event_names, regs)
            _validate_body(stmt.then, var_names, event_names, regs)
            _validate_body(stmt.orelse, var_names, event_names, regs)
        elif isinstance(stmt, (Enable, Disable)):
            if stmt.target not in event_names:
                raise SemanticError("undeclared event", stmt.target)


def _validate_expr(expr, var_names, event_names, regs) -> None:
    for name in sorted(_expr_names(expr)):
        if name in event_names:
            raise SemanticError("event name used as value", name)
        if name not in var_names and name not in regs:
            raise SemanticError("undeclared name", name)


def parse_program(text: str) -> Program:
    """Parse and validate DSL source text."""
    return validate_program(_Parser(_tokenize(text)).parse_program())


# ---------------------------------------------------------------------------
# Pretty-printer
# ---------------------------------------------------------------------------

_PRECEDENCE = {op: level for level, ops in enumerate(_BINARY_LEVELS) for op in ops}
_UNARY_PRECEDENCE = len(_BINARY_LEVELS)


def expr_to_str(expr) -> str:
    """Compact expression rendering, also used in assertion messages."""
    return _render(expr, -1)


def _render(expr, parent_prec: int) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, Name):
        return expr.ident
    if isinstance(expr, Unary):
        return f"!{_render(expr.operand, _UNARY_PRECEDENCE)}"
    prec = _PRECEDENCE[expr.op]
    # Left-associative: the right child needs parens at equal precedence.
    text = f"{_render(expr.left, prec - 1)}{expr.op}{_render(expr.right, prec)}"
    if prec <= parent_prec:
        return f"({text})"
    return text


def _stmt_lines(stmt, indent: str) -> list[str]:
    if isinstance(stmt, Assign):
        return [f"{indent}{stmt.target} = {expr_to_str(stmt.value)};"]
    if isinstance(stmt, Assert):
        return [f"{indent}assert({expr_to_str(stmt.cond)});"]
    if isinstance(stmt, Enable):
        return [f"{indent}enable({stmt.target});"]
    if isinstance(stmt, Disable):
        return [f"{indent}disable({stmt.target});"]
    if isinstance(stmt, SelfDisable):
        return [f"{indent}self_disable;"]
    if isinstance(stmt, If):
        lines = [f"{indent}if ({expr_to_str(stmt.cond)}) {{"]
        for inner in stmt.then:
            lines.extend(_stmt_lines(inner, indent + "  "))
        if stmt.orelse:
            lines.append(f"{indent}}} else {{")
            for inner in stmt.orelse:
                lines.extend(_stmt_lines(inner, indent + "  "))
        lines.append(f"{indent}}}")
        return lines
    raise TypeError(f"unknown statement {stmt!r}")


def pretty_print(program: Program) -> str:
    """Render a program as DSL source; re-parses to an equal Program."""
    lines: list[str] = []
    for name, value in program.variables:
        lines.append(f"var {name} = {value}")
    for ev in program.events:
        if lines:
            lines.append("")
        mode = "enabled" if ev.initially_enabled else "disabled"
        lines.append(f"event {ev.name} {mode} {{")
        for stmt in ev.body:
            lines.extend(_stmt_lines(stmt, "  "))
        lines.append("}")
    return "\n".join(lines) + "\n"
