"""Canonical state store, transition graph, traces, and DOT export.

States are hash-consed: equal valuations (variables *and* enabled flags)
always map to the same dense integer id.  The transition graph `R` keys
edges by (source state, event); execution determinism makes any duplicate
insertion identical, so insertion is idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .interp import Access, Valuation, enabled_events, execute_event
from .lang import Program

StateId = int


@dataclass
class StateNode:
    id: StateId
    valuation: Valuation
    enabled: tuple[str, ...]  # cached, declaration order
    backtrack: set[str] = field(default_factory=set)
    done: set[str] = field(default_factory=set)
    # Per-event access summary, populated only in summary-cache mode.
    summary: dict[str, set[Access]] = field(default_factory=dict)


class StateStore:
    """Assigns dense StateIds to canonical valuations on first sighting."""

    def __init__(self, program: Program) -> None:
        self.program = program
        self._ids: dict[tuple, StateId] = {}
        self._nodes: list[StateNode] = []

    def canonicalize(self, val: Valuation) -> tuple[StateId, bool]:
        """Returns (id, fresh); fresh is True exactly on first sighting."""
        key = val.canonical_key()
        sid = self._ids.get(key)
        if sid is not None:
            return sid, False
        sid = len(self._nodes)
        self._ids[key] = sid
        self._nodes.append(
            StateNode(id=sid, valuation=val.copy(),
                      enabled=enabled_events(val, self.program))
        )
        return sid, True

    def node(self, sid: StateId) -> StateNode:
        return self._nodes[sid]

    def __len__(self) -> int:
        return len(self._nodes)

    def ids(self) -> range:
        return range(len(self._nodes))


@dataclass(frozen=True, eq=False)
class Transition:
    """One explored edge; unique per (src, event), compared by identity."""

    id: int
    src: StateId
    event: str
    dst: StateId
    accesses: frozenset[Access]
    assertion_failures: tuple[str, ...]
    # Derived location indexes for fast conflict tests.
    write_locs: frozenset = field(init=False)
    all_locs: frozenset = field(init=False)

    def __post_init__(self) -> None:
        from .interp import Op

        object.__setattr__(
            self,
            "write_locs",
            frozenset(a.loc for a in self.accesses if a.op is Op.WRITE),
        )
        object.__setattr__(
            self, "all_locs", frozenset(a.loc for a in self.accesses)
        )

    def __repr__(self) -> str:
        return f"t{self.id}(s{self.src} --{self.event}--> s{self.dst})"


class GraphCorruption(Exception):
    """Duplicate (src, event) with a different destination or access set."""


class TransitionGraph:
    """The explored graph R: nodes, edges, and both adjacency directions."""

    def __init__(self, store: StateStore) -> None:
        self.store = store
        self.nodes: set[StateId] = set()
        self._by_key: dict[tuple[StateId, str], Transition] = {}
        self._out: dict[StateId, list[Transition]] = {}
        self._in: dict[StateId, list[Transition]] = {}
        self._reach_cache: dict[StateId, frozenset[StateId]] = {}

    @property
    def transitions(self) -> list[Transition]:
        return sorted(self._by_key.values(), key=lambda t: t.id)

    def __contains__(self, key: tuple[StateId, str]) -> bool:
        return key in self._by_key

    def get(self, src: StateId, event: str) -> Transition | None:
        return self._by_key.get((src, event))

    def add_node(self, sid: StateId) -> None:
        self.nodes.add(sid)

    def add_transition(
        self,
        src: StateId,
        event: str,
        dst: StateId,
        accesses: frozenset[Access],
        assertion_failures: tuple[str, ...],
    ) -> tuple[Transition, bool]:
        """Insert an edge; returns (transition, created).  Idempotent on
        (src, event); an inconsistent duplicate signals engine corruption."""
        key = (src, event)
        existing = self._by_key.get(key)
        if existing is not None:
            if existing.dst != dst or existing.accesses != accesses:
                raise GraphCorruption(f"conflicting duplicate for {key}")
            return existing, False
        t = Transition(
            id=len(self._by_key),
            src=src,
            event=event,
            dst=dst,
            accesses=accesses,
            assertion_failures=assertion_failures,
        )
        self._by_key[key] = t
        self.nodes.add(src)
        self.nodes.add(dst)
        self._out.setdefault(src, []).append(t)
        self._in.setdefault(dst, []).append(t)
        self._reach_cache.clear()
        return t, True

    def out_edges(self, sid: StateId) -> list[Transition]:
        return self._out.get(sid, [])

    def in_edges(self, sid: StateId) -> list[Transition]:
        return self._in.get(sid, [])

    def predecessors(self, t: Transition) -> list[Transition]:
        """Transitions whose destination is t's source, by insertion order."""
        return self._in.get(t.src, [])

    def _forward_closure(self, root: StateId) -> frozenset[StateId]:
        cached = self._reach_cache.get(root)
        if cached is not None:
            return cached
        seen = {root}
        stack = [root]
        while stack:
            sid = stack.pop()
            for t in self._out.get(sid, ()):
                if t.dst not in seen:
                    seen.add(t.dst)
                    stack.append(t.dst)
        result = frozenset(seen)
        self._reach_cache[root] = result
        return result

    def reachable_transitions(self, t: Transition) -> list[Transition]:
        """All transitions whose source is reachable from t's destination
        (including by the empty path), in id order."""
        reach = self._forward_closure(t.dst)
        return sorted(
            (edge for edge in self._by_key.values() if edge.src in reach),
            key=lambda edge: edge.id,
        )

    def execution_witness(self, sid: StateId, s0: StateId) -> list[str] | None:
        """Shortest event path s0 -> sid over R (BFS, edges in id order)."""
        if sid == s0:
            return []
        parent: dict[StateId, Transition] = {}
        frontier = [s0]
        seen = {s0}
        while frontier:
            nxt: list[StateId] = []
            for u in frontier:
                for t in self._out.get(u, ()):
                    if t.dst in seen:
                        continue
                    seen.add(t.dst)
                    parent[t.dst] = t
                    if t.dst == sid:
                        path: list[str] = []
                        cur = sid
                        while cur != s0:
                            step = parent[cur]
                            path.append(step.event)
                            cur = step.src
                        path.reverse()
                        return path
                    nxt.append(t.dst)
            frontier = nxt
        return None

    def recheck_edge(self, t: Transition, program: Program) -> bool:
        """Recomputability: re-executing the event reproduces the edge."""
        src_val = self.store.node(t.src).valuation
        post, accesses, failures = execute_event(src_val, t.event, program)
        dst_id, fresh = self.store.canonicalize(post)
        return (
            not fresh
            and dst_id == t.dst
            and accesses == t.accesses
            and tuple(failures) == t.assertion_failures
        )


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

@dataclass
class Trace:
    """A consecutive transition sequence with an explicit start state.

    Positions index the traversed states: position 0 is the start state
    and position i is the destination of the i-th transition.
    """

    start: StateId
    steps: list[Transition] = field(default_factory=list)

    def state_seq(self) -> list[StateId]:
        seq = [self.start]
        for t in self.steps:
            seq.append(t.dst)
        return seq

    def states(self) -> set[StateId]:
        return set(self.state_seq())

    def first(self, sid: StateId) -> int:
        """Smallest position at which sid occurs; the start is position 0."""
        for i, s in enumerate(self.state_seq()):
            if s == sid:
                return i
        raise ValueError(f"state s{sid} not on trace")

    def last(self) -> StateId:
        return self.steps[-1].dst if self.steps else self.start

    def events(self) -> list[str]:
        return [t.event for t in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------

def to_dot(graph: TransitionGraph, name: str = "R") -> str:
    """Bit-exact GraphViz rendering: nodes by id, edges by id then event."""
    program = graph.store.program
    lines = [f"digraph {name} {{"]
    for sid in sorted(graph.nodes):
        node = graph.store.node(sid)
        vars_part = ",".join(
            f"{v}={node.valuation.vars[v]}" for v in program.var_names
        )
        enabled_part = ",".join(node.enabled)
        label_state = ",".join(p for p in (vars_part,) if p)
        label = f"s{sid}\\n{{{label_state}{',' if label_state else ''}enabled={{{enabled_part}}}}}"
        lines.append(f'  s{sid} [label="{label}"];')
    order = {name: i for i, name in enumerate(program.event_names)}
    for t in sorted(graph.transitions, key=lambda t: (t.src, order[t.event])):
        lines.append(f'  s{t.src} -> s{t.dst} [label="{t.event}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
