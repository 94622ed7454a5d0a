"""Independent brute-force explorers and property checkers.

Everything here is deliberately simple and separate from the DPOR engine:
a stateful breadth-first closure over the full state space, a bounded
trace enumerator, the transitive-dependence order on traces, a
linearization-prefix decision procedure, and a persistent-set checker.
These are the oracles the engine is validated against.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .engine import ExplorationReport, Violation, _conflict_exists
from .interp import Valuation, enabled_events, execute_event, initial_valuation
from .lang import Program
from .statespace import StateId, StateStore, Trace, TransitionGraph

DEFAULT_NODE_CAP = 100_000


class NodeCapExceeded(Exception):
    """The input's reachable space outgrew the desk-scale oracle cap."""


class CheckInconclusive(Exception):
    """A bounded check ran out of budget; never silently true."""


@dataclass
class OracleResult:
    report: ExplorationReport
    store: StateStore
    graph: TransitionGraph
    s0: StateId


def exhaustive_explore(program: Program, node_cap: int = DEFAULT_NODE_CAP) -> OracleResult:
    """Stateful BFS closure: expand every enabled event from every
    discovered state exactly once; collect every assertion failure."""
    started = time.perf_counter()
    store = StateStore(program)
    graph = TransitionGraph(store)
    s0, _ = store.canonicalize(initial_valuation(program))
    graph.add_node(s0)
    raw_violations: list[tuple[str, str, StateId]] = []
    sites: set[tuple[str, str]] = set()
    frontier = [s0]
    seen = {s0}
    expanded = 0
    while frontier:
        nxt: list[StateId] = []
        for sid in frontier:
            node = store.node(sid)
            expanded += 1
            for event in node.enabled:
                post, accesses, failures = execute_event(node.valuation, event, program)
                dst, _ = store.canonicalize(post)
                if len(store) > node_cap:
                    raise NodeCapExceeded(f"more than {node_cap} states")
                _, created = graph.add_transition(sid, event, dst, accesses, tuple(failures))
                if created:
                    for message in failures:
                        site = (event, message)
                        if site not in sites:
                            sites.add(site)
                            raw_violations.append((event, message, sid))
                if dst not in seen:
                    seen.add(dst)
                    nxt.append(dst)
        frontier = nxt
    violations = []
    for event, message, src in raw_violations:
        prefix = graph.execution_witness(src, s0)
        assert prefix is not None
        violations.append(Violation(event=event, message=message, trace=(*prefix, event)))
    report = ExplorationReport(
        states=len(graph.nodes),
        transitions=len(graph.transitions),
        executions=expanded,
        violations=violations,
        wall_seconds=time.perf_counter() - started,
        terminated_by="normal",
    )
    return OracleResult(report=report, store=store, graph=graph, s0=s0)


def enumerate_traces(program: Program, max_len: int):
    """Yield every transition sequence from the initial state that either
    has length max_len or ends early in a state with nothing enabled,
    depth-first in event declaration order (lexicographic on event names
    by declaration index).  Deterministic."""
    store = StateStore(program)
    graph = TransitionGraph(store)
    s0, _ = store.canonicalize(initial_valuation(program))
    graph.add_node(s0)

    def walk(sid: StateId, path: list):
        node = store.node(sid)
        if len(path) == max_len or not node.enabled:
            yield Trace(start=s0, steps=list(path))
            return
        for event in node.enabled:
            t = graph.get(sid, event)
            if t is None:
                post, accesses, failures = execute_event(node.valuation, event, program)
                dst, _ = store.canonicalize(post)
                t, _ = graph.add_transition(sid, event, dst, accesses, tuple(failures))
            path.append(t)
            yield from walk(t.dst, path)
            path.pop()

    yield from walk(s0, [])


def all_traces_upto(program: Program, max_len: int):
    """Every trace of length <= max_len (dead-end traces may repeat)."""
    for length in range(max_len + 1):
        yield from enumerate_traces(program, length)


# ---------------------------------------------------------------------------
# Transitive dependence and linearizations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DependenceOrder:
    """Transitive closure of conflicting-position pairs (i, j), 1-based,
    i < j; a subrelation of trace order."""

    length: int
    pairs: frozenset[tuple[int, int]]

    def predecessors(self, j: int) -> set[int]:
        return {i for (i, k) in self.pairs if k == j}


def dependence_order(trace: Trace) -> DependenceOrder:
    n = len(trace.steps)
    direct: dict[int, set[int]] = {i: set() for i in range(1, n + 1)}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if _conflict_exists(trace.steps[i - 1].accesses, trace.steps[j - 1].accesses):
                direct[i].add(j)
    pairs: set[tuple[int, int]] = set()
    for i in range(1, n + 1):
        stack = list(direct[i])
        seen: set[int] = set()
        while stack:
            j = stack.pop()
            if j in seen:
                continue
            seen.add(j)
            pairs.add((i, j))
            stack.extend(direct[j])
    return DependenceOrder(length=n, pairs=frozenset(pairs))


def is_prefix_of_linearization(tau: Trace, tau_prime: Trace) -> bool:
    """True iff some topological order of dependence_order(tau_prime)
    starts with tau's event sequence.

    Decided by backtracking over linear extensions.  Because execution is
    deterministic and tau is a valid trace, a matching event prefix
    replays exactly to tau's states, so no separate replay is needed.
    """
    order = dependence_order(tau_prime)
    preds = {j: order.predecessors(j) for j in range(1, order.length + 1)}
    target = tau.events()
    if len(target) > order.length:
        return False
    used: set[int] = set()
    failed: set[tuple[int, frozenset[int]]] = set()

    def match(k: int) -> bool:
        if k == len(target):
            return True
        key = (k, frozenset(used))
        if key in failed:
            return False
        for j in range(1, order.length + 1):
            if j in used:
                continue
            if tau_prime.steps[j - 1].event != target[k]:
                continue
            if not preds[j] <= used:
                continue
            used.add(j)
            if match(k + 1):
                return True
            used.discard(j)
        failed.add(key)
        return False

    return match(0)


def find_covering_path(
    graph: TransitionGraph, s0: StateId, tau: Trace, max_extra: int = 16
) -> Trace | None:
    """Search R for a path tau_prime (from s0, at most len(tau)+max_extra
    long) such that tau is a prefix of a linearization of its dependence
    order.  Returns the path or None if none exists within the bound."""
    target = tau.events()
    max_len = len(target) + max_extra
    visited: set[tuple] = set()

    def search(sid: StateId, path: list, pending: list, k: int):
        if k == len(target):
            return list(path)
        key = (sid, k, tuple(t.id for t in pending))
        if key in visited:
            return None
        visited.add(key)
        # Match first: a pending transition is placeable when its event is
        # next in tau and no earlier pending transition conflicts with it.
        for idx, t in enumerate(pending):
            if t.event != target[k]:
                continue
            if any(
                _conflict_exists(prev.accesses, t.accesses)
                for prev in pending[:idx]
            ):
                continue
            rest = pending[:idx] + pending[idx + 1:]
            found = search(sid, path, rest, k + 1)
            if found is not None:
                return found
        if len(path) < max_len:
            for t in sorted(graph.out_edges(sid), key=lambda x: x.id):
                path.append(t)
                pending.append(t)
                found = search(t.dst, path, pending, k)
                if found is not None:
                    return found
                pending.pop()
                path.pop()
        return None

    steps = search(s0, [], [], 0)
    if steps is None:
        return None
    return Trace(start=s0, steps=steps)


# ---------------------------------------------------------------------------
# Persistent sets
# ---------------------------------------------------------------------------

def check_persistent(
    program: Program,
    state: Valuation,
    events: set[str],
    node_cap: int = 10_000,
) -> bool:
    """Decide whether `events` is a persistent set at `state`.

    Walks the closure of states reachable using only events outside the
    set.  The set fails if any outside transition's accesses conflict
    with what a member event would do at that state, or if an outside
    transition toggles a member's enabledness (the dependence the shadow
    locations encode).  Exact for finite spaces; raises when the walk
    exceeds the node budget rather than answering.
    """
    members = set(events)
    enabled0 = set(enabled_events(state, program))
    if not members <= enabled0:
        raise ValueError("persistent-set candidates must be enabled at the state")
    store = StateStore(program)
    root, _ = store.canonicalize(state)
    frontier = [root]
    seen = {root}
    while frontier:
        sid = frontier.pop()
        node = store.node(sid)
        member_accesses = {}
        for x in sorted(members):
            if node.valuation.flags[x]:
                _, acc, _ = execute_event(node.valuation, x, program)
                member_accesses[x] = acc
        for event in node.enabled:
            if event in members:
                continue
            post, accesses, _ = execute_event(node.valuation, event, program)
            for acc in member_accesses.values():
                if _conflict_exists(accesses, acc):
                    return False
            for x in members:
                if post.flags[x] != node.valuation.flags[x]:
                    return False
            dst, _ = store.canonicalize(post)
            if len(store) > node_cap:
                raise CheckInconclusive(f"more than {node_cap} states from s{root}")
            if dst not in seen:
                seen.add(dst)
                frontier.append(dst)
    return True
