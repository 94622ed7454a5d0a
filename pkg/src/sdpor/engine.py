"""Stateful DPOR exploration for event-driven programs.

The engine explores the reachable state space one execution at a time,
matching canonical states across executions.  An execution ends when it
reaches a state from a completed execution, when it closes a cycle that
has run every event enabled inside the cycle, or when no event is
enabled.  Conflicts between the memory accesses of transitions set
backtracking points; a backwards depth-first search over the transition
graph places them on every discovered path, per conflicting memory
location.

Two modes implement the same search:

* ``dpor`` re-propagates from previously discovered states by invoking
  the backtrack update on every transition reachable from the matched
  state;
* ``dpor-summary-cache`` instead keeps a per-state summary of
  (event, access) pairs that have already been propagated through the
  state, pushes the matched state's summary through the new edge, and
  cuts the backwards search as soon as it carries no unrecorded access.

All tie-breaking uses event declaration order, and pending states are
revisited in StateId order, so runs are bit-for-bit reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .interp import Access, Op, execute_event, initial_valuation
from .lang import Program
from .statespace import (
    StateId,
    StateNode,
    StateStore,
    Trace,
    Transition,
    TransitionGraph,
)

MODE_DPOR = "dpor"
MODE_SUMMARY = "dpor-summary-cache"

STOP_EXHAUST = "exhaust"
STOP_FIRST = "first-violation"


@dataclass(frozen=True)
class EngineConfig:
    mode: str = MODE_DPOR
    stop_policy: str = STOP_EXHAUST
    max_executions: int | None = None
    max_trace_len: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in (MODE_DPOR, MODE_SUMMARY):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.stop_policy not in (STOP_EXHAUST, STOP_FIRST):
            raise ValueError(f"unknown stop policy {self.stop_policy!r}")
        for cap in (self.max_executions, self.max_trace_len):
            if cap is not None and cap < 1:
                raise ValueError("caps must be >= 1")


@dataclass(frozen=True)
class Violation:
    event: str
    message: str
    trace: tuple[str, ...]  # event names from the initial state


@dataclass
class ExplorationReport:
    states: int
    transitions: int
    executions: int
    violations: list[Violation]
    wall_seconds: float
    terminated_by: str  # "normal" | "cap"


def conflicts(a: Access, b: Access) -> bool:
    """Two accesses conflict iff same location and at least one write."""
    return a.loc == b.loc and (a.op is Op.WRITE or b.op is Op.WRITE)


def _conflict_exists(accesses: frozenset[Access], other: frozenset[Access]) -> bool:
    return any(conflicts(a, b) for a in accesses for b in other)


def _split_against(
    accesses: frozenset[Access], t: Transition
) -> tuple[bool, frozenset[Access]]:
    """(any conflict with t, accesses that do not conflict with t)."""
    all_locs = t.all_locs
    write_locs = t.write_locs
    for a in accesses:
        if a.loc in (all_locs if a.op is Op.WRITE else write_locs):
            break
    else:
        return False, accesses
    residual = frozenset(
        a
        for a in accesses
        if a.loc not in (all_locs if a.op is Op.WRITE else write_locs)
    )
    return True, residual


def is_full_cycle(t: Transition, trace: Trace, store: StateStore) -> bool:
    """Looping termination proviso.

    False unless t closes a cycle in the current trace.  Otherwise take
    the cycle window: the trace transitions strictly after the first
    occurrence of t's destination, plus t itself.  The cycle is full when
    the events executed in the window equal the union of the events
    enabled at the window's destination states.
    """
    seq = trace.state_seq()
    if t.dst not in seq:
        return False
    i = trace.first(t.dst)
    window = trace.steps[i:] + [t]
    events_fc = {x.event for x in window}
    enabled_union: set[str] = set()
    for x in window:
        enabled_union.update(store.node(x.dst).enabled)
    return events_fc == enabled_union


class _CapExceeded(Exception):
    pass


class _HaltExploration(Exception):
    pass


@dataclass
class _Frame:
    sid: StateId
    setup_done: bool = False


class DporEngine:
    """One engine instance explores one program; single-threaded."""

    def __init__(self, program: Program, config: EngineConfig | None = None) -> None:
        self.program = program
        self.config = config or EngineConfig()
        self.store = StateStore(program)
        self.graph = TransitionGraph(self.store)
        self.history: set[StateId] = set()
        self.executions = 0
        self.s0, _ = self.store.canonicalize(initial_valuation(program))
        self.graph.add_node(self.s0)
        self._trace_steps: list[Transition] = []
        self._violations: list[tuple[str, str, Transition]] = []
        self._sites: set[tuple[str, str]] = set()
        self._halt = False
        self._summary_mode = self.config.mode == MODE_SUMMARY
        self._order = {name: i for i, name in enumerate(program.event_names)}

    # -- top level ----------------------------------------------------------

    def explore_all(self) -> ExplorationReport:
        started = time.perf_counter()
        terminated_by = "normal"
        try:
            self.explore(self.s0)
            while True:
                pending = self._lowest_pending_state()
                if pending is None:
                    break
                self.explore(pending)
        except _CapExceeded:
            terminated_by = "cap"
        except _HaltExploration:
            pass
        return ExplorationReport(
            states=len(self.graph.nodes),
            transitions=len(self.graph.transitions),
            executions=self.executions,
            violations=self._build_violations(),
            wall_seconds=time.perf_counter() - started,
            terminated_by=terminated_by,
        )

    def _lowest_pending_state(self) -> StateId | None:
        for sid in self.store.ids():
            node = self.store.node(sid)
            if node.backtrack != node.done:
                return sid
        return None

    def _build_violations(self) -> list[Violation]:
        out = []
        for event, message, t in self._violations:
            prefix = self.graph.execution_witness(t.src, self.s0)
            if prefix is None:
                raise AssertionError(f"violating state s{t.src} unreachable in R")
            out.append(Violation(event=event, message=message, trace=(*prefix, event)))
        return out

    # -- per-state exploration ----------------------------------------------

    def explore(self, root: StateId) -> None:
        frames = [_Frame(root)]
        while frames:
            fr = frames[-1]
            node = self.store.node(fr.sid)
            if not fr.setup_done:
                fr.setup_done = True
                if node.backtrack == node.done:
                    if node.done == set(node.enabled):
                        if node.enabled:
                            # Continuing past a state match: re-run one
                            # enabled event.  Rotate the pick per state so
                            # repeated continuations cover every enabled
                            # event; a fixed pick can starve the full-cycle
                            # condition forever on cyclic spaces.
                            idx = self._continuation.get(fr.sid, 0)
                            self._continuation[fr.sid] = idx + 1
                            node.done.discard(node.enabled[idx % len(node.enabled)])
                        else:
                            self._finish_execution(fr.sid)
                            frames.pop()
                            continue
                    else:
                        e = next(x for x in node.enabled if x not in node.done)
                        self._add_to_backtrack(node, e)
            b = next(
                (x for x in node.enabled if x in node.backtrack and x not in node.done),
                None,
            )
            if b is None:
                frames.pop()
                continue
            cfg = self.config
            if cfg.max_executions is not None and self.executions >= cfg.max_executions:
                raise _CapExceeded
            node.done.add(b)
            t = self._next(fr.sid, b)
            if self._halt:
                raise _HaltExploration
            dst_node = self.store.node(t.dst)
            dst_enabled = set(dst_node.enabled)
            for e in node.enabled:
                if e not in dst_enabled:
                    self._add_to_backtrack(node, e)
            self.update_backtrack_set(t)
            if self._execution_should_end(t, fr.sid):
                self.update_backtrack_sets_from_graph(t)
                self._finish_execution(fr.sid)
            else:
                if t.dst in self._window(fr.sid).states():
                    self.update_backtrack_sets_from_graph(t)
                if cfg.max_trace_len is not None and len(self._trace_steps) >= cfg.max_trace_len:
                    raise _CapExceeded
                self._trace_steps.append(t)
                frames.append(_Frame(t.dst))

    def _execution_should_end(self, t: Transition, frame_sid: StateId) -> bool:
        return t.dst in self.history or self._check_full_cycle(t, self._window(frame_sid))

    def _check_full_cycle(self, t: Transition, window: Trace) -> bool:
        return is_full_cycle(t, window, self.store)

    def _window(self, frame_sid: StateId) -> Trace:
        """The current execution's trace; an empty window starts at the
        state currently being explored."""
        if self._trace_steps:
            return Trace(start=self._trace_steps[0].src, steps=self._trace_steps)
        return Trace(start=frame_sid, steps=self._trace_steps)

    def _finish_execution(self, frame_sid: StateId) -> None:
        self.history.update(self._window(frame_sid).states())
        self._trace_steps = []
        self.executions += 1

    def _next(self, sid: StateId, event: str) -> Transition:
        node = self.store.node(sid)
        post, accesses, failures = execute_event(node.valuation, event, self.program)
        dst, _ = self.store.canonicalize(post)
        t, created = self.graph.add_transition(sid, event, dst, accesses, tuple(failures))
        if created:
            for message in failures:
                site = (event, message)
                if site not in self._sites:
                    self._sites.add(site)
                    self._violations.append((event, message, t))
                    if self.config.stop_policy == STOP_FIRST:
                        self._halt = True
        return t

    def _add_to_backtrack(self, node: StateNode, event: str) -> None:
        assert event in node.enabled, f"{event} not enabled at s{node.id}"
        node.backtrack.add(event)

    # -- backtrack propagation ------------------------------------------------

    def update_backtrack_set(self, t: Transition) -> None:
        if self._summary_mode:
            self._dfs_event(t, t.event, t.accesses, {t})
        else:
            self._dfs_transition(t, t, t.accesses, {t})

    def _dfs_transition(
        self,
        t_curr: Transition,
        t_conf: Transition,
        accesses: frozenset[Access],
        explored: set[Transition],
    ) -> None:
        """Backwards DFS placing backtracking points for t_conf's event on
        every path into t_curr, shrinking the access set at each conflict.

        The explored set is path-scoped: edges enter it when the walk
        descends through them and leave it on backtrack.  Predecessor
        lists are stored in id order, so the walk is deterministic.
        """
        explored = set(explored)
        # Frame: (pred iterator, conflict transition, live accesses, edge to
        # release when the frame pops).
        frames = [(iter(self.graph.predecessors(t_curr)), t_conf, accesses, None)]
        while frames:
            it, conf, acc, _ = frames[-1]
            for t_b in it:
                if t_b in explored:
                    continue
                hit, remaining = _split_against(acc, t_b)
                conf_next = conf
                if hit:
                    self._place_backtrack_point(conf.event, t_b.src)
                    conf_next = t_b
                if remaining:  # an empty access set can never place a point
                    explored.add(t_b)
                    frames.append(
                        (iter(self.graph.predecessors(t_b)), conf_next, remaining, t_b)
                    )
                    break
            else:
                released = frames.pop()[3]
                if released is not None:
                    explored.discard(released)

    def _dfs_event(
        self,
        t_curr: Transition,
        e_conf: str,
        accesses: frozenset[Access],
        explored: set[Transition],
    ) -> None:
        """Summary-cache variant: record (event, accesses) at each state the
        search passes through and stop once every access is already known."""
        accesses = self.update_state_summary(t_curr.src, e_conf, accesses)
        if not accesses:
            return
        explored = set(explored)
        frames = [(iter(self.graph.predecessors(t_curr)), e_conf, accesses, None)]
        while frames:
            it, conf, acc, _ = frames[-1]
            for t_b in it:
                if t_b in explored:
                    continue
                hit, remaining = _split_against(acc, t_b)
                conf_next = conf
                if hit:
                    self._place_backtrack_point(conf, t_b.src)
                    conf_next = t_b.event
                remaining = self.update_state_summary(t_b.src, conf_next, remaining)
                if remaining:
                    explored.add(t_b)
                    frames.append(
                        (iter(self.graph.predecessors(t_b)), conf_next, remaining, t_b)
                    )
                    break
            else:
                released = frames.pop()[3]
                if released is not None:
                    explored.discard(released)

    def _place_backtrack_point(self, event: str, sid: StateId) -> None:
        """Schedule `event` at state sid, or everything enabled there when
        the event itself is disabled."""
        node = self.store.node(sid)
        if event in node.enabled:
            self._add_to_backtrack(node, event)
        else:
            for e in node.enabled:
                self._add_to_backtrack(node, e)

    def update_state_summary(
        self, sid: StateId, event: str, accesses: frozenset[Access]
    ) -> frozenset[Access]:
        """Returns the accesses not yet recorded for (sid, event) and
        records them; summary-cache mode only."""
        node = self.store.node(sid)
        recorded = node.summary.setdefault(event, set())
        fresh = frozenset(a for a in accesses if a not in recorded)
        recorded.update(fresh)
        return fresh

    def update_backtrack_sets_from_graph(self, t: Transition) -> None:
        """Re-propagate conflicts after reaching a previously discovered
        state, so skipped re-explorations still place their points."""
        if not self._summary_mode:
            for reachable in self.graph.reachable_transitions(t):
                self.update_backtrack_set(reachable)
            return
        dst_summary = self.store.node(t.dst).summary
        for event in sorted(dst_summary, key=self._order.__getitem__):
            recorded = frozenset(dst_summary[event])
            if not recorded:
                continue
            hit, remaining = _split_against(recorded, t)
            conf = event
            if hit:
                self._place_backtrack_point(event, t.src)
                conf = t.event
            self._dfs_event(t, conf, remaining, {t})


def explore_all(program: Program, config: EngineConfig | None = None) -> ExplorationReport:
    """Run the full exploration and return its report."""
    return DporEngine(program, config).explore_all()
