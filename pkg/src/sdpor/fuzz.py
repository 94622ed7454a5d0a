"""Differential fuzzing: dpor vs summary-cache vs exhaustive, per seed.

For each seed the harness generates a program, runs the three explorers,
and compares their violation sites (event, message).  Any disagreement is
a bug in one of the explorers, never in the generated program.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

from .corpus import GeneratorConfig, generate
from .engine import MODE_DPOR, MODE_SUMMARY, EngineConfig, ExplorationReport, explore_all
from .lang import Program, pretty_print
from .oracle import DEFAULT_NODE_CAP, NodeCapExceeded, exhaustive_explore

Runner = Callable[[Program], ExplorationReport]


def violation_sites(report: ExplorationReport) -> frozenset[tuple[str, str]]:
    return frozenset((v.event, v.message) for v in report.violations)


def default_runners(node_cap: int = DEFAULT_NODE_CAP) -> dict[str, Runner]:
    return {
        "dpor": lambda prog: explore_all(prog, EngineConfig(mode=MODE_DPOR)),
        "summary-cache": lambda prog: explore_all(prog, EngineConfig(mode=MODE_SUMMARY)),
        "exhaustive": lambda prog: exhaustive_explore(prog, node_cap).report,
    }


@dataclass
class SeedOutcome:
    seed: int
    status: str  # "ok" | "mismatch" | "skipped"
    detail: str = ""


@dataclass
class FuzzStats:
    ok: int = 0
    skipped: int = 0
    mismatches: list[SeedOutcome] = field(default_factory=list)

    @property
    def all_agree(self) -> bool:
        return not self.mismatches


def check_seed(
    cfg: GeneratorConfig,
    runners: dict[str, Runner] | None = None,
    node_cap: int = DEFAULT_NODE_CAP,
) -> SeedOutcome:
    program = generate(cfg)
    runners = runners or default_runners(node_cap)
    sites: dict[str, frozenset[tuple[str, str]]] = {}
    try:
        for name, run in runners.items():
            sites[name] = violation_sites(run(program))
    except NodeCapExceeded as exc:
        return SeedOutcome(seed=cfg.seed, status="skipped", detail=str(exc))
    distinct = set(sites.values())
    if len(distinct) == 1:
        return SeedOutcome(seed=cfg.seed, status="ok")
    lines = [f"violation sites diverge on seed {cfg.seed}:"]
    for name in sorted(sites):
        lines.append(f"  {name}: {sorted(sites[name])}")
    lines.append("program:")
    lines.append(pretty_print(program))
    return SeedOutcome(seed=cfg.seed, status="mismatch", detail="\n".join(lines))


def run_fuzz(
    base: GeneratorConfig,
    count: int,
    runners: dict[str, Runner] | None = None,
    node_cap: int = DEFAULT_NODE_CAP,
    log: Callable[[str], None] | None = None,
) -> FuzzStats:
    """Check `count` consecutive seeds starting at base.seed."""
    stats = FuzzStats()
    for offset in range(count):
        cfg = replace(base, seed=base.seed + offset)
        outcome = check_seed(cfg, runners=runners, node_cap=node_cap)
        if outcome.status == "ok":
            stats.ok += 1
        elif outcome.status == "skipped":
            stats.skipped += 1
            if log:
                log(f"warning: seed {outcome.seed} skipped ({outcome.detail})")
        else:
            stats.mismatches.append(outcome)
            if log:
                log(outcome.detail)
    return stats
