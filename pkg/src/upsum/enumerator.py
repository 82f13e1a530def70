"""Exhaustive budgeted exploration of the binary program tree.

Every node of the tree is a prefix of the input. Running the machine on a
node either halts (the node is a halting program), runs out of gas (the
whole subtree is unresolved at this budget), or asks for another bit, in
which case the node branches unless it already sits at ``max_len``. The
machine state is forked at each branch, so no prefix is ever re-executed.

Masses are exact: a node of depth d carries 2**-d, and halted plus
unresolved mass always adds up to the mass of the explored region.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .bitcore import BitString, DyadicRational, PhaseFraction, bits_to_dyadic
from .machine import (
    DEFAULT_MACHINE,
    GAS,
    HALT,
    NEED,
    Dialect,
    Machine,
    MachineState,
    check_prefix_free,
    to_bitstring,
)

__all__ = [
    "ExploreBudget",
    "HaltingRecord",
    "UnresolvedNode",
    "ExplorationReport",
    "CacheMismatchError",
    "explore",
    "explore_region",
    "resume",
    "kraft_check",
    "brute_force_report",
    "save_report",
    "load_report",
    "worker_count",
]

log = logging.getLogger(__name__)

CACHE_FORMAT = "upsum-exploration"
CACHE_VERSION = 1

# split the tree into at least this many subtree tasks per worker
_TASKS_PER_WORKER = 4


@dataclass(frozen=True)
class ExploreBudget:
    max_len: int
    max_steps: int

    def __post_init__(self) -> None:
        if self.max_len < 1 or self.max_steps < 1:
            raise ValueError(f"budget components must be >= 1, got {self}")

    def covers(self, other: ExploreBudget) -> bool:
        return self.max_len >= other.max_len and self.max_steps >= other.max_steps


@dataclass(frozen=True, order=True)
class HaltingRecord:
    program: BitString
    output: BitString
    steps: int

    @property
    def phase(self) -> PhaseFraction:
        return PhaseFraction(bits_to_dyadic(self.output))

    @property
    def measure(self) -> DyadicRational:
        return DyadicRational.power_of_half(len(self.program))


@dataclass(frozen=True, order=True)
class UnresolvedNode:
    """A subtree left open: ``reason`` is ``"gas"`` (step budget) or ``"len"`` (length budget)."""

    prefix: BitString
    reason: str

    @property
    def measure(self) -> DyadicRational:
        return DyadicRational.power_of_half(len(self.prefix))


@dataclass(frozen=True)
class ExplorationReport:
    """Result of exploring the subtree under ``region`` (the whole tree by default).

    ``halted`` and ``unresolved`` are sorted tuples so equal explorations
    compare and serialise identically.
    """

    budget: ExploreBudget
    dialect: Dialect
    halted: tuple[HaltingRecord, ...]
    unresolved: tuple[UnresolvedNode, ...]
    halted_mass: DyadicRational
    unresolved_mass: DyadicRational
    region: BitString = field(default_factory=BitString)
    machine: str = DEFAULT_MACHINE.fingerprint

    @classmethod
    def build(
        cls,
        budget: ExploreBudget,
        dialect: Dialect,
        halted: Iterable[HaltingRecord],
        unresolved: Iterable[UnresolvedNode],
        region: BitString = BitString(),
        machine: Machine = DEFAULT_MACHINE,
    ) -> ExplorationReport:
        halted = tuple(sorted(halted))
        unresolved = tuple(sorted(unresolved))
        return cls(
            budget,
            Dialect(dialect),
            halted,
            unresolved,
            _mass(len(r.program) for r in halted),
            _mass(len(u.prefix) for u in unresolved),
            region,
            machine.fingerprint,
        )

    @property
    def region_mass(self) -> DyadicRational:
        return DyadicRational.power_of_half(len(self.region))

    @property
    def programs(self) -> list[BitString]:
        return [r.program for r in self.halted]


def _mass(depths: Iterable[int]) -> DyadicRational:
    """Exact sum of 2**-d over ``depths``."""
    counts: dict[int, int] = {}
    for d in depths:
        counts[d] = counts.get(d, 0) + 1
    if not counts:
        return DyadicRational(0)
    top = max(counts)
    return DyadicRational(sum(c << (top - d) for d, c in counts.items()), top)


def worker_count(workers: int | None = None) -> int:
    """Explicit argument, else ``UPSUM_WORKERS``, else 1."""
    if workers is None:
        workers = int(os.environ.get("UPSUM_WORKERS", "1") or 1)
    return max(1, workers)


# -- tree walking --


def _walk(
    machine: Machine,
    states: Sequence[MachineState],
    budget: ExploreBudget,
    detect_cycles: bool,
) -> tuple[list[HaltingRecord], list[UnresolvedNode]]:
    """Depth-first exploration of the subtrees rooted at fresh ``states``."""
    halted: list[HaltingRecord] = []
    unresolved: list[UnresolvedNode] = []
    max_len, max_steps = budget.max_len, budget.max_steps
    stack = list(reversed(states))
    while stack:
        st = stack.pop()
        status = machine.advance(st, max_steps, detect_cycles)
        _classify(st, status, max_len, halted, unresolved, stack)
    return halted, unresolved


def _classify(st, status, max_len, halted, unresolved, pending) -> None:
    if status == HALT:
        halted.append(HaltingRecord(to_bitstring(st.tape), to_bitstring(st.out), st.steps))
    elif status == GAS:
        unresolved.append(UnresolvedNode(to_bitstring(st.tape), "gas"))
    elif len(st.tape) >= max_len:
        unresolved.append(UnresolvedNode(to_bitstring(st.tape), "len"))
    else:
        # children pushed so that 0 is explored first
        pending.append(st.fork(1))
        pending.append(st.fork(0))


def _walk_task(args) -> tuple[list[HaltingRecord], list[UnresolvedNode]]:
    return _walk(*args)


def _feed(machine, st, prefix, max_steps, detect_cycles) -> int:
    bits = list(prefix)
    while True:
        status = machine.advance(st, max_steps, detect_cycles)
        if status == NEED and len(st.tape) < len(bits):
            st.tape.append(bits[len(st.tape)])
            continue
        return status


def explore_region(
    budget: ExploreBudget,
    region: BitString | str = BitString(),
    dialect: Dialect = Dialect.A,
    machine: Machine = DEFAULT_MACHINE,
    workers: int | None = None,
    detect_cycles: bool = True,
) -> ExplorationReport:
    """Explore only the programs that extend ``region``.

    Measures stay absolute (relative to the whole unit interval), so the
    report's masses add up to ``2**-len(region)``.

    Raises ``ValueError`` when ``region`` strictly extends a halting program:
    that region has no programs of its own.
    """
    region = BitString(region) if isinstance(region, str) else region
    workers = worker_count(workers)
    st = machine.start(dialect)
    status = _feed(machine, st, region, budget.max_steps, detect_cycles)
    halted: list[HaltingRecord] = []
    unresolved: list[UnresolvedNode] = []
    if len(st.tape) < len(region):
        if status == HALT:
            raise ValueError(f"region {region} extends the halting program {to_bitstring(st.tape)}")
        # the region sits inside an out-of-gas subtree
        unresolved.append(UnresolvedNode(region, "gas"))
        return ExplorationReport.build(budget, dialect, halted, unresolved, region, machine)

    pending: list[MachineState] = []
    _classify(st, status, budget.max_len, halted, unresolved, pending)
    pending.reverse()

    # breadth-first on prefix length until there is enough independent work
    target = workers * _TASKS_PER_WORKER if workers > 1 else 1
    while pending and len(pending) < target:
        level, pending = pending, []
        for node in level:
            children: list[MachineState] = []
            status = machine.advance(node, budget.max_steps, detect_cycles)
            _classify(node, status, budget.max_len, halted, unresolved, children)
            pending.extend(reversed(children))

    if workers > 1 and len(pending) > 1:
        chunks = [pending[i::workers * _TASKS_PER_WORKER] for i in range(workers * _TASKS_PER_WORKER)]
        tasks = [(machine, c, budget, detect_cycles) for c in chunks if c]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for h, u in pool.map(_walk_task, tasks):
                halted.extend(h)
                unresolved.extend(u)
    else:
        h, u = _walk(machine, pending, budget, detect_cycles)
        halted.extend(h)
        unresolved.extend(u)

    report = ExplorationReport.build(budget, dialect, halted, unresolved, region, machine)
    log.debug(
        "explored %s/%s under %r: %d halted, %d unresolved",
        budget.max_len, budget.max_steps, region.bits, len(report.halted), len(report.unresolved),
    )
    return report


def explore(
    budget: ExploreBudget,
    dialect: Dialect = Dialect.A,
    machine: Machine = DEFAULT_MACHINE,
    workers: int | None = None,
    detect_cycles: bool = True,
) -> ExplorationReport:
    return explore_region(budget, BitString(), dialect, machine, workers, detect_cycles)


def resume(
    report: ExplorationReport,
    budget: ExploreBudget,
    machine: Machine = DEFAULT_MACHINE,
    workers: int | None = None,
) -> ExplorationReport:
    """Extend ``report`` to a larger budget, re-exploring only its open subtrees.

    Halted records are kept as they are: a run that halts within t steps
    halts identically with any larger budget.
    """
    if report.machine != machine.fingerprint:
        raise CacheMismatchError("report was produced by a different machine definition")
    if not budget.covers(report.budget):
        raise ValueError(f"cannot resume {report.budget} with smaller budget {budget}")
    halted = list(report.halted)
    unresolved: list[UnresolvedNode] = []
    for node in report.unresolved:
        reopen = (node.reason == "gas" and budget.max_steps > report.budget.max_steps) or (
            node.reason == "len" and budget.max_len > report.budget.max_len
        )
        if not reopen:
            unresolved.append(node)
            continue
        sub = explore_region(budget, node.prefix, report.dialect, machine, workers)
        halted.extend(sub.halted)
        unresolved.extend(sub.unresolved)
    return ExplorationReport.build(budget, report.dialect, halted, unresolved, report.region, machine)


def kraft_check(report: ExplorationReport) -> bool:
    """Exact mass bookkeeping plus prefix-freeness of the halted set."""
    programs = report.programs
    if len(set(programs)) != len(programs):
        return False
    if report.halted_mass != _mass(len(p) for p in programs):
        return False
    if report.halted_mass + report.unresolved_mass != report.region_mass:
        return False
    return check_prefix_free(programs)


def brute_force_report(
    budget: ExploreBudget,
    dialect: Dialect = Dialect.A,
    machine: Machine = DEFAULT_MACHINE,
    detect_cycles: bool = False,
) -> ExplorationReport:
    """Independent oracle: run every string of length ``max_len`` from scratch.

    Deduplicates by consumed prefix. Exponential in ``max_len``.
    """
    halted: dict[BitString, HaltingRecord] = {}
    unresolved: dict[BitString, UnresolvedNode] = {}
    n = budget.max_len
    for value in range(1 << n):
        res = machine.run(BitString.from_int(value, n), budget.max_steps, dialect, detect_cycles)
        if res.halted:
            halted.setdefault(res.program, HaltingRecord(res.program, res.output, res.steps_used))
        else:
            reason = "len" if res.starved else "gas"
            unresolved.setdefault(res.consumed, UnresolvedNode(res.consumed, reason))
    return ExplorationReport.build(budget, dialect, halted.values(), unresolved.values(), machine=machine)


# -- cache files --


class CacheMismatchError(RuntimeError):
    """A cache file was written by a different machine definition (or format)."""


def report_to_dict(report: ExplorationReport) -> dict:
    return {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "machine": report.machine,
        "dialect": report.dialect.value,
        "region": report.region.bits,
        "budget": {"max_len": report.budget.max_len, "max_steps": report.budget.max_steps},
        "halted_mass": str(report.halted_mass),
        "unresolved_mass": str(report.unresolved_mass),
        "halted": [[r.program.bits, r.output.bits, r.steps] for r in report.halted],
        "unresolved": [[u.prefix.bits, u.reason] for u in report.unresolved],
    }


def report_from_dict(data: dict, machine: Machine = DEFAULT_MACHINE) -> ExplorationReport:
    if data.get("format") != CACHE_FORMAT or data.get("version") != CACHE_VERSION:
        raise CacheMismatchError(f"unsupported cache format {data.get('format')!r} v{data.get('version')!r}")
    if data["machine"] != machine.fingerprint:
        raise CacheMismatchError(
            f"cache machine hash {data['machine'][:12]} does not match current machine {machine.fingerprint[:12]}"
        )
    budget = ExploreBudget(**data["budget"])
    report = ExplorationReport.build(
        budget,
        Dialect(data["dialect"]),
        (HaltingRecord(BitString(p), BitString(o), int(s)) for p, o, s in data["halted"]),
        (UnresolvedNode(BitString(p), r) for p, r in data["unresolved"]),
        BitString(data["region"]),
        machine,
    )
    if str(report.halted_mass) != data["halted_mass"] or str(report.unresolved_mass) != data["unresolved_mass"]:
        raise ValueError("cache file masses do not match its records")
    return report


def save_report(report: ExplorationReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report), sort_keys=True) + "\n", encoding="utf-8")


def load_report(path: str | Path, machine: Machine = DEFAULT_MACHINE) -> ExplorationReport:
    return report_from_dict(json.loads(Path(path).read_text(encoding="utf-8")), machine)
