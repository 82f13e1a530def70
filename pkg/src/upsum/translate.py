"""The A-to-B translation prefix and the sub-integral it carves out.

Every dialect-A program that starts with the XLATE opcode ``1110`` runs the
rest of its bits as a dialect-B program, one step later and four bits
further along the tape. So the part of the A path sum living under
``1110`` is a copy of the whole B path sum, shrunk by ``2**-4``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bitcore import BitString, DyadicRational
from .enumerator import ExplorationReport, ExploreBudget, HaltingRecord, UnresolvedNode, explore, explore_region
from .machine import DEFAULT_MACHINE, Dialect, Machine
from .pathsum import ExactAmplitude, halted_phase_sum

__all__ = [
    "TranslationPrefix",
    "XLATE_PREFIX",
    "SubintegralVerdict",
    "restricted_report",
    "shifted_budget",
    "subintegral_check",
]


@dataclass(frozen=True)
class TranslationPrefix:
    bits: BitString = BitString("1110")

    @property
    def measure(self) -> DyadicRational:
        return DyadicRational.power_of_half(len(self.bits))


XLATE_PREFIX = TranslationPrefix()


def restricted_report(
    budget: ExploreBudget,
    prefix: BitString | str = XLATE_PREFIX.bits,
    dialect: Dialect = Dialect.A,
    machine: Machine = DEFAULT_MACHINE,
    workers: int | None = None,
) -> ExplorationReport:
    """Programs extending ``prefix`` only; measures stay absolute."""
    prefix = BitString(prefix) if isinstance(prefix, str) else prefix
    return explore_region(budget, prefix, dialect, machine, workers)


def shifted_budget(budget: ExploreBudget, prefix: TranslationPrefix = XLATE_PREFIX) -> tuple[int, int]:
    """(max_len, max_steps) left for the translated program: minus the prefix bits and the XLATE step."""
    return budget.max_len - len(prefix.bits), budget.max_steps - 1


def _translated_report(
    budget: ExploreBudget,
    machine: Machine,
    workers: int | None,
    prefix: TranslationPrefix,
) -> tuple[list[HaltingRecord], list[UnresolvedNode]]:
    max_len, max_steps = shifted_budget(budget, prefix)
    # a budget with no room left is just the open root
    if max_steps < 1:
        return [], [UnresolvedNode(BitString(), "gas")]
    if max_len < 1:
        return [], [UnresolvedNode(BitString(), "len")]
    rep = explore(ExploreBudget(max_len, max_steps), Dialect.B, machine, workers)
    return list(rep.halted), list(rep.unresolved)


@dataclass(frozen=True)
class SubintegralVerdict:
    passed: bool
    budget: ExploreBudget
    halted: int
    unresolved: int
    restricted_sum: ExactAmplitude
    scaled_b_sum: ExactAmplitude
    first_mismatch: str | None = None
    examples: tuple[tuple[str, str, str], ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_len": self.budget.max_len,
            "max_steps": self.budget.max_steps,
            "halted": self.halted,
            "unresolved": self.unresolved,
            "restricted_sum": self.restricted_sum.to_dict(),
            "scaled_b_sum": self.scaled_b_sum.to_dict(),
            "first_mismatch": self.first_mismatch,
            "examples": [list(x) for x in self.examples],
        }


def subintegral_check(
    budget: ExploreBudget,
    machine: Machine = DEFAULT_MACHINE,
    reference: Machine | None = None,
    workers: int | None = None,
    prefix: TranslationPrefix = XLATE_PREFIX,
) -> SubintegralVerdict:
    """Compare the ``1110`` sub-integral of dialect A with the whole dialect-B sum.

    ``reference`` runs the B side (defaults to ``machine``); passing a machine
    with a different B table is the negative control. Records are compared
    one by one: ``1110 q`` must halt with the output of ``q`` in one more
    step, and open subtrees must match the same way.
    """
    reference = machine if reference is None else reference
    a = restricted_report(budget, prefix.bits, Dialect.A, machine, workers)
    b_halted, b_open = _translated_report(budget, reference, workers, prefix)

    mismatch = None
    lifted = [HaltingRecord(prefix.bits + r.program, r.output, r.steps + 1) for r in b_halted]
    for ra, rb in zip(a.halted, lifted):
        if ra != rb:
            mismatch = f"A {ra.program} -> {ra.output.bits or '-'} in {ra.steps} vs B-lifted {rb.program} -> {rb.output.bits or '-'} in {rb.steps}"
            break
    if mismatch is None and len(a.halted) != len(lifted):
        extra = a.halted[len(lifted)] if len(a.halted) > len(lifted) else lifted[len(a.halted)]
        side = "A" if len(a.halted) > len(lifted) else "B"
        mismatch = f"{extra.program} halts only on the {side} side"
    if mismatch is None:
        lifted_open = sorted(UnresolvedNode(prefix.bits + u.prefix, u.reason) for u in b_open)
        for ua, ub in zip(a.unresolved, lifted_open):
            if ua != ub:
                mismatch = f"open subtree {ua.prefix} ({ua.reason}) vs {ub.prefix} ({ub.reason})"
                break
        if mismatch is None and len(a.unresolved) != len(lifted_open):
            mismatch = "different number of open subtrees"

    restricted = halted_phase_sum(a)
    b_sum = ExactAmplitude()
    if b_halted:
        b_sum = halted_phase_sum(ExplorationReport.build(ExploreBudget(1, 1), Dialect.B, b_halted, (), machine=reference))
    scaled = b_sum * prefix.measure
    if mismatch is None and not restricted.same_value(scaled):
        mismatch = "halted-phase sums differ"

    examples = tuple((r.program.bits, r.output.bits, r.program.bits[len(prefix.bits):]) for r in a.halted[:3])
    return SubintegralVerdict(
        mismatch is None, budget, len(a.halted), len(a.unresolved), restricted, scaled, mismatch, examples
    )
