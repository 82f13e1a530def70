from __future__ import annotations

from upsum.bitcore import BitString, DyadicRational
from upsum.enumerator import ExploreBudget, explore
from upsum.machine import Dialect, Machine
from upsum.translate import XLATE_PREFIX, restricted_report, subintegral_check


def test_prefix_measure():
    assert XLATE_PREFIX.bits == BitString("1110")
    assert XLATE_PREFIX.measure == DyadicRational(1, 4)


def test_restricted_programs_start_with_prefix():
    rep = restricted_report(ExploreBudget(10, 100), "1110")
    assert rep.halted
    assert all(r.program.startswith(BitString("1110")) for r in rep.halted)


def test_empty_prefix_is_plain_explore():
    assert restricted_report(ExploreBudget(10, 100), "") == explore(ExploreBudget(10, 100))


def test_halt_prefix():
    rep = restricted_report(ExploreBudget(10, 100), "1111")
    assert [r.program.bits for r in rep.halted] == ["1111"]
    assert rep.halted_mass == DyadicRational(1, 4)
    assert rep.unresolved == ()


def test_check_passes_len12():
    v = subintegral_check(ExploreBudget(12, 200))
    assert v.passed and v.first_mismatch is None
    rep = restricted_report(ExploreBudget(12, 200))
    outputs = {r.program.bits: r.output.bits for r in rep.halted}
    # OUT1 in dialect B is 00
    assert outputs["1110001111"] == "1"
    assert v.restricted_sum.same_value(v.scaled_b_sum)


def test_check_vacuous_when_no_room():
    v = subintegral_check(ExploreBudget(4, 10))
    assert v.passed and v.halted == 0


def test_check_tiny_step_budget():
    assert subintegral_check(ExploreBudget(8, 1)).passed


def test_corrupted_table_fails():
    bad = Machine({Dialect.A: (0, 1), Dialect.B: (0, 1)})
    v = subintegral_check(ExploreBudget(12, 200), reference=bad)
    assert not v.passed
    assert "1110" in v.first_mismatch
