from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from upsum.bitcore import (
    BitString,
    DyadicRational,
    PhaseFraction,
    bits_to_dyadic,
    dyadic_add_mod1,
    is_proper_prefix,
)

bitstrings = st.text(alphabet="01", max_size=40).map(BitString)
dyadics = st.builds(DyadicRational, st.integers(0, 10**6), st.integers(0, 60))


def test_bits_to_dyadic_examples():
    assert bits_to_dyadic("") == DyadicRational(0)
    assert bits_to_dyadic("1") == DyadicRational(1, 1)
    assert bits_to_dyadic("011") == DyadicRational(3, 3)
    # trailing zeros do not change the value
    assert bits_to_dyadic("0110") == bits_to_dyadic("011")


def test_prefix_examples():
    assert is_proper_prefix("01", "011")
    assert not is_proper_prefix("011", "011")
    assert not is_proper_prefix("10", "011")
    assert not is_proper_prefix("", "")
    assert is_proper_prefix("", "0")


def test_phase_wraps():
    a = PhaseFraction(DyadicRational(3, 2))
    b = PhaseFraction(DyadicRational(1, 1))
    assert dyadic_add_mod1(a, b) == PhaseFraction(DyadicRational(1, 2))
    assert -PhaseFraction(DyadicRational(1, 4)) == PhaseFraction(DyadicRational(15, 4))


def test_canonical_text():
    assert str(DyadicRational(6, 3)) == "3/2^2"
    assert str(DyadicRational(4, 0)) == "4/2^0"
    assert str(DyadicRational(0, 9)) == "0/2^0"
    assert DyadicRational.parse("31/2^5") == Fraction(31, 32)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        BitString("012")
    with pytest.raises(ValueError):
        DyadicRational(-1, 2)
    with pytest.raises(ValueError):
        DyadicRational(1, 2) - DyadicRational(1, 1)
    with pytest.raises(ValueError):
        DyadicRational.from_fraction(Fraction(1, 3))
    with pytest.raises(ValueError):
        DyadicRational.parse("1/3")


@given(bitstrings)
def test_bits_value_in_unit_interval(b):
    v = bits_to_dyadic(b).as_fraction()
    assert 0 <= v < 1
    assert v == sum(Fraction(bit, 2 ** (i + 1)) for i, bit in enumerate(b))


@given(bitstrings, bitstrings)
def test_concat_prefix(a, b):
    assert (a + b).startswith(a)
    assert is_proper_prefix(a, a + b) == (len(b) > 0)


@given(dyadics, dyadics)
def test_arithmetic_matches_fractions(x, y):
    assert (x + y).as_fraction() == x.as_fraction() + y.as_fraction()
    assert (x * y).as_fraction() == x.as_fraction() * y.as_fraction()
    if not x < y:
        assert (x - y).as_fraction() == x.as_fraction() - y.as_fraction()
    assert (x == y) == (x.as_fraction() == y.as_fraction())
    assert (x == y) <= (hash(x) == hash(y))


@given(dyadics)
def test_text_round_trip(x):
    assert DyadicRational.parse(str(x)) == x
    assert str(DyadicRational.parse(str(x))) == str(x)


@given(dyadics, dyadics, dyadics)
def test_phase_group(a, b, c):
    pa, pb, pc = PhaseFraction(a), PhaseFraction(b), PhaseFraction(c)
    assert (pa + pb) + pc == pa + (pb + pc)
    assert pa + pb == pb + pa
    assert pa + (-pa) == PhaseFraction()
    assert 0 <= pa.turn.as_fraction() < 1


@given(st.integers(0, 2**20 - 1))
def test_from_int_round_trip(v):
    assert BitString.from_int(v, 20).to_int() == v
