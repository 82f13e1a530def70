from __future__ import annotations

import cmath
import math

from hypothesis import given, settings, strategies as st

from upsum.bitcore import DyadicRational, ONE, PhaseFraction
from upsum.enumerator import ExploreBudget, explore
from upsum.pathsum import ExactAmplitude, halted_phase_sum, sigma_enclosure, sigma_paper


def ph(m, e):
    return PhaseFraction(DyadicRational(m, e))


terms = st.lists(
    st.tuples(st.integers(0, 15), st.integers(1, 64)),
    max_size=6,
)


def amp(ts, h=0):
    return ExactAmplitude(((ph(q, 4), DyadicRational(c, 4)) for q, c in ts), h)


def naive(ts, h=0):
    return sum(c / 16 * cmath.exp(2j * math.pi * q / 16) for q, c in ts) * 2 ** (-h / 2)


def test_sigma_paper_len6():
    s = sigma_paper(explore(ExploreBudget(6, 100)))
    assert s.terms == {ph(0, 0): DyadicRational(63, 6), ph(1, 1): DyadicRational(1, 6)}
    assert s.canonical().terms == {ph(0, 0): DyadicRational(31, 5)}
    assert s.to_complex() == 0.96875


def test_enclosure_len6():
    enc = sigma_enclosure(explore(ExploreBudget(6, 100)))
    assert enc.radius == DyadicRational(29, 5)
    assert enc.center.same_value(ExactAmplitude.unit(coeff=DyadicRational(1, 4)))


def test_enclosure_len4():
    enc = sigma_enclosure(explore(ExploreBudget(4, 100)))
    assert enc.center.to_complex() == 1 / 16
    assert enc.radius == DyadicRational(15, 4)


def test_opposite_phases_cancel():
    a = ExactAmplitude({ph(0, 0): ONE, ph(1, 1): ONE})
    assert a.is_zero()
    assert a.to_complex() == 0
    # structurally the terms are still there
    assert len(a.terms) == 2


def test_sqrt2_fold():
    # 2**-1/2 * (e(1/8) + e(-1/8)) == 1
    a = ExactAmplitude({ph(1, 3): ONE, ph(7, 3): ONE}, 1)
    assert a.same_value(ExactAmplitude.unit())


def test_quarter_turns_exact():
    assert ExactAmplitude.unit(ph(1, 1)).to_complex() == -1
    assert ExactAmplitude.unit(ph(1, 2)).to_complex() == 1j


def test_dict_round_trip():
    a = ExactAmplitude({ph(3, 4): DyadicRational(5, 7), ph(1, 1): ONE}, 3)
    assert ExactAmplitude.from_dict(a.to_dict()) == a


@settings(max_examples=200, deadline=None)
@given(terms, terms, st.integers(0, 6), st.integers(0, 6))
def test_arithmetic_matches_floats(t1, t2, h1, h2):
    a, b = amp(t1, h1), amp(t2, h2)
    za, zb = naive(t1, h1), naive(t2, h2)
    assert abs((a + b).to_complex() - (za + zb)) < 1e-12
    assert abs((a * b).to_complex() - za * zb) < 1e-12
    assert abs(a.conj().to_complex() - za.conjugate()) < 1e-12
    assert abs(a.real_part().to_complex() - za.real) < 1e-12
    assert a.is_zero() == (abs(za) < 1e-12)


@settings(max_examples=200, deadline=None)
@given(terms, st.integers(0, 6))
def test_canonical_keeps_value(t, h):
    a = amp(t, h)
    c = a.canonical()
    assert abs(c.to_complex() - a.to_complex()) < 1e-12
    assert c.canonical() == c
    assert a.same_value(c)


def test_enclosures_nest_and_bound():
    prev = None
    for t in (10, 100, 1000):
        rep = explore(ExploreBudget(12, t))
        enc = sigma_enclosure(rep)
        assert abs(sigma_paper(rep).to_complex()) <= 1 + 1e-12
        assert enc.contains(sigma_paper(rep).to_complex())
        if prev is not None:
            assert enc.within(prev)
            assert enc.radius <= prev.radius
        prev = enc


def test_halted_phase_sum_matches_records():
    rep = explore(ExploreBudget(12, 300))
    z = sum(float(r.measure) * cmath.exp(2j * math.pi * float(r.phase)) for r in rep.halted)
    assert abs(halted_phase_sum(rep).to_complex() - z) < 1e-12
