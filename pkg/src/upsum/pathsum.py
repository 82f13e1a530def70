"""Exact phase-grid amplitudes and truncated universal path sums.

An ``ExactAmplitude`` is ``2**(-h/2) * sum_q c_q * exp(2*pi*i*q)`` with
dyadic phases ``q`` (in turns) and non-negative dyadic coefficients
``c_q``. Signs never appear: a minus sign is a half-turn phase. Addition
is coefficient-wise and never cancels terms on its own; ``canonical()``
gives the unique reduced form when value equality is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .bitcore import ONE, ZERO, DyadicRational, PhaseFraction
from .enumerator import ExplorationReport

__all__ = [
    "ExactAmplitude",
    "Enclosure",
    "sigma_paper",
    "sigma_enclosure",
    "halted_phase_sum",
    "amplitude_add",
    "to_complex",
]

_EIGHTH = PhaseFraction(DyadicRational(1, 3))
_SEVEN_EIGHTHS = PhaseFraction(DyadicRational(7, 3))
_HALF = PhaseFraction(DyadicRational(1, 1))


class ExactAmplitude:
    __slots__ = ("terms", "half_exponent", "_key")

    terms: Mapping[PhaseFraction, DyadicRational]
    half_exponent: int

    def __init__(
        self,
        terms: Mapping[PhaseFraction, DyadicRational] | Iterable[tuple[PhaseFraction, DyadicRational]] = (),
        half_exponent: int = 0,
    ) -> None:
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[PhaseFraction, DyadicRational] = {}
        for q, c in items:
            if not isinstance(q, PhaseFraction):
                q = PhaseFraction(q)
            if not isinstance(c, DyadicRational):
                c = DyadicRational.from_fraction(c)
            if c:
                merged[q] = merged[q] + c if q in merged else c
        object.__setattr__(self, "terms", dict(sorted(merged.items())))
        # the empty sum has one representation whatever scale it was built with
        object.__setattr__(self, "half_exponent", int(half_exponent) if merged else 0)
        object.__setattr__(self, "_key", (tuple(self.terms.items()), self.half_exponent))

    def __setattr__(self, name, value):
        raise AttributeError("ExactAmplitude is immutable")

    @classmethod
    def zero(cls) -> ExactAmplitude:
        return cls()

    @classmethod
    def unit(cls, phase: PhaseFraction | DyadicRational | int = ZERO, coeff: DyadicRational = ONE, half_exponent: int = 0) -> ExactAmplitude:
        phase = phase if isinstance(phase, PhaseFraction) else PhaseFraction(phase)
        return cls({phase: coeff}, half_exponent)

    @classmethod
    def from_grid(cls, counts: Mapping[int, int], grid_exponent: int, coeff_exponent: int = 0, half_exponent: int = 0) -> ExactAmplitude:
        """Build from integer counts per grid index: ``sum counts[j] * 2**-coeff_exponent * e(j / 2**grid_exponent)``."""
        return cls(
            ((PhaseFraction.from_grid(j, grid_exponent), DyadicRational(c, coeff_exponent)) for j, c in counts.items()),
            half_exponent,
        )

    # -- structure --

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExactAmplitude):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        body = ", ".join(f"{q}: {c}" for q, c in self.terms.items())
        return f"ExactAmplitude({{{body}}}, half_exponent={self.half_exponent})"

    def with_half_exponent(self, h: int) -> ExactAmplitude:
        """Same value written with scale ``2**(-h/2)``; needs ``h`` of the same parity."""
        diff = h - self.half_exponent
        if diff % 2:
            raise ValueError("half exponents of different parity; use canonical() first")
        if diff >= 0:
            factor = DyadicRational(1 << (diff // 2))
        else:
            factor = DyadicRational(1, -diff // 2)
        return ExactAmplitude({q: c * factor for q, c in self.terms.items()}, h)

    def _even(self) -> ExactAmplitude:
        if self.half_exponent % 2 == 0:
            return self
        # 2**(-h/2) = 2**(-(h+1)/2) * sqrt(2),  sqrt(2) = e(1/8) + e(-1/8)
        folded = ExactAmplitude(self.terms) * _SQRT2
        return ExactAmplitude(folded.terms, self.half_exponent + 1)

    def canonical(self) -> ExactAmplitude:
        """Unique representative of this value: scale 1, at most one phase per antipodal pair.

        The powers ``e(j / 2**m)`` for ``j < 2**(m-1)`` are linearly independent
        over the rationals and ``e(q + 1/2) = -e(q)``, so netting each phase
        against its antipode leaves a form that is equal iff the values are.
        """
        amp = self._even().with_half_exponent(0)
        pos: dict[PhaseFraction, DyadicRational] = {}
        neg: dict[PhaseFraction, DyadicRational] = {}
        for q, c in amp.terms.items():
            if q.turn < _HALF.turn:
                pos[q] = pos.get(q, ZERO) + c
            else:
                base = q - _HALF
                neg[base] = neg.get(base, ZERO) + c
        out: dict[PhaseFraction, DyadicRational] = {}
        for base in set(pos) | set(neg):
            a, b = pos.get(base, ZERO), neg.get(base, ZERO)
            if a > b:
                out[base] = a - b
            elif b > a:
                out[base + _HALF] = b - a
        return ExactAmplitude(out, 0)

    def is_zero(self) -> bool:
        """Exact test; true when the terms cancel on the phase grid."""
        return not self.canonical().terms

    def same_value(self, other: ExactAmplitude) -> bool:
        return self.canonical() == other.canonical()

    # -- arithmetic --

    def __add__(self, other: ExactAmplitude) -> ExactAmplitude:
        if not isinstance(other, ExactAmplitude):
            return NotImplemented
        a, b = self, other
        if not a.terms:
            return b
        if not b.terms:
            return a
        if (a.half_exponent - b.half_exponent) % 2:
            a, b = a._even(), b._even()
        h = max(a.half_exponent, b.half_exponent)
        a, b = a.with_half_exponent(h), b.with_half_exponent(h)
        return ExactAmplitude(list(a.terms.items()) + list(b.terms.items()), h)

    def __mul__(self, other: ExactAmplitude) -> ExactAmplitude:
        if isinstance(other, DyadicRational):
            return ExactAmplitude({q: c * other for q, c in self.terms.items()}, self.half_exponent)
        if not isinstance(other, ExactAmplitude):
            return NotImplemented
        acc: dict[PhaseFraction, DyadicRational] = {}
        for q1, c1 in self.terms.items():
            for q2, c2 in other.terms.items():
                q = q1 + q2
                c = c1 * c2
                acc[q] = acc[q] + c if q in acc else c
        return ExactAmplitude(acc, self.half_exponent + other.half_exponent)

    __rmul__ = __mul__

    def rotate(self, phase: PhaseFraction) -> ExactAmplitude:
        return ExactAmplitude({q + phase: c for q, c in self.terms.items()}, self.half_exponent)

    def conj(self) -> ExactAmplitude:
        return ExactAmplitude({-q: c for q, c in self.terms.items()}, self.half_exponent)

    def real_part(self) -> ExactAmplitude:
        """``(a + conj(a)) / 2``, still exact."""
        s = self + self.conj()
        return s * DyadicRational(1, 1)

    def norm_squared(self) -> ExactAmplitude:
        """``|a|**2`` as an exact (real-valued) amplitude."""
        return self * self.conj()

    def to_complex(self) -> complex:
        """Double-precision value (lossy; for display and oracle comparison)."""
        units = [(float(c), _unit(q)) for q, c in self.terms.items()]
        re = math.fsum(c * u[0] for c, u in units)
        im = math.fsum(c * u[1] for c, u in units)
        return complex(re, im) * 2.0 ** (-self.half_exponent / 2)

    def __complex__(self) -> complex:
        return self.to_complex()

    def to_dict(self) -> dict:
        z = self.to_complex()
        return {
            "half_exponent": self.half_exponent,
            "terms": [[str(q), str(c)] for q, c in self.terms.items()],
            "float": [_clean(z.real), _clean(z.imag)],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> ExactAmplitude:
        return cls(
            ((PhaseFraction(DyadicRational.parse(q)), DyadicRational.parse(c)) for q, c in data["terms"]),
            data["half_exponent"],
        )


def _unit(q: PhaseFraction) -> tuple[float, float]:
    """``(cos, sin)`` of ``2*pi*q``, exact on quarter turns."""
    t = q.turn
    quarter = (t.numerator << 2) >> t.exponent
    rest = DyadicRational(t.numerator * 4 - (quarter << t.exponent), t.exponent)
    angle = float(rest) * (math.pi / 2)
    c, s = (1.0, 0.0) if not rest else (math.cos(angle), math.sin(angle))
    for _ in range(quarter):
        c, s = -s, c
    return c, s


_SQRT2 = ExactAmplitude({_EIGHTH: ONE, _SEVEN_EIGHTHS: ONE})


def _clean(x: float) -> float:
    # avoid "-0.0" in structured output
    return 0.0 if x == 0 else x


def amplitude_add(a: ExactAmplitude, b: ExactAmplitude) -> ExactAmplitude:
    return a + b


def to_complex(a: ExactAmplitude) -> complex:
    return a.to_complex()


@dataclass(frozen=True)
class Enclosure:
    """Closed disk with exact center and radius."""

    center: ExactAmplitude
    radius: DyadicRational

    def contains(self, z: complex, tol: float = 1e-12) -> bool:
        return abs(z - self.center.to_complex()) <= float(self.radius) + tol

    def within(self, outer: Enclosure, tol: float = 1e-12) -> bool:
        """Disk containment: ``|c - c'| + r <= r'``."""
        gap = abs(self.center.to_complex() - outer.center.to_complex())
        return gap + float(self.radius) <= float(outer.radius) + tol

    def to_dict(self) -> dict:
        return {"center": self.center.to_dict(), "radius": str(self.radius), "radius_float": float(self.radius)}


def halted_phase_sum(report: ExplorationReport) -> ExactAmplitude:
    """``sum over halted records of 2**-|p| e(U(p))``."""
    if not report.halted:
        return ExactAmplitude()
    depth = max(len(r.program) for r in report.halted)
    grid = max(len(r.output) for r in report.halted)
    counts: dict[int, int] = {}
    for r in report.halted:
        j = r.output.to_int() << (grid - len(r.output))
        counts[j] = counts.get(j, 0) + (1 << (depth - len(r.program)))
    return ExactAmplitude.from_grid(counts, grid, depth)


def sigma_paper(report: ExplorationReport) -> ExactAmplitude:
    """Truncated sum with unresolved inputs at phase 0 (their output counts as 0)."""
    return halted_phase_sum(report) + ExactAmplitude.unit(ZERO, report.unresolved_mass)


def sigma_enclosure(report: ExplorationReport) -> Enclosure:
    """Disk guaranteed to contain the limit of the path sum over ``report.region``.

    Every unresolved unit of mass ends up somewhere on the closed unit disk
    (a phase if it halts later, 1 if it never does).
    """
    return Enclosure(halted_phase_sum(report), report.unresolved_mass)
