"""Bit strings and exact dyadic arithmetic.

Everything downstream (program measures, output phases, amplitude
coefficients) is a number of the form m / 2**e, so this module carries a
small exact type for those instead of going through floats or a general
rational class.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Iterator, Union

__all__ = [
    "BitString",
    "DyadicRational",
    "PhaseFraction",
    "bits_to_dyadic",
    "is_proper_prefix",
    "dyadic_add_mod1",
]


@dataclass(frozen=True, order=True)
class BitString:
    """Immutable finite bit sequence, rendered as raw ``0``/``1`` characters.

    Ordering is plain string ordering: a prefix sorts before its extensions
    and strings of equal length compare lexicographically.
    """

    bits: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.bits, str):
            raise TypeError(f"BitString expects a str of 0/1, got {type(self.bits).__name__}")
        if self.bits.strip("01"):
            raise ValueError(f"not a bit string: {self.bits!r}")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitString:
        return cls("".join("1" if b else "0" for b in bits))

    @classmethod
    def from_int(cls, value: int, width: int) -> BitString:
        """``width`` bits of ``value``, most significant first."""
        if value < 0 or value >> width:
            raise ValueError(f"{value} does not fit in {width} bits")
        return cls(format(value, f"0{width}b") if width else "")

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, index: int) -> int:
        return 1 if self.bits[index] == "1" else 0

    def __iter__(self) -> Iterator[int]:
        return (1 if c == "1" else 0 for c in self.bits)

    def __add__(self, other: BitString) -> BitString:
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString(self.bits + other.bits)

    def __str__(self) -> str:
        return self.bits

    def startswith(self, prefix: BitString) -> bool:
        return self.bits.startswith(prefix.bits)

    def slice(self, start: int, stop: int | None = None) -> BitString:
        return BitString(self.bits[start:stop])

    def to_int(self) -> int:
        return int(self.bits, 2) if self.bits else 0


def _as_bitstring(value: Union[BitString, str]) -> BitString:
    return value if isinstance(value, BitString) else BitString(value)


_DYADIC_TEXT = re.compile(r"^(\d+)/2\^(\d+)$")


@total_ordering
class DyadicRational:
    """Exact non-negative number ``numerator / 2**exponent``.

    Always stored reduced: the numerator is odd, or the value is zero with
    exponent 0. Subtraction that would go negative raises ``ValueError``.
    """

    __slots__ = ("numerator", "exponent")

    numerator: int
    exponent: int

    def __init__(self, numerator: int = 0, exponent: int = 0) -> None:
        if numerator < 0:
            raise ValueError(f"DyadicRational is non-negative, got numerator {numerator}")
        if numerator == 0:
            exponent = 0
        else:
            while exponent < 0:
                numerator <<= 1
                exponent += 1
            tz = (numerator & -numerator).bit_length() - 1
            shift = min(tz, exponent)
            numerator >>= shift
            exponent -= shift
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicRational is immutable")

    @classmethod
    def from_fraction(cls, value: Fraction | int) -> DyadicRational:
        value = Fraction(value)
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not dyadic")
        return cls(value.numerator, den.bit_length() - 1)

    @classmethod
    def parse(cls, text: str) -> DyadicRational:
        """Inverse of ``str()``: accepts ``"m/2^e"``."""
        m = _DYADIC_TEXT.match(text.strip())
        if not m:
            raise ValueError(f"not a dyadic rational: {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    @classmethod
    def power_of_half(cls, exponent: int) -> DyadicRational:
        return cls(1, exponent)

    def _aligned(self, other: DyadicRational) -> tuple[int, int, int]:
        e = max(self.exponent, other.exponent)
        return self.numerator << (e - self.exponent), other.numerator << (e - other.exponent), e

    def __add__(self, other: DyadicRational) -> DyadicRational:
        if not isinstance(other, DyadicRational):
            return NotImplemented
        a, b, e = self._aligned(other)
        return DyadicRational(a + b, e)

    def __sub__(self, other: DyadicRational) -> DyadicRational:
        if not isinstance(other, DyadicRational):
            return NotImplemented
        a, b, e = self._aligned(other)
        if b > a:
            raise ValueError(f"{self} - {other} is negative")
        return DyadicRational(a - b, e)

    def __mul__(self, other: DyadicRational) -> DyadicRational:
        if not isinstance(other, DyadicRational):
            return NotImplemented
        return DyadicRational(self.numerator * other.numerator, self.exponent + other.exponent)

    def halve(self, times: int = 1) -> DyadicRational:
        return DyadicRational(self.numerator, self.exponent + times)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, DyadicRational):
            return self.numerator == other.numerator and self.exponent == other.exponent
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() == other
        return NotImplemented

    def __lt__(self, other: DyadicRational) -> bool:
        if not isinstance(other, DyadicRational):
            return NotImplemented
        a, b, _ = self._aligned(other)
        return a < b

    def __hash__(self) -> int:
        # agree with Fraction/int hashing since __eq__ accepts them
        return hash(self.as_fraction())

    def __bool__(self) -> bool:
        return self.numerator != 0

    def __float__(self) -> float:
        return self.numerator / (1 << self.exponent)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def __str__(self) -> str:
        return f"{self.numerator}/2^{self.exponent}"

    def __repr__(self) -> str:
        return f"DyadicRational({self.numerator}, {self.exponent})"

    def __reduce__(self):
        return (DyadicRational, (self.numerator, self.exponent))


ZERO = DyadicRational(0)
ONE = DyadicRational(1)


@total_ordering
class PhaseFraction:
    """A phase angle stored as an exact fraction of a full turn, kept in [0, 1)."""

    __slots__ = ("turn",)

    turn: DyadicRational

    def __init__(self, turn: DyadicRational | Fraction | int = ZERO) -> None:
        if not isinstance(turn, DyadicRational):
            turn = Fraction(turn)
            turn = DyadicRational.from_fraction(turn - (turn.numerator // turn.denominator))
        elif turn.numerator >> turn.exponent:
            # drop the integer part
            turn = DyadicRational(turn.numerator & ((1 << turn.exponent) - 1), turn.exponent)
        object.__setattr__(self, "turn", turn)

    def __setattr__(self, name, value):
        raise AttributeError("PhaseFraction is immutable")

    @classmethod
    def from_grid(cls, index: int, exponent: int) -> PhaseFraction:
        """The phase ``index / 2**exponent`` turns, ``index`` taken modulo the grid."""
        return cls(DyadicRational(index % (1 << exponent), exponent))

    def grid_index(self, exponent: int) -> int:
        """Position of this phase on the ``2**exponent`` grid."""
        if self.turn.exponent > exponent:
            raise ValueError(f"{self} is not on the 2^{exponent} grid")
        return self.turn.numerator << (exponent - self.turn.exponent)

    def __add__(self, other: PhaseFraction) -> PhaseFraction:
        if not isinstance(other, PhaseFraction):
            return NotImplemented
        return PhaseFraction(self.turn + other.turn)

    def __neg__(self) -> PhaseFraction:
        if not self.turn:
            return self
        return PhaseFraction(ONE - self.turn)

    def __sub__(self, other: PhaseFraction) -> PhaseFraction:
        if not isinstance(other, PhaseFraction):
            return NotImplemented
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhaseFraction):
            return NotImplemented
        return self.turn == other.turn

    def __lt__(self, other: PhaseFraction) -> bool:
        if not isinstance(other, PhaseFraction):
            return NotImplemented
        return self.turn < other.turn

    def __hash__(self) -> int:
        return hash(("phase", self.turn.numerator, self.turn.exponent))

    def __float__(self) -> float:
        return float(self.turn)

    def __str__(self) -> str:
        return str(self.turn)

    def __repr__(self) -> str:
        return f"PhaseFraction({self.turn})"

    def __reduce__(self):
        return (PhaseFraction, (self.turn,))


def bits_to_dyadic(b: BitString | str) -> DyadicRational:
    """Read ``b`` as the binary fraction ``0.b1 b2 ...``."""
    b = _as_bitstring(b)
    return DyadicRational(b.to_int(), len(b))


def is_proper_prefix(a: BitString | str, b: BitString | str) -> bool:
    a, b = _as_bitstring(a), _as_bitstring(b)
    return len(a) < len(b) and b.startswith(a)


def dyadic_add_mod1(x: PhaseFraction, y: PhaseFraction) -> PhaseFraction:
    return x + y
